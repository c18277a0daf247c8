//! Choosing the number of clusters with a jump statistic on the masked
//! objective.
//!
//! Distortions are `W_K / (n * p_bar)` and jumps are
//! `D_K^(-p_bar/2) - D_{K-1}^(-p_bar/2)` with the transformed `D_0` taken as
//! zero. `p_bar`, the mean number of observed features per row, plays the role
//! of the dimension; on complete data this is the usual jump statistic.

use crate::cluster::FitResult;
use crate::dataset::MaskedDataset;
use crate::error::{Error, Result};
use crate::hartigan::{default_inits, fit, FitConfig};

/// `w_k / (n * p_bar)`.
pub fn distortion(w_k: f64, n: usize, p_bar: f64) -> f64 {
    w_k / (n as f64 * p_bar)
}

/// Jumps for distortions indexed from `K = 1` upward.
///
/// Fails with [`Error::ZeroDistortion`] naming the first `K` whose distortion
/// is zero, where the power transform is undefined.
pub fn jump_statistic(distortions: &[f64], p_bar: f64) -> Result<Vec<f64>> {
    let transformed = transform(distortions, p_bar, 1)?;
    Ok(jumps_from(0.0, &transformed))
}

fn transform(distortions: &[f64], p_bar: f64, first_k: usize) -> Result<Vec<f64>> {
    distortions
        .iter()
        .enumerate()
        .map(|(idx, &d)| {
            if d > 0.0 {
                Ok(d.powf(-p_bar / 2.0))
            } else {
                Err(Error::ZeroDistortion(first_k + idx))
            }
        })
        .collect()
}

fn jumps_from(previous: f64, transformed: &[f64]) -> Vec<f64> {
    let mut prev = previous;
    transformed
        .iter()
        .map(|&t| {
            let j = t - prev;
            prev = t;
            j
        })
        .collect()
}

/// Index of the largest jump; ties go to the smaller `K`.
fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (idx, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = idx;
        }
    }
    best
}

/// Settings for a sweep over `K`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepConfig {
    pub fit: FitConfig,
    /// Restarts per `K`; `None` uses `100 K p`.
    pub inits_per_k: Option<usize>,
    /// Upper bound applied to every per-`K` budget.
    pub inits_cap: Option<usize>,
}

impl SweepConfig {
    pub fn inits_for(&self, k: usize, p: usize) -> usize {
        let base = self.inits_per_k.unwrap_or_else(|| default_inits(k, p));
        self.inits_cap.map_or(base, |cap| base.min(cap)).max(1)
    }
}

/// Result of a sweep over a contiguous range of `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct KSweepResult {
    pub k_values: Vec<usize>,
    pub objectives: Vec<f64>,
    pub distortions: Vec<f64>,
    /// Empty when the sweep short-circuited on a zero distortion.
    pub jumps: Vec<f64>,
    pub k_hat: usize,
    pub p_bar: f64,
    pub fits: Vec<FitResult>,
    /// A fit with zero objective decided `k_hat`.
    pub degenerate: bool,
    /// Places where the distortion rose with `K`; more restarts usually help.
    pub warnings: Vec<String>,
}

impl KSweepResult {
    pub fn best_fit(&self) -> &FitResult {
        let idx = self.k_values.iter().position(|&k| k == self.k_hat).unwrap();
        &self.fits[idx]
    }
}

/// Fits every `K` in `k_min..=k_max` and picks the one with the largest jump.
///
/// When `k_min > 1` the fit at `k_min - 1` is also computed, as the baseline
/// for the first jump, but is not reported. Each `K` uses seed `seed + K`.
pub fn select_k(
    ds: &MaskedDataset,
    k_min: usize,
    k_max: usize,
    seed: u64,
    cfg: &SweepConfig,
) -> Result<KSweepResult> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::InvalidArgument(format!(
            "invalid K range {k_min}..={k_max}"
        )));
    }
    if k_max > ds.n() {
        return Err(Error::KGreaterThanN { k: k_max, n: ds.n() });
    }
    let (n, p, p_bar) = (ds.n(), ds.p(), ds.p_bar());
    let run = |k: usize| fit(ds, k, cfg.inits_for(k, p), seed.wrapping_add(k as u64), &cfg.fit);

    let baseline = if k_min > 1 {
        let prev = run(k_min - 1)?;
        Some(distortion(prev.objective, n, p_bar))
    } else {
        None
    };

    let k_values: Vec<usize> = (k_min..=k_max).collect();
    let mut fits = Vec::with_capacity(k_values.len());
    for &k in &k_values {
        fits.push(run(k)?);
    }
    let objectives: Vec<f64> = fits.iter().map(|f| f.objective).collect();
    let distortions: Vec<f64> = objectives.iter().map(|&w| distortion(w, n, p_bar)).collect();

    let mut warnings = Vec::new();
    let mut prev = baseline;
    for (&k, &d) in k_values.iter().zip(&distortions) {
        if let Some(pd) = prev {
            if d > pd * (1.0 + 1e-12) {
                warnings.push(format!(
                    "distortion increased from K = {} to K = {k} ({pd:.6e} -> {d:.6e}); consider more restarts",
                    k - 1
                ));
            }
        }
        prev = Some(d);
    }

    if let Some(idx) = distortions.iter().position(|&d| d <= 0.0) {
        return Ok(KSweepResult {
            k_hat: k_values[idx],
            k_values,
            objectives,
            distortions,
            jumps: Vec::new(),
            p_bar,
            fits,
            degenerate: true,
            warnings,
        });
    }

    let transformed = transform(&distortions, p_bar, k_min)?;
    let start = match baseline {
        Some(d) if d > 0.0 => d.powf(-p_bar / 2.0),
        // A perfect fit below the range would have been the answer; treat as no baseline.
        Some(_) | None => 0.0,
    };
    let jumps = jumps_from(start, &transformed);
    let k_hat = k_values[argmax_first(&jumps)];
    Ok(KSweepResult {
        k_values,
        objectives,
        distortions,
        jumps,
        k_hat,
        p_bar,
        fits,
        degenerate: false,
        warnings,
    })
}
