//! k-POD: alternate between filling unobserved cells with the current
//! cluster means and running complete-data k-means on the filled matrix.

use rand::Rng;

use super::hw::kmeans_hw;
use crate::cluster::{objective, ClusterState, FitResult};
use crate::dataset::MaskedDataset;
use crate::error::{Error, Result};
use crate::hartigan::KmConfig;
use crate::init::{kmeanspp_init, InitConfig, Weighting};
use crate::rng::restart_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct KpodConfig {
    pub max_outer_iters: usize,
    /// Stop when the masked objective changes by less than this, relatively.
    pub rel_tol: f64,
    pub inner: KmConfig,
    /// Restarts; the best masked objective wins.
    pub n_inits: usize,
}

impl Default for KpodConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 100,
            rel_tol: 1e-8,
            inner: KmConfig::default(),
            n_inits: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KpodFit {
    /// `objective` is the masked objective of the final partition, never the
    /// filled-matrix sum of squares; `iterations` counts outer iterations.
    pub fit: FitResult,
    /// The masked objective rose between two outer iterations.
    pub descent_violated: bool,
}

/// Best of `cfg.n_inits` k-POD runs.
///
/// Each run imputes unobserved cells with the global column means, seeds with
/// k-means++ on the filled matrix and then iterates until the assignment stops
/// changing, the relative objective change drops below `rel_tol`, or
/// `max_outer_iters` is reached.
pub fn kpod(ds: &MaskedDataset, k: usize, seed: u64, cfg: &KpodConfig) -> Result<KpodFit> {
    if cfg.n_inits == 0 || cfg.max_outer_iters == 0 {
        return Err(Error::InvalidArgument(
            "k-POD needs at least one initialization and one iteration".into(),
        ));
    }
    if k == 0 {
        return Err(Error::ZeroClusters);
    }
    if k > ds.n() {
        return Err(Error::KGreaterThanN { k, n: ds.n() });
    }
    let mut best: Option<KpodFit> = None;
    for r in 0..cfg.n_inits {
        let mut rng = restart_rng(seed, r as u64);
        let mut run = kpod_once(ds, k, &mut rng, cfg)?;
        run.fit.seed = seed;
        run.fit.init_index = r;
        if best.as_ref().map_or(true, |b| run.fit.better_than(&b.fit)) {
            best = Some(run);
        }
    }
    Ok(best.expect("n_inits >= 1"))
}

fn kpod_once<R: Rng + ?Sized>(
    ds: &MaskedDataset,
    k: usize,
    rng: &mut R,
    cfg: &KpodConfig,
) -> Result<KpodFit> {
    let (n, p) = (ds.n(), ds.p());
    let col_means: Vec<f64> = ds.column_means().into_iter().map(|m| m.unwrap_or(0.0)).collect();
    let mut filled = vec![0.0; n * p];
    for i in 0..n {
        for j in 0..p {
            filled[i * p + j] = ds.value(i, j).unwrap_or(col_means[j]);
        }
    }
    let filled_ds = MaskedDataset::complete(n, p, filled.clone())?;
    let seeding = kmeanspp_init(
        &filled_ds,
        k,
        rng,
        &InitConfig {
            weighting: Weighting::UnscaledDelta,
        },
    )?;
    let mut centers: Vec<f64> = (0..k)
        .flat_map(|l| seeding.centers.row_values(l).to_vec())
        .collect();

    let mut prev_labels: Option<Vec<usize>> = None;
    let mut prev_w: Option<f64> = None;
    let mut descent_violated = false;
    let mut inner_converged = true;
    let mut outer_converged = false;
    let mut iterations = 0;
    let mut last = None;

    for _ in 0..cfg.max_outer_iters {
        iterations += 1;
        let hw = kmeans_hw(&filled, n, p, k, &centers, &cfg.inner)?;
        inner_converged &= hw.converged;
        let labels = hw.partition.labels().to_vec();
        let cs = ClusterState::from_labels(ds, &labels, k);
        let w = objective(ds, &labels, &cs);

        if let Some(pw) = prev_w {
            if w > pw + 1e-10 * pw.abs().max(1.0) {
                descent_violated = true;
            }
        }
        let same_labels = prev_labels.as_deref() == Some(labels.as_slice());
        let small_change = prev_w.is_some_and(|pw| (pw - w).abs() <= cfg.rel_tol * pw.abs().max(f64::MIN_POSITIVE));

        for l in 0..k {
            for j in 0..p {
                centers[l * p + j] = cs
                    .mean(l, j)
                    .or_else(|| hw.centers.get(l, j))
                    .unwrap_or(col_means[j]);
            }
        }
        for i in 0..n {
            for j in 0..p {
                if !ds.is_observed(i, j) {
                    filled[i * p + j] = centers[labels[i] * p + j];
                }
            }
        }
        prev_labels = Some(labels);
        prev_w = Some(w);
        last = Some((hw.partition, cs, w));
        if same_labels || small_change {
            outer_converged = true;
            break;
        }
    }

    let (partition, cs, w) = last.expect("at least one outer iteration");
    Ok(KpodFit {
        fit: FitResult {
            partition,
            centers: cs.centers(),
            objective: w,
            sigma_sq_hat: FitResult::sigma_sq(w, ds),
            transfers: 0,
            iterations,
            converged: outer_converged && inner_converged,
            seed: 0,
            init_index: 0,
            unanchored_rows: Vec::new(),
        },
        descent_violated,
    })
}
