use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dataset::MaskedDataset;
use crate::error::{Error, Result};
use crate::rng::restart_rng;

const PLACEMENT_TRIES: usize = 1000;
const PLACEMENT_RESTARTS: usize = 100;

/// Named center separations, in units of the within-cluster standard deviation.
///
/// These are heuristic stand-ins for low, moderate and high overlap between
/// spherical clusters, not calibrated overlap values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Separation {
    Easy,
    Medium,
    Hard,
    Custom(f64),
}

impl Separation {
    pub fn sigma_units(self) -> f64 {
        match self {
            Separation::Easy => 6.0,
            Separation::Medium => 4.0,
            Separation::Hard => 2.5,
            Separation::Custom(s) => s,
        }
    }
}

impl FromStr for Separation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Separation::Easy),
            "medium" => Ok(Separation::Medium),
            "hard" => Ok(Separation::Hard),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .map(Separation::Custom)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown separation '{s}'"))),
        }
    }
}

/// Parameters of a spherical Gaussian cluster simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSpec {
    pub k: usize,
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub separation: Separation,
    /// Cluster proportions; uniform when `None`.
    pub mixing: Option<Vec<f64>>,
    pub seed: u64,
}

impl SimSpec {
    pub fn new(k: usize, n: usize, p: usize, separation: Separation, seed: u64) -> Self {
        Self {
            k,
            n,
            p,
            sigma: 1.0,
            separation,
            mixing: None,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.k == 0 || self.p == 0 {
            return bad("k and p must be at least 1");
        }
        if self.n < self.k {
            return bad("n must be at least k");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive");
        }
        let sep = self.separation.sigma_units();
        if !(sep >= 0.0 && sep.is_finite()) {
            return bad("separation must be nonnegative");
        }
        if let Some(m) = &self.mixing {
            if m.len() != self.k || m.iter().any(|&w| w.is_nan() || w < 0.0) {
                return bad("mixing must have k nonnegative entries");
            }
            if (m.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad("mixing proportions must sum to 1");
            }
        }
        Ok(())
    }
}

/// A simulated, fully observed dataset with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimData {
    pub spec: SimSpec,
    /// Row-major `n x p`.
    pub values: Vec<f64>,
    pub labels: Vec<usize>,
    /// Row-major `k x p`.
    pub centers: Vec<f64>,
}

impl SimData {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn p(&self) -> usize {
        self.spec.p
    }

    pub fn complete_dataset(&self) -> MaskedDataset {
        MaskedDataset::complete(self.n(), self.p(), self.values.clone()).expect("finite values")
    }

    pub fn dataset(&self, mask: Vec<bool>) -> Result<MaskedDataset> {
        MaskedDataset::from_parts(self.n(), self.p(), self.values.clone(), mask)
    }
}

/// Draws centers at least `separation * sigma` apart, multinomial labels and
/// Gaussian noise, all from the stream keyed by `spec.seed`.
pub fn generate_clusters(spec: &SimSpec) -> Result<SimData> {
    spec.validate()?;
    let mut rng = restart_rng(spec.seed, 0);
    let centers = place_centers(spec, &mut rng)?;
    let (n, p) = (spec.n, spec.p);

    let weights = spec
        .mixing
        .clone()
        .unwrap_or_else(|| vec![1.0 / spec.k as f64; spec.k]);
    let picker = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidArgument(format!("mixing proportions: {e}")))?;
    let labels: Vec<usize> = (0..n).map(|_| picker.sample(&mut rng)).collect();

    let mut values = Vec::with_capacity(n * p);
    for &l in &labels {
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            values.push(centers[l * p + j] + spec.sigma * z);
        }
    }
    Ok(SimData {
        spec: spec.clone(),
        values,
        labels,
        centers,
    })
}

fn place_centers<R: Rng + ?Sized>(spec: &SimSpec, rng: &mut R) -> Result<Vec<f64>> {
    let (k, p) = (spec.k, spec.p);
    let min_dist = spec.separation.sigma_units() * spec.sigma;
    let side = 1.25 * min_dist * (k as f64).powf(1.0 / p as f64).max(1.0);
    let min_sq = min_dist * min_dist;
    'restart: for _ in 0..PLACEMENT_RESTARTS {
        let mut centers: Vec<f64> = Vec::with_capacity(k * p);
        for c in 0..k {
            let mut placed = false;
            for _ in 0..PLACEMENT_TRIES {
                let cand: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * side).collect();
                let ok = (0..c).all(|o| {
                    let d: f64 = (0..p).map(|j| (cand[j] - centers[o * p + j]).powi(2)).sum();
                    d >= min_sq
                });
                if ok {
                    centers.extend(cand);
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'restart;
            }
        }
        return Ok(centers);
    }
    Err(Error::InfeasibleSeparation {
        k,
        separation: spec.separation.sigma_units(),
        attempts: PLACEMENT_RESTARTS,
    })
}
