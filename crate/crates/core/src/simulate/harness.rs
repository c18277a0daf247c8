//! Replicate runner producing one metrics record per (replicate, method).

use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use super::ari::adjusted_rand;
use super::generate::{generate_clusters, SimSpec};
use super::missing::{apply_missingness, Mechanism, MissingSpec};
use crate::baseline::{kpod, KpodConfig};
use crate::error::Result;
use crate::hartigan::{default_inits, fit, FitConfig};
use crate::rng::restart_rng;
use crate::select::{select_k, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    KmMeans,
    Kpod,
}

/// One line of the metrics stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub replicate: usize,
    pub seed: u64,
    pub spec: SimSpec,
    pub mechanism: Mechanism,
    pub requested_lambda: f64,
    pub realized_lambda: f64,
    pub method: Method,
    #[serde(rename = "W_K")]
    pub objective: f64,
    #[serde(rename = "ARI")]
    pub ari: Option<f64>,
    #[serde(rename = "K_hat")]
    pub k_hat: Option<usize>,
    pub inits: usize,
    pub converged: bool,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Template; the seed is replaced per replicate.
    pub sim: SimSpec,
    /// Template; the seed is replaced per replicate.
    pub missing: MissingSpec,
    pub master_seed: u64,
    /// Restarts for km-means; `None` uses `100 K p`.
    pub km_inits: Option<usize>,
    /// Restarts for k-POD; `None` skips it.
    pub kpod_inits: Option<usize>,
    /// Also estimate K over `1..=k_max` with km-means.
    pub select_k_max: Option<usize>,
    pub fit: FitConfig,
}

/// Seed of replicate `r`, drawn from its own stream of the master seed.
pub fn replicate_seed(master: u64, r: usize) -> u64 {
    restart_rng(master, r as u64).next_u64()
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Simulates replicate `r`, masks it, and runs the configured methods.
pub fn run_replicate(cfg: &ExperimentConfig, r: usize) -> Result<Vec<MetricsRecord>> {
    let seed = replicate_seed(cfg.master_seed, r);
    let sim_spec = SimSpec {
        seed,
        ..cfg.sim.clone()
    };
    let miss_spec = MissingSpec {
        seed,
        ..cfg.missing.clone()
    };
    let data = generate_clusters(&sim_spec)?;
    let masked = apply_missingness(&data, &miss_spec)?;
    let ds = data.dataset(masked.mask.clone())?;
    let k = sim_spec.k;

    let record = |method, objective, ari, k_hat, inits, converged, wall_ms| MetricsRecord {
        replicate: r,
        seed,
        spec: sim_spec.clone(),
        mechanism: miss_spec.mechanism,
        requested_lambda: masked.requested_lambda,
        realized_lambda: masked.realized_lambda,
        method,
        objective,
        ari,
        k_hat,
        inits,
        converged,
        wall_ms,
    };

    let mut out = Vec::new();
    let inits = cfg.km_inits.unwrap_or_else(|| default_inits(k, ds.p()));
    let start = Instant::now();
    let km = fit(&ds, k, inits, seed, &cfg.fit)?;
    let wall = elapsed_ms(start);
    let k_hat = match cfg.select_k_max {
        Some(k_max) => {
            let sweep = SweepConfig {
                fit: cfg.fit.clone(),
                inits_per_k: cfg.km_inits,
                inits_cap: None,
            };
            Some(select_k(&ds, 1, k_max.min(ds.n()), seed, &sweep)?.k_hat)
        }
        None => None,
    };
    out.push(record(
        Method::KmMeans,
        km.objective,
        adjusted_rand(&data.labels, km.partition.labels()).ok(),
        k_hat,
        inits,
        km.converged,
        wall,
    ));

    if let Some(kpod_inits) = cfg.kpod_inits {
        let kcfg = KpodConfig {
            n_inits: kpod_inits,
            ..Default::default()
        };
        let start = Instant::now();
        let kp = kpod(&ds, k, seed, &kcfg)?;
        let wall = elapsed_ms(start);
        out.push(record(
            Method::Kpod,
            kp.fit.objective,
            adjusted_rand(&data.labels, kp.fit.partition.labels()).ok(),
            None,
            kpod_inits,
            kp.fit.converged,
            wall,
        ));
    }
    Ok(out)
}

/// Runs replicates `0..replicates`, in parallel if asked. Records come back
/// in replicate order either way.
pub fn run_experiment(cfg: &ExperimentConfig, replicates: usize, parallel: bool) -> Result<Vec<MetricsRecord>> {
    let per: Vec<Vec<MetricsRecord>> = if parallel {
        (0..replicates)
            .into_par_iter()
            .map(|r| run_replicate(cfg, r))
            .collect::<Result<_>>()?
    } else {
        (0..replicates).map(|r| run_replicate(cfg, r)).collect::<Result<_>>()?
    };
    Ok(per.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::Separation;

    #[test]
    fn replicate_records() {
        let cfg = ExperimentConfig {
            sim: SimSpec::new(2, 60, 2, Separation::Easy, 0),
            missing: MissingSpec::new(Mechanism::Mcar, 0.1, 0),
            master_seed: 3,
            km_inits: Some(4),
            kpod_inits: Some(2),
            select_k_max: Some(3),
            fit: FitConfig::default(),
        };
        let recs = run_replicate(&cfg, 0).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].method, Method::KmMeans);
        assert!(recs[0].k_hat.is_some());
        assert_eq!(recs[1].method, Method::Kpod);
        assert_eq!(recs, run_replicate(&cfg, 0).map(|mut v| {
            for (a, b) in v.iter_mut().zip(&recs) {
                a.wall_ms = b.wall_ms;
            }
            v
        }).unwrap());
        assert_ne!(replicate_seed(3, 0), replicate_seed(3, 1));
    }

    #[test]
    fn experiment_order_is_stable() {
        let cfg = ExperimentConfig {
            sim: SimSpec::new(3, 40, 2, Separation::Easy, 0),
            missing: MissingSpec::new(Mechanism::Mar, 0.2, 0),
            master_seed: 5,
            km_inits: Some(2),
            kpod_inits: None,
            select_k_max: None,
            fit: FitConfig::default(),
        };
        let strip = |v: Vec<MetricsRecord>| -> Vec<(usize, f64)> { v.into_iter().map(|m| (m.replicate, m.objective)).collect() };
        let serial = strip(run_experiment(&cfg, 4, false).unwrap());
        assert_eq!(serial, strip(run_experiment(&cfg, 4, true).unwrap()));
        assert_eq!(serial.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }
}
