//! Shared fixtures for the benchmarks.

use kmmeans::simulate::{apply_missingness, generate_clusters, Mechanism, MissingSpec, Separation, SimSpec};
use kmmeans::MaskedDataset;

/// Simulated clusters with cells removed under `mechanism`.
pub fn fixture(k: usize, n: usize, p: usize, mechanism: Mechanism, lambda: f64, seed: u64) -> MaskedDataset {
    let data = generate_clusters(&SimSpec::new(k, n, p, Separation::Medium, seed)).expect("feasible spec");
    let mask = apply_missingness(&data, &MissingSpec::new(mechanism, lambda, seed)).expect("feasible rate");
    data.dataset(mask.mask).expect("rows keep a cell")
}
