//! Missingness mechanisms for simulated data.
//!
//! Every mechanism returns a mask (`true` = observed) in which each row keeps
//! at least one observed feature. A row that would lose everything gets one
//! cell back; the realized missing fraction is reported so the effect stays
//! visible.

use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use super::generate::SimData;
use crate::error::{Error, Result};
use crate::rng::restart_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mechanism {
    /// Cells removed independently of dimension and cluster.
    Mcar,
    /// Cells removed only in a random subset of dimensions.
    Mar,
    /// Cells removed completely at random, but only in some clusters.
    Nmar1,
    /// The lowest values of every dimension removed, in some clusters.
    Nmar2,
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MCAR" => Ok(Mechanism::Mcar),
            "MAR" => Ok(Mechanism::Mar),
            "NMAR1" => Ok(Mechanism::Nmar1),
            "NMAR2" => Ok(Mechanism::Nmar2),
            _ => Err(Error::InvalidArgument(format!("unknown mechanism '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissingSpec {
    pub mechanism: Mechanism,
    /// Target overall fraction of missing cells.
    pub lambda: f64,
    /// Share of dimensions censored under MAR.
    pub mar_dim_fraction: f64,
    /// Clusters censored under NMAR1/NMAR2; `ceil(K/2)` random clusters when `None`.
    pub affected_clusters: Option<Vec<usize>>,
    pub seed: u64,
}

impl MissingSpec {
    pub fn new(mechanism: Mechanism, lambda: f64, seed: u64) -> Self {
        Self {
            mechanism,
            lambda,
            mar_dim_fraction: 0.4,
            affected_clusters: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskOutcome {
    /// Row-major, `true` where the cell is observed.
    pub mask: Vec<bool>,
    pub requested_lambda: f64,
    pub realized_lambda: f64,
    /// Rows that had a cell restored to stay nonempty.
    pub repaired_rows: Vec<usize>,
    /// MAR: the censored dimensions.
    pub censored_dims: Vec<usize>,
    /// NMAR1/NMAR2: the censored clusters.
    pub affected_clusters: Vec<usize>,
}

impl MaskOutcome {
    fn new(mask: Vec<bool>, lambda: f64, repaired_rows: Vec<usize>) -> Self {
        let missing = mask.iter().filter(|&&m| !m).count();
        let realized = if mask.is_empty() {
            0.0
        } else {
            missing as f64 / mask.len() as f64
        };
        Self {
            mask,
            requested_lambda: lambda,
            realized_lambda: realized,
            repaired_rows,
            censored_dims: Vec::new(),
            affected_clusters: Vec::new(),
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda must be in [0, 1), got {lambda}")))
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate < 1.0 {
        Ok(())
    } else {
        Err(Error::InfeasibleRate { rate })
    }
}

fn repair_random<R: Rng + ?Sized>(mask: &mut [bool], p: usize, rng: &mut R) -> Vec<usize> {
    let mut repaired = Vec::new();
    for (i, row) in mask.chunks_mut(p).enumerate() {
        if row.iter().all(|&m| !m) {
            row[rng.random_range(0..p)] = true;
            repaired.push(i);
        }
    }
    repaired
}

/// Each cell missing independently with probability `lambda`.
pub fn apply_mcar<R: Rng + ?Sized>(n: usize, p: usize, lambda: f64, rng: &mut R) -> Result<MaskOutcome> {
    check_lambda(lambda)?;
    let mut mask: Vec<bool> = (0..n * p).map(|_| !rng.random_bool(lambda)).collect();
    let repaired = repair_random(&mut mask, p, rng);
    Ok(MaskOutcome::new(mask, lambda, repaired))
}

/// Number of censored dimensions under MAR: `ceil(dim_fraction * p)`, at least one.
pub fn mar_censored_count(p: usize, dim_fraction: f64) -> usize {
    // Guard against 0.4 * 5 landing a hair above 2.
    let raw = dim_fraction * p as f64;
    let rounded = raw.round();
    let m = if (raw - rounded).abs() < 1e-9 { rounded } else { raw.ceil() };
    (m as usize).clamp(1, p)
}

/// `ceil(dim_fraction * p)` random dimensions censored at rate `lambda * p / m`
/// (which is `lambda / dim_fraction` when `dim_fraction * p` is whole); the rest
/// stay complete.
pub fn apply_mar<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    lambda: f64,
    dim_fraction: f64,
    rng: &mut R,
) -> Result<MaskOutcome> {
    check_lambda(lambda)?;
    if !(dim_fraction > 0.0 && dim_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "MAR dimension fraction must be in (0, 1], got {dim_fraction}"
        )));
    }
    let m = mar_censored_count(p, dim_fraction);
    let rate = lambda * p as f64 / m as f64;
    check_rate(rate)?;
    let mut dims = sample(rng, p, m).into_vec();
    dims.sort_unstable();
    let mut mask = vec![true; n * p];
    for i in 0..n {
        for &j in &dims {
            if rng.random_bool(rate) {
                mask[i * p + j] = false;
            }
        }
    }
    let repaired = repair_random(&mut mask, p, rng);
    let mut out = MaskOutcome::new(mask, lambda, repaired);
    out.censored_dims = dims;
    Ok(out)
}

fn affected_rows(labels: &[usize], affected: &[usize]) -> Vec<bool> {
    labels.iter().map(|l| affected.contains(l)).collect()
}

/// MCAR restricted to rows of the affected clusters, at rate
/// `lambda * n / n_affected` so the overall fraction stays near `lambda`.
pub fn apply_nmar1<R: Rng + ?Sized>(
    p: usize,
    labels: &[usize],
    lambda: f64,
    affected: &[usize],
    rng: &mut R,
) -> Result<MaskOutcome> {
    check_lambda(lambda)?;
    let n = labels.len();
    let in_affected = affected_rows(labels, affected);
    let n_aff = in_affected.iter().filter(|&&a| a).count();
    let rate = if lambda == 0.0 {
        0.0
    } else if n_aff == 0 {
        f64::INFINITY
    } else {
        lambda * n as f64 / n_aff as f64
    };
    check_rate(rate)?;
    let mut mask = vec![true; n * p];
    for i in (0..n).filter(|&i| in_affected[i]) {
        for j in 0..p {
            if rng.random_bool(rate) {
                mask[i * p + j] = false;
            }
        }
    }
    let repaired = repair_random(&mut mask, p, rng);
    let mut out = MaskOutcome::new(mask, lambda, repaired);
    out.affected_clusters = affected.to_vec();
    Ok(out)
}

/// Within each affected cluster and each dimension, the lowest
/// `round(q * n_k)` values are censored with `q = lambda * n / n_affected`.
/// Ties are broken by row index, so the mask is a pure function of the inputs.
/// A row left empty gets its first cell back.
pub fn apply_nmar2(
    values: &[f64],
    p: usize,
    labels: &[usize],
    lambda: f64,
    affected: &[usize],
) -> Result<MaskOutcome> {
    check_lambda(lambda)?;
    let n = labels.len();
    if values.len() != n * p {
        return Err(Error::ShapeMismatch { n, p });
    }
    let in_affected = affected_rows(labels, affected);
    let n_aff = in_affected.iter().filter(|&&a| a).count();
    let q = if lambda == 0.0 {
        0.0
    } else if n_aff == 0 {
        f64::INFINITY
    } else {
        lambda * n as f64 / n_aff as f64
    };
    check_rate(q)?;
    let mut mask = vec![true; n * p];
    let mut clusters: Vec<usize> = affected.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    for &c in &clusters {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let cut = ((q * members.len() as f64).round() as usize).min(members.len());
        if cut == 0 {
            continue;
        }
        for j in 0..p {
            let mut order = members.clone();
            order.sort_by(|&a, &b| {
                values[a * p + j]
                    .total_cmp(&values[b * p + j])
                    .then(a.cmp(&b))
            });
            for &i in &order[..cut] {
                mask[i * p + j] = false;
            }
        }
    }
    let mut repaired = Vec::new();
    for (i, row) in mask.chunks_mut(p).enumerate() {
        if row.iter().all(|&m| !m) {
            row[0] = true;
            repaired.push(i);
        }
    }
    let mut out = MaskOutcome::new(mask, lambda, repaired);
    out.affected_clusters = clusters;
    Ok(out)
}

/// `ceil(k / 2)` distinct clusters chosen uniformly, sorted.
pub fn default_affected<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<usize> {
    let mut chosen = sample(rng, k, k.div_ceil(2)).into_vec();
    chosen.sort_unstable();
    chosen
}

/// Applies `spec` to simulated data, drawing from the stream keyed by `spec.seed`.
pub fn apply_missingness(data: &SimData, spec: &MissingSpec) -> Result<MaskOutcome> {
    let mut rng = restart_rng(spec.seed, 1);
    let (n, p) = (data.n(), data.p());
    let affected = || {
        spec.affected_clusters
            .clone()
            .unwrap_or_else(|| default_affected(data.spec.k, &mut restart_rng(spec.seed, 2)))
    };
    match spec.mechanism {
        Mechanism::Mcar => apply_mcar(n, p, spec.lambda, &mut rng),
        Mechanism::Mar => apply_mar(n, p, spec.lambda, spec.mar_dim_fraction, &mut rng),
        Mechanism::Nmar1 => apply_nmar1(p, &data.labels, spec.lambda, &affected(), &mut rng),
        Mechanism::Nmar2 => apply_nmar2(&data.values, p, &data.labels, spec.lambda, &affected()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn missing_in(mask: &[bool]) -> usize {
        mask.iter().filter(|&&m| !m).count()
    }

    #[test]
    fn zero_lambda_gives_full_mask() {
        let mut rng = restart_rng(1, 0);
        assert!(apply_mcar(10, 3, 0.0, &mut rng).unwrap().mask.iter().all(|&m| m));
        assert!(apply_mar(10, 3, 0.0, 0.4, &mut rng).unwrap().mask.iter().all(|&m| m));
        let labels = vec![0, 1, 0, 1];
        assert!(apply_nmar1(2, &labels, 0.0, &[0], &mut rng).unwrap().mask.iter().all(|&m| m));
        let vals = vec![1.0; 8];
        assert!(apply_nmar2(&vals, 2, &labels, 0.0, &[0]).unwrap().mask.iter().all(|&m| m));
    }

    #[test]
    fn mcar_fraction_within_band() {
        let mut rng = restart_rng(7, 0);
        let out = apply_mcar(2000, 5, 0.2, &mut rng).unwrap();
        assert!((out.realized_lambda - 0.2).abs() < 0.015);
    }

    #[test]
    fn mar_rates() {
        let mut rng = restart_rng(3, 0);
        let out = apply_mar(5000, 10, 0.2, 0.4, &mut rng).unwrap();
        assert_eq!(out.censored_dims.len(), 4);
        for j in 0..10 {
            let miss = (0..5000).filter(|&i| !out.mask[i * 10 + j]).count() as f64 / 5000.0;
            if out.censored_dims.contains(&j) {
                assert!((miss - 0.5).abs() < 0.03, "dim {j}: {miss}");
            } else {
                assert_eq!(miss, 0.0);
            }
        }
    }

    #[test]
    fn mar_high_lambda_rate() {
        let mut rng = restart_rng(4, 0);
        let out = apply_mar(4000, 5, 0.3, 0.4, &mut rng).unwrap();
        // two dims censored at 0.75 each
        assert!((out.realized_lambda - 0.3).abs() < 0.02);
    }

    #[test]
    fn mar_infeasible() {
        let mut rng = restart_rng(4, 0);
        assert!(matches!(
            apply_mar(10, 5, 0.4, 0.4, &mut rng),
            Err(Error::InfeasibleRate { .. })
        ));
    }

    #[test]
    fn nmar1_confined_and_inflated() {
        let mut rng = restart_rng(5, 0);
        let labels: Vec<usize> = (0..4000).map(|i| i % 2).collect();
        let out = apply_nmar1(3, &labels, 0.1, &[1], &mut rng).unwrap();
        let mut miss_aff = 0;
        for i in 0..4000 {
            let m = (0..3).filter(|&j| !out.mask[i * 3 + j]).count();
            if labels[i] == 0 {
                assert_eq!(m, 0);
            } else {
                miss_aff += m;
            }
        }
        let rate = miss_aff as f64 / (2000.0 * 3.0);
        assert!((rate - 0.2).abs() < 0.02);
    }

    #[test]
    fn nmar1_infeasible() {
        let mut rng = restart_rng(5, 0);
        let labels = vec![0, 0, 0, 1];
        assert!(matches!(
            apply_nmar1(3, &labels, 0.3, &[1], &mut rng),
            Err(Error::InfeasibleRate { .. })
        ));
    }

    #[test]
    fn nmar2_censors_two_smallest_per_dimension() {
        // One cluster of ten rows; lambda = 0.2 censors the two lowest values
        // of each dimension. The dimensions are ordered differently so no row
        // loses both cells.
        let d0 = [5.0, 3.0, 9.0, 1.0, 7.0, 2.0, 8.0, 6.0, 4.0, 10.0];
        let d1 = [1.0, 9.0, 2.0, 8.0, 3.0, 7.0, 4.0, 6.0, 5.0, 10.0];
        let values: Vec<f64> = (0..10).flat_map(|i| [d0[i], d1[i]]).collect();
        let labels = vec![0; 10];
        let out = apply_nmar2(&values, 2, &labels, 0.2, &[0]).unwrap();
        let miss0: Vec<usize> = (0..10).filter(|&i| !out.mask[i * 2]).collect();
        let miss1: Vec<usize> = (0..10).filter(|&i| !out.mask[i * 2 + 1]).collect();
        assert_eq!(miss0, vec![3, 5]);
        assert_eq!(miss1, vec![0, 2]);
        assert!(out.repaired_rows.is_empty());
        assert_eq!(missing_in(&out.mask), 4);
    }

    #[test]
    fn nmar2_deterministic() {
        let values: Vec<f64> = (0..60).map(|x| ((x * 37) % 23) as f64).collect();
        let labels: Vec<usize> = (0..20).map(|i| i % 3).collect();
        let a = apply_nmar2(&values, 3, &labels, 0.1, &[0, 2]).unwrap();
        let b = apply_nmar2(&values, 3, &labels, 0.1, &[0, 2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_affected_is_half_rounded_up() {
        let mut rng = restart_rng(1, 0);
        assert_eq!(default_affected(7, &mut rng).len(), 4);
        assert_eq!(default_affected(4, &mut rng).len(), 2);
    }

    #[test]
    fn every_row_keeps_a_feature() {
        let mut rng = restart_rng(2, 0);
        let out = apply_mcar(500, 2, 0.6, &mut rng).unwrap();
        for row in out.mask.chunks(2) {
            assert!(row.iter().any(|&m| m));
        }
        assert!(!out.repaired_rows.is_empty());
    }

    #[test]
    fn mar_count_rounding() {
        assert_eq!(mar_censored_count(5, 0.4), 2);
        assert_eq!(mar_censored_count(10, 0.4), 4);
        assert_eq!(mar_censored_count(7, 0.4), 3);
        assert_eq!(mar_censored_count(1, 0.4), 1);
    }
}
