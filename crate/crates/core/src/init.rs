//! k-means++ seeding for masked data.
//!
//! Distances between a row and a chosen center (itself a row) run over the
//! features observed in both. The default weighting divides by the number of
//! shared features, which puts rows with different missingness patterns on
//! the same per-feature scale.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::cluster::{masked_sq_distance, Centers};
use crate::dataset::MaskedDataset;
use crate::error::{Error, Result};

/// How candidate rows are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Partial squared distance.
    UnscaledDelta,
    /// Partial squared distance per shared feature.
    #[default]
    ScaledDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InitConfig {
    pub weighting: Weighting,
}

/// Chosen rows and the centers copied from them.
#[derive(Debug, Clone, PartialEq)]
pub struct Seeding {
    pub rows: Vec<usize>,
    pub centers: Centers,
}

/// Picks `k` distinct rows: the first uniformly, each later one with
/// probability proportional to its distance to the nearest chosen center.
///
/// A row sharing no feature with any chosen center gets the largest finite
/// weight of the round; missing information must keep it selectable. If every
/// remaining weight is zero (all rows coincide with centers) the draw falls
/// back to uniform over the unchosen rows.
pub fn kmeanspp_init<R: Rng + ?Sized>(
    ds: &MaskedDataset,
    k: usize,
    rng: &mut R,
    cfg: &InitConfig,
) -> Result<Seeding> {
    let n = ds.n();
    if k == 0 {
        return Err(Error::ZeroClusters);
    }
    if k > n {
        return Err(Error::KGreaterThanN { k, n });
    }
    let mut rows = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    rows.push(first);
    chosen[first] = true;

    let mut nearest: Vec<Option<f64>> = vec![None; n];
    let mut weights = vec![0.0; n];
    while rows.len() < k {
        let c = *rows.last().unwrap();
        let (cv, cm) = (ds.row_values(c), ds.row_mask(c));
        for i in 0..n {
            let d = masked_sq_distance(ds.row_values(i), ds.row_mask(i), cv, cm);
            let w = match cfg.weighting {
                Weighting::UnscaledDelta => d.has_shared().then_some(d.sq),
                Weighting::ScaledDelta => d.scaled(),
            };
            if let Some(w) = w {
                nearest[i] = Some(nearest[i].map_or(w, |cur: f64| cur.min(w)));
            }
        }
        let max_finite = (0..n)
            .filter(|&i| !chosen[i])
            .filter_map(|i| nearest[i])
            .fold(0.0, f64::max);
        let mut total = 0.0;
        for i in 0..n {
            weights[i] = if chosen[i] {
                0.0
            } else {
                nearest[i].unwrap_or(max_finite)
            };
            total += weights[i];
        }
        let next = if total > 0.0 && total.is_finite() {
            WeightedIndex::new(&weights)
                .expect("weights are finite, nonnegative and not all zero")
                .sample(rng)
        } else {
            let open: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            open[rng.random_range(0..open.len())]
        };
        rows.push(next);
        chosen[next] = true;
    }
    let centers = Centers::from_rows(ds, &rows);
    Ok(Seeding { rows, centers })
}

/// Selection probabilities for the next center given already chosen rows.
/// Mirrors the weighting of [`kmeanspp_init`].
pub fn next_center_probabilities(ds: &MaskedDataset, chosen_rows: &[usize], cfg: &InitConfig) -> Vec<f64> {
    let n = ds.n();
    let mut nearest: Vec<Option<f64>> = vec![None; n];
    for &c in chosen_rows {
        for (i, slot) in nearest.iter_mut().enumerate() {
            let d = masked_sq_distance(ds.row_values(i), ds.row_mask(i), ds.row_values(c), ds.row_mask(c));
            let w = match cfg.weighting {
                Weighting::UnscaledDelta => d.has_shared().then_some(d.sq),
                Weighting::ScaledDelta => d.scaled(),
            };
            if let Some(w) = w {
                *slot = Some(slot.map_or(w, |cur: f64| cur.min(w)));
            }
        }
    }
    let chosen = |i: usize| chosen_rows.contains(&i);
    let max_finite = (0..n)
        .filter(|&i| !chosen(i))
        .filter_map(|i| nearest[i])
        .fold(0.0, f64::max);
    let w: Vec<f64> = (0..n)
        .map(|i| if chosen(i) { 0.0 } else { nearest[i].unwrap_or(max_finite) })
        .collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.into_iter().map(|x| x / total).collect()
    } else {
        let open = (0..n).filter(|&i| !chosen(i)).count() as f64;
        (0..n).map(|i| if chosen(i) { 0.0 } else { 1.0 / open }).collect()
    }
}
