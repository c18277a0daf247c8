//! Partitions, per-cluster masked statistics, partial distances and the
//! masked within-cluster sum of squares.

use serde::Serialize;

use crate::dataset::MaskedDataset;
use crate::error::{Error, Result};

/// Cluster assignment of every row plus the index of its runner-up cluster.
///
/// Cluster indices are zero-based. With `k == 1` the runner-up equals the
/// assignment since there is no alternative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub(crate) labels: Vec<usize>,
    pub(crate) second: Vec<usize>,
    pub(crate) k: usize,
}

impl Partition {
    /// Validates that every cluster is nonempty and runner-ups differ from assignments.
    pub fn new(labels: Vec<usize>, second: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroClusters);
        }
        if labels.len() != second.len() {
            return Err(Error::InvalidPartition(
                "label and runner-up vectors differ in length".into(),
            ));
        }
        let mut sizes = vec![0usize; k];
        for (i, (&l, &s)) in labels.iter().zip(&second).enumerate() {
            if l >= k || s >= k {
                return Err(Error::InvalidPartition(format!("row {i} has index out of range")));
            }
            if k > 1 && l == s {
                return Err(Error::InvalidPartition(format!(
                    "row {i} has identical assignment and runner-up"
                )));
            }
            sizes[l] += 1;
        }
        if let Some(c) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("cluster {c} is empty")));
        }
        Ok(Self { labels, second, k })
    }

    /// A partition from labels alone; runner-ups are filled with the next cluster index.
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Result<Self> {
        let second = labels
            .iter()
            .map(|&l| if k > 1 { (l + 1) % k } else { l })
            .collect();
        Self::new(labels, second, k)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn second(&self) -> &[usize] {
        &self.second
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// A `k x p` matrix of centers in which some cells may be undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Centers {
    k: usize,
    p: usize,
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl Centers {
    pub fn new(k: usize, p: usize, values: Vec<f64>, defined: Vec<bool>) -> Result<Self> {
        if values.len() != k * p || defined.len() != k * p {
            return Err(Error::ShapeMismatch { n: k, p });
        }
        Ok(Self {
            k,
            p,
            values,
            defined,
        })
    }

    /// Centers copied from dataset rows, carrying each row's mask.
    pub fn from_rows(ds: &MaskedDataset, rows: &[usize]) -> Self {
        let p = ds.p();
        let mut values = Vec::with_capacity(rows.len() * p);
        let mut defined = Vec::with_capacity(rows.len() * p);
        for &i in rows {
            values.extend_from_slice(ds.row_values(i));
            defined.extend_from_slice(ds.row_mask(i));
        }
        Self {
            k: rows.len(),
            p,
            values,
            defined,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, k: usize, j: usize) -> Option<f64> {
        let idx = k * self.p + j;
        self.defined[idx].then(|| self.values[idx])
    }

    #[inline]
    pub fn row_values(&self, k: usize) -> &[f64] {
        &self.values[k * self.p..(k + 1) * self.p]
    }

    #[inline]
    pub fn row_defined(&self, k: usize) -> &[bool] {
        &self.defined[k * self.p..(k + 1) * self.p]
    }

    /// Rows of the matrix with `None` for undefined cells.
    pub fn to_rows(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.k)
            .map(|k| (0..self.p).map(|j| self.get(k, j)).collect())
            .collect()
    }
}

/// Squared distance restricted to features observed on both sides, together
/// with how many features were shared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialDistance {
    pub sq: f64,
    pub shared: usize,
}

impl PartialDistance {
    /// The distance divided by the number of shared features, or `None` when
    /// nothing is shared (no information, which must not read as proximity).
    pub fn scaled(&self) -> Option<f64> {
        (self.shared > 0).then(|| self.sq / self.shared as f64)
    }

    pub fn has_shared(&self) -> bool {
        self.shared > 0
    }
}

#[inline]
pub(crate) fn masked_sq_distance(
    a: &[f64],
    a_mask: &[bool],
    b: &[f64],
    b_mask: &[bool],
) -> PartialDistance {
    let mut sq = 0.0;
    let mut shared = 0;
    for j in 0..a.len() {
        if a_mask[j] && b_mask[j] {
            let d = a[j] - b[j];
            sq += d * d;
            shared += 1;
        }
    }
    PartialDistance { sq, shared }
}

/// Partial squared distance between row `i` and center `k`.
pub fn row_center_distance(ds: &MaskedDataset, i: usize, centers: &Centers, k: usize) -> PartialDistance {
    masked_sq_distance(
        ds.row_values(i),
        ds.row_mask(i),
        centers.row_values(k),
        centers.row_defined(k),
    )
}

/// Per-cluster, per-feature observed counts, sums and means.
///
/// A mean is defined only where its count is positive. Counts and sums are
/// maintained incrementally as rows move between clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    k: usize,
    p: usize,
    counts: Vec<usize>,
    sums: Vec<f64>,
    means: Vec<f64>,
    sizes: Vec<usize>,
}

impl ClusterState {
    /// Statistics of the clusters induced by `labels`.
    pub fn from_labels(ds: &MaskedDataset, labels: &[usize], k: usize) -> Self {
        let p = ds.p();
        let mut cs = Self {
            k,
            p,
            counts: vec![0; k * p],
            sums: vec![0.0; k * p],
            means: vec![0.0; k * p],
            sizes: vec![0; k],
        };
        for (i, &l) in labels.iter().enumerate() {
            cs.accumulate(ds, i, l);
        }
        for idx in 0..k * p {
            cs.refresh_mean(idx);
        }
        cs
    }

    fn accumulate(&mut self, ds: &MaskedDataset, i: usize, l: usize) {
        let base = l * self.p;
        let (vals, mask) = (ds.row_values(i), ds.row_mask(i));
        for j in 0..self.p {
            if mask[j] {
                self.counts[base + j] += 1;
                self.sums[base + j] += vals[j];
            }
        }
        self.sizes[l] += 1;
    }

    #[inline]
    fn refresh_mean(&mut self, idx: usize) {
        let c = self.counts[idx];
        if c > 0 {
            self.means[idx] = self.sums[idx] / c as f64;
        } else {
            self.sums[idx] = 0.0;
            self.means[idx] = 0.0;
        }
    }

    /// Adds row `i` to cluster `l`.
    pub fn add_row(&mut self, ds: &MaskedDataset, i: usize, l: usize) {
        self.accumulate(ds, i, l);
        let base = l * self.p;
        let mask = ds.row_mask(i);
        for j in 0..self.p {
            if mask[j] {
                self.refresh_mean(base + j);
            }
        }
    }

    /// Removes row `i` from cluster `l`.
    pub fn remove_row(&mut self, ds: &MaskedDataset, i: usize, l: usize) {
        let base = l * self.p;
        let (vals, mask) = (ds.row_values(i), ds.row_mask(i));
        for j in 0..self.p {
            if mask[j] {
                self.counts[base + j] -= 1;
                self.sums[base + j] -= vals[j];
                self.refresh_mean(base + j);
            }
        }
        self.sizes[l] -= 1;
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn count(&self, k: usize, j: usize) -> usize {
        self.counts[k * self.p + j]
    }

    pub fn sum(&self, k: usize, j: usize) -> f64 {
        self.sums[k * self.p + j]
    }

    pub fn mean(&self, k: usize, j: usize) -> Option<f64> {
        let idx = k * self.p + j;
        (self.counts[idx] > 0).then(|| self.means[idx])
    }

    /// Whether feature `j` has at least one observed member in cluster `k`.
    pub fn present(&self, k: usize, j: usize) -> bool {
        self.count(k, j) > 0
    }

    pub fn size(&self, k: usize) -> usize {
        self.sizes[k]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    #[inline]
    pub(crate) fn counts_row(&self, k: usize) -> &[usize] {
        &self.counts[k * self.p..(k + 1) * self.p]
    }

    #[inline]
    pub(crate) fn means_row(&self, k: usize) -> &[f64] {
        &self.means[k * self.p..(k + 1) * self.p]
    }

    /// The current means as a center matrix; cells with a zero count are undefined.
    pub fn centers(&self) -> Centers {
        Centers {
            k: self.k,
            p: self.p,
            values: self.means.clone(),
            defined: self.counts.iter().map(|&c| c > 0).collect(),
        }
    }
}

/// Recomputes cluster statistics from scratch for a partition.
pub fn cluster_means(ds: &MaskedDataset, part: &Partition) -> ClusterState {
    ClusterState::from_labels(ds, &part.labels, part.k)
}

/// Masked within-cluster sum of squares: squared residuals over observed cells only.
pub fn objective(ds: &MaskedDataset, labels: &[usize], cs: &ClusterState) -> f64 {
    let p = ds.p();
    let mut total = 0.0;
    for (i, &l) in labels.iter().enumerate() {
        let (vals, mask) = (ds.row_values(i), ds.row_mask(i));
        let (means, counts) = (cs.means_row(l), cs.counts_row(l));
        for j in 0..p {
            if mask[j] && counts[j] > 0 {
                let d = vals[j] - means[j];
                total += d * d;
            }
        }
    }
    total
}

/// Partial squared distance from row `i` to the mean of cluster `k`, gated
/// on features observed in the row and present in the cluster.
#[inline]
pub fn partial_sq_distance(ds: &MaskedDataset, i: usize, cs: &ClusterState, k: usize) -> PartialDistance {
    let (vals, mask) = (ds.row_values(i), ds.row_mask(i));
    let (means, counts) = (cs.means_row(k), cs.counts_row(k));
    let mut sq = 0.0;
    let mut shared = 0;
    for j in 0..vals.len() {
        if mask[j] && counts[j] > 0 {
            let d = vals[j] - means[j];
            sq += d * d;
            shared += 1;
        }
    }
    PartialDistance { sq, shared }
}

/// Partial squared distance divided by the number of shared features.
pub fn scaled_partial_sq_distance(ds: &MaskedDataset, i: usize, cs: &ClusterState, k: usize) -> Option<f64> {
    partial_sq_distance(ds, i, cs, k).scaled()
}

/// Outcome of a clustering run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub partition: Partition,
    pub centers: Centers,
    /// Masked within-cluster sum of squares of the terminal partition.
    pub objective: f64,
    /// `objective / total observed cells`.
    pub sigma_sq_hat: f64,
    pub transfers: usize,
    /// Optimal-transfer passes (outer iterations for k-POD).
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    pub init_index: usize,
    /// Rows that shared no feature with any initial center.
    pub unanchored_rows: Vec<usize>,
}

impl FitResult {
    pub(crate) fn sigma_sq(objective: f64, ds: &MaskedDataset) -> f64 {
        objective / ds.total_observed() as f64
    }

    /// Ordering used to pick the best of several restarts.
    pub(crate) fn better_than(&self, other: &FitResult) -> bool {
        match self.objective.total_cmp(&other.objective) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => self.init_index < other.init_index,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[&[Option<f64>]]) -> MaskedDataset {
        MaskedDataset::from_rows(rows).unwrap()
    }

    #[test]
    fn means_of_one_cluster() {
        let d = ds(&[&[Some(1.0)], &[Some(3.0)]]);
        let cs = ClusterState::from_labels(&d, &[0, 0], 1);
        assert_eq!(cs.mean(0, 0), Some(2.0));
        assert_eq!(cs.count(0, 0), 2);
    }

    #[test]
    fn masked_means() {
        let d = ds(&[&[Some(1.0), None], &[Some(3.0), Some(4.0)]]);
        let cs = ClusterState::from_labels(&d, &[0, 0], 1);
        assert_eq!(cs.mean(0, 0), Some(2.0));
        assert_eq!(cs.mean(0, 1), Some(4.0));
        assert_eq!((cs.count(0, 0), cs.count(0, 1)), (2, 1));
    }

    #[test]
    fn undefined_mean_where_nothing_observed() {
        let d = ds(&[&[Some(1.0), None], &[Some(3.0), Some(4.0)]]);
        let cs = ClusterState::from_labels(&d, &[0, 1], 2);
        assert_eq!(cs.mean(0, 1), None);
        assert!(!cs.present(0, 1));
        assert!(cs.present(1, 1));
        let centers = cs.centers();
        assert_eq!(centers.get(0, 1), None);
    }

    #[test]
    fn singleton_objective_is_zero() {
        let d = ds(&[&[Some(1.0), None], &[Some(3.0), Some(4.0)], &[None, Some(-2.0)]]);
        let cs = ClusterState::from_labels(&d, &[0, 1, 2], 3);
        assert_eq!(objective(&d, &[0, 1, 2], &cs), 0.0);
    }

    #[test]
    fn one_dimensional_wss() {
        let d = ds(&[&[Some(0.0)], &[Some(2.0)]]);
        let cs = ClusterState::from_labels(&d, &[0, 0], 1);
        assert_eq!(objective(&d, &[0, 0], &cs), 2.0);
    }

    #[test]
    fn partial_distance_skips_masked_coordinate() {
        let d = ds(&[&[Some(1.0), None]]);
        let centers = Centers::new(1, 2, vec![0.0, 9.0], vec![true, true]).unwrap();
        let dist = row_center_distance(&d, 0, &centers, 0);
        assert_eq!(dist.sq, 1.0);
        assert_eq!(dist.shared, 1);
    }

    #[test]
    fn partial_distance_zero_at_mean() {
        let d = ds(&[&[Some(1.0), Some(5.0)], &[Some(3.0), None]]);
        let cs = ClusterState::from_labels(&d, &[0, 0], 1);
        let probe = ds(&[&[Some(2.0), Some(5.0)]]);
        assert_eq!(partial_sq_distance(&probe, 0, &cs, 0).sq, 0.0);
    }

    #[test]
    fn scaled_distance() {
        let d = ds(&[&[Some(2.0), Some(2.0)], &[Some(0.0), Some(0.0)]]);
        let cs = ClusterState::from_labels(&d, &[0, 1], 2);
        // distance (2,2)->(0,0) is 8 over 2 shared features
        assert_eq!(partial_sq_distance(&d, 0, &cs, 1).sq, 8.0);
        assert_eq!(scaled_partial_sq_distance(&d, 0, &cs, 1), Some(4.0));
        let pd = PartialDistance { sq: 4.0, shared: 2 };
        assert_eq!(pd.scaled(), Some(2.0));
    }

    #[test]
    fn disjoint_masks_give_undefined_scaled_distance() {
        let d = ds(&[&[Some(2.0), None], &[None, Some(0.0)]]);
        let cs = ClusterState::from_labels(&d, &[0, 1], 2);
        let pd = partial_sq_distance(&d, 0, &cs, 1);
        assert_eq!(pd.sq, 0.0);
        assert!(!pd.has_shared());
        assert_eq!(pd.scaled(), None);
    }

    #[test]
    fn add_remove_round_trip() {
        let d = ds(&[&[Some(1.0), None], &[Some(3.0), Some(4.0)], &[Some(5.0), Some(6.0)]]);
        let mut cs = ClusterState::from_labels(&d, &[0, 0, 1], 2);
        cs.remove_row(&d, 1, 0);
        cs.add_row(&d, 1, 1);
        let fresh = ClusterState::from_labels(&d, &[0, 1, 1], 2);
        assert_eq!(cs.counts, fresh.counts);
        assert_eq!(cs.sizes, fresh.sizes);
        for k in 0..2 {
            for j in 0..2 {
                assert_eq!(cs.mean(k, j), fresh.mean(k, j));
            }
        }
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 0], vec![1, 1], 2).is_err());
        assert!(Partition::new(vec![0, 1], vec![0, 0], 2).is_err());
        assert!(Partition::new(vec![0, 1], vec![1, 0], 2).is_ok());
        assert!(Partition::new(vec![0, 0], vec![0, 0], 1).is_ok());
    }
}
