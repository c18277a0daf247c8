//! Hartigan-Wong style k-means on masked data.
//!
//! The iteration alternates an optimal-transfer stage, which looks for the
//! best destination of every row among the live clusters, with a quick-transfer
//! stage that only weighs each row's current cluster against its runner-up.
//! Transfer costs are the exact changes of the masked objective: adding row `i`
//! to cluster `l` costs `sum_j n_lj d_ij^2 / (n_lj + 1)` over features observed
//! in the row and present in the cluster, and removing it from `k` saves
//! `sum_j n_kj d_ij^2 / (n_kj - 1)`.
//!
//! Step bookkeeping follows the classic AS 136 layout: a cluster transferred at
//! optimal-transfer position `i` stays live until position `i` of the next
//! pass, and the quick stage skips a row when neither of its two clusters
//! changed within the last `n` steps.

use rayon::prelude::*;

use crate::cluster::{
    cluster_means, objective, partial_sq_distance, row_center_distance, Centers, ClusterState,
    FitResult, Partition,
};
use crate::dataset::MaskedDataset;
use crate::error::{Error, Result};
use crate::init::{kmeanspp_init, InitConfig};
use crate::rng::restart_rng;

/// Exact objective changes for moving one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferDeltas {
    /// Increase from adding the row to the destination.
    pub delta_plus: f64,
    /// Decrease from removing the row from its source.
    pub delta_minus: f64,
}

impl TransferDeltas {
    /// Net change of the objective if the move is made.
    pub fn net(&self) -> f64 {
        self.delta_plus - self.delta_minus
    }
}

/// Tuning knobs for a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct KmConfig {
    /// Optimal-transfer passes allowed before giving up.
    pub max_optimal_passes: usize,
    /// Cap on steps within one quick-transfer stage, as a multiple of `n`.
    pub max_quick_steps_factor: usize,
    /// Record the maintained objective after every transfer.
    pub track_history: bool,
}

impl Default for KmConfig {
    fn default() -> Self {
        Self {
            max_optimal_passes: 100,
            max_quick_steps_factor: 50,
            track_history: false,
        }
    }
}

/// Increase of the objective if row `i` joins cluster `l`.
#[inline]
pub fn delta_plus(cs: &ClusterState, ds: &MaskedDataset, i: usize, l: usize) -> f64 {
    let (vals, mask) = (ds.row_values(i), ds.row_mask(i));
    let (means, counts) = (cs.means_row(l), cs.counts_row(l));
    let mut total = 0.0;
    for j in 0..vals.len() {
        let n = counts[j];
        if mask[j] && n > 0 {
            let d = vals[j] - means[j];
            let n = n as f64;
            total += n * d * d / (n + 1.0);
        }
    }
    total
}

/// Decrease of the objective if row `i` leaves cluster `k`.
///
/// A feature in which row `i` is the only observed member contributes zero:
/// the mean equals the value, so nothing is lost by removing it.
pub fn delta_minus(cs: &ClusterState, ds: &MaskedDataset, i: usize, k: usize) -> Result<f64> {
    if cs.size(k) <= 1 {
        return Err(Error::LastMember(k));
    }
    Ok(removal_cost(cs, ds, i, k))
}

#[inline]
fn removal_cost(cs: &ClusterState, ds: &MaskedDataset, i: usize, k: usize) -> f64 {
    let (vals, mask) = (ds.row_values(i), ds.row_mask(i));
    let (means, counts) = (cs.means_row(k), cs.counts_row(k));
    let mut total = 0.0;
    for j in 0..vals.len() {
        let n = counts[j];
        if mask[j] && n > 1 {
            let d = vals[j] - means[j];
            let n = n as f64;
            total += n * d * d / (n - 1.0);
        }
    }
    total
}

/// Both deltas for moving row `i` from `from` to `to`.
pub fn transfer_deltas(
    cs: &ClusterState,
    ds: &MaskedDataset,
    i: usize,
    from: usize,
    to: usize,
) -> Result<TransferDeltas> {
    Ok(TransferDeltas {
        delta_plus: delta_plus(cs, ds, i, to),
        delta_minus: delta_minus(cs, ds, i, from)?,
    })
}

/// Partition and statistics after the initial nearest-center assignment.
#[derive(Debug, Clone)]
pub struct InitialAssignment {
    pub partition: Partition,
    pub state: ClusterState,
    /// Rows that shared no feature with any center; they go to the largest cluster.
    pub unanchored: Vec<usize>,
    /// Rows moved into otherwise empty clusters.
    pub reseeded: Vec<usize>,
}

/// Assigns every row to its nearest center by partial squared distance and
/// records the runner-up, then recomputes means from the induced partition.
///
/// Ties go to the lowest cluster index. Centers that capture no rows are
/// repaired by moving in the row with the largest per-feature distance to its
/// own center, taken from a cluster that can spare it.
pub fn assign_initial(ds: &MaskedDataset, centers: &Centers) -> Result<InitialAssignment> {
    let k = centers.k();
    let n = ds.n();
    if k == 0 {
        return Err(Error::ZeroClusters);
    }
    if k > n {
        return Err(Error::KGreaterThanN { k, n });
    }
    let mut labels = vec![usize::MAX; n];
    let mut second = vec![0; n];
    // Per-feature distance to the assigned center; None when nothing is shared.
    let mut fit = vec![None; n];
    let mut unanchored = Vec::new();

    for i in 0..n {
        let mut best: Option<(usize, f64)> = None;
        let mut runner: Option<(usize, f64)> = None;
        let mut best_scaled = None;
        for c in 0..k {
            let d = row_center_distance(ds, i, centers, c);
            if !d.has_shared() {
                continue;
            }
            match best {
                Some((_, bd)) if d.sq >= bd => {
                    if runner.map_or(true, |(_, rd)| d.sq < rd) {
                        runner = Some((c, d.sq));
                    }
                }
                _ => {
                    runner = best;
                    best = Some((c, d.sq));
                    best_scaled = d.scaled();
                }
            }
        }
        match best {
            Some((c, _)) => {
                labels[i] = c;
                second[i] = match runner {
                    Some((r, _)) => r,
                    None => usize::from(c == 0),
                };
                fit[i] = best_scaled;
            }
            None => unanchored.push(i),
        }
    }

    let mut sizes = vec![0usize; k];
    for &l in labels.iter().filter(|&&l| l != usize::MAX) {
        sizes[l] += 1;
    }
    if !unanchored.is_empty() {
        let largest = (0..k).fold(0, |acc, c| if sizes[c] > sizes[acc] { c } else { acc });
        for &i in &unanchored {
            labels[i] = largest;
            second[i] = usize::from(largest == 0);
            sizes[largest] += 1;
        }
    }

    let mut reseeded = Vec::new();
    if k > 1 {
        for e in 0..k {
            if sizes[e] > 0 {
                continue;
            }
            // Undefined fit counts as worst.
            let mut pick: Option<(usize, f64)> = None;
            for i in 0..n {
                if sizes[labels[i]] < 2 {
                    continue;
                }
                let score = fit[i].unwrap_or(f64::INFINITY);
                if pick.map_or(true, |(_, s)| score > s) {
                    pick = Some((i, score));
                }
            }
            let (i, _) = pick.expect("k <= n leaves a cluster with two members");
            let from = labels[i];
            sizes[from] -= 1;
            sizes[e] += 1;
            labels[i] = e;
            second[i] = from;
            fit[i] = Some(0.0);
            reseeded.push(i);
        }
    } else {
        second.copy_from_slice(&labels);
    }

    let state = ClusterState::from_labels(ds, &labels, k);
    let partition = Partition::new(labels, second, k)?;
    Ok(InitialAssignment {
        partition,
        state,
        unanchored,
        reseeded,
    })
}

/// Per-cluster step counters that define the live set.
#[derive(Debug, Clone)]
pub struct LiveSet {
    /// Cluster `l` is live at optimal-transfer position `pos` iff `pos < live_until[l]`.
    live_until: Vec<i64>,
    /// Step of the last change: optimal-transfer position, quick step plus `n`,
    /// `-1` before the first pass and `0` once the quick stage has aged it out.
    last_update: Vec<i64>,
    /// Changed during the most recent quick-transfer stage.
    updated_in_quick: Vec<bool>,
}

impl LiveSet {
    fn new(k: usize) -> Self {
        Self {
            live_until: vec![0; k],
            last_update: vec![-1; k],
            updated_in_quick: vec![true; k],
        }
    }

    /// Clusters that enter the coming optimal-transfer pass as live.
    pub fn members_at_pass_start(&self) -> Vec<bool> {
        self.live_until
            .iter()
            .zip(&self.updated_in_quick)
            .map(|(&until, &quick)| quick || until > 1)
            .collect()
    }
}

/// Summary of one stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PassReport {
    pub transfers: usize,
    /// Rows for which a destination was actually evaluated.
    pub evaluations: usize,
    pub steps: usize,
    /// `n` consecutive steps without a transfer were observed.
    pub converged: bool,
    /// The quick stage stopped at its step cap.
    pub hit_step_cap: bool,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct KmState<'a> {
    ds: &'a MaskedDataset,
    part: Partition,
    cs: ClusterState,
    objective: f64,
    removal: Vec<f64>,
    live: LiveSet,
    since_transfer: usize,
    transfers: usize,
    optimal_passes: usize,
    history: Option<Vec<f64>>,
}

impl<'a> KmState<'a> {
    pub fn new(ds: &'a MaskedDataset, init: InitialAssignment, track_history: bool) -> Self {
        let k = init.partition.k();
        let objective = objective(ds, &init.partition.labels, &init.state);
        Self {
            ds,
            removal: vec![0.0; ds.n()],
            live: LiveSet::new(k),
            part: init.partition,
            cs: init.state,
            objective,
            since_transfer: 0,
            transfers: 0,
            optimal_passes: 0,
            history: track_history.then(|| vec![objective]),
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.part
    }

    pub fn cluster_state(&self) -> &ClusterState {
        &self.cs
    }

    pub fn live_set(&self) -> &LiveSet {
        &self.live
    }

    /// Objective as maintained through the transfer deltas.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn transfers(&self) -> usize {
        self.transfers
    }

    /// Maintained objective after each transfer, starting with the initial value.
    pub fn history(&self) -> Option<&[f64]> {
        self.history.as_deref()
    }

    /// Whether the last `n` steps passed without a transfer.
    pub fn is_converged(&self) -> bool {
        self.since_transfer >= self.ds.n()
    }

    fn transfer(&mut self, i: usize, from: usize, to: usize, minus: f64, plus: f64) {
        self.cs.remove_row(self.ds, i, from);
        self.cs.add_row(self.ds, i, to);
        self.part.labels[i] = to;
        self.part.second[i] = from;
        self.objective += plus - minus;
        self.transfers += 1;
        self.since_transfer = 0;
        if let Some(h) = self.history.as_mut() {
            h.push(self.objective);
        }
    }

    /// One sweep of the optimal-transfer stage.
    ///
    /// Each row whose cluster is live may move to any other cluster; a row in
    /// a stable cluster only considers live clusters and its runner-up. A move
    /// happens only when the cheapest addition is strictly below the removal
    /// saving. Returns early once `n` consecutive rows produced no transfer.
    pub fn optimal_transfer_pass(&mut self) -> PassReport {
        let n = self.ds.n() as i64;
        let k = self.part.k;
        let mut report = PassReport::default();
        self.optimal_passes += 1;
        for l in 0..k {
            if self.live.updated_in_quick[l] {
                self.live.live_until[l] = n + 1;
            }
        }
        for i in 0..self.ds.n() {
            let pos = i as i64 + 1;
            report.steps += 1;
            self.since_transfer += 1;
            let l1 = self.part.labels[i];
            if self.cs.size(l1) > 1 {
                if self.live.last_update[l1] != 0 {
                    self.removal[i] = removal_cost(&self.cs, self.ds, i, l1);
                }
                let runner = self.part.second[i];
                let source_live = pos < self.live.live_until[l1];
                let mut best: Option<(usize, f64)> = None;
                for l in 0..k {
                    if l == l1 || !(l == runner || source_live || pos < self.live.live_until[l]) {
                        continue;
                    }
                    let plus = delta_plus(&self.cs, self.ds, i, l);
                    if best.map_or(true, |(_, b)| plus < b) {
                        best = Some((l, plus));
                    }
                }
                report.evaluations += 1;
                let (l2, plus) = best.expect("runner-up is always a candidate");
                if plus < self.removal[i] {
                    let minus = self.removal[i];
                    self.transfer(i, l1, l2, minus, plus);
                    report.transfers += 1;
                    self.live.live_until[l1] = n + pos;
                    self.live.live_until[l2] = n + pos;
                    self.live.last_update[l1] = pos;
                    self.live.last_update[l2] = pos;
                } else {
                    self.part.second[i] = l2;
                }
            }
            if self.is_converged() {
                report.converged = true;
                return report;
            }
        }
        for l in 0..k {
            self.live.updated_in_quick[l] = false;
            self.live.live_until[l] -= n;
        }
        report
    }

    /// The quick-transfer stage: cycles through the rows, swapping a row with
    /// its runner-up whenever that strictly lowers the objective, until `n`
    /// consecutive steps pass without a swap or `max_steps` is reached.
    pub fn quick_transfer_pass(&mut self, max_steps: usize) -> PassReport {
        let n = self.ds.n();
        let mut report = PassReport::default();
        let mut quiet = 0usize;
        let mut step = 0i64;
        'outer: loop {
            for i in 0..n {
                quiet += 1;
                step += 1;
                report.steps += 1;
                let l1 = self.part.labels[i];
                let l2 = self.part.second[i];
                if self.cs.size(l1) > 1 {
                    if step <= self.live.last_update[l1] {
                        self.removal[i] = removal_cost(&self.cs, self.ds, i, l1);
                    }
                    if step < self.live.last_update[l1] || step < self.live.last_update[l2] {
                        report.evaluations += 1;
                        let plus = delta_plus(&self.cs, self.ds, i, l2);
                        if plus < self.removal[i] {
                            let minus = self.removal[i];
                            self.transfer(i, l1, l2, minus, plus);
                            report.transfers += 1;
                            quiet = 0;
                            self.live.updated_in_quick[l1] = true;
                            self.live.updated_in_quick[l2] = true;
                            self.live.last_update[l1] = step + n as i64;
                            self.live.last_update[l2] = step + n as i64;
                        }
                    }
                }
                if quiet == n {
                    break 'outer;
                }
                if report.steps >= max_steps {
                    report.hit_step_cap = true;
                    break 'outer;
                }
            }
        }
        self.live.last_update.iter_mut().for_each(|u| *u = 0);
        report
    }

    /// Runs stages until convergence or the pass budget is spent; returns
    /// whether the run converged.
    pub fn run(&mut self, cfg: &KmConfig) -> bool {
        if self.part.k < 2 {
            return true;
        }
        let max_quick = cfg.max_quick_steps_factor.max(1) * self.ds.n();
        for _ in 0..cfg.max_optimal_passes.max(1) {
            if self.optimal_transfer_pass().converged {
                return true;
            }
            if self.quick_transfer_pass(max_quick).hit_step_cap {
                return false;
            }
        }
        false
    }

    fn into_result(self, converged: bool, unanchored: Vec<usize>) -> FitResult {
        let cs = cluster_means(self.ds, &self.part);
        let obj = objective(self.ds, &self.part.labels, &cs);
        FitResult {
            centers: cs.centers(),
            partition: self.part,
            objective: obj,
            sigma_sq_hat: FitResult::sigma_sq(obj, self.ds),
            transfers: self.transfers,
            iterations: self.optimal_passes,
            converged,
            seed: 0,
            init_index: 0,
            unanchored_rows: unanchored,
        }
    }
}

/// Diagnostics of a run beyond the fit itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// Maintained objective after each transfer (empty unless history was tracked).
    pub history: Vec<f64>,
    /// Final maintained objective.
    pub maintained_objective: f64,
}

/// One run from the given initial centers.
pub fn run_km_means(
    ds: &MaskedDataset,
    k: usize,
    init_centers: &Centers,
    cfg: &KmConfig,
) -> Result<FitResult> {
    run_km_means_traced(ds, k, init_centers, cfg).map(|(fit, _)| fit)
}

/// Like [`run_km_means`] and also returns the maintained-objective trace.
pub fn run_km_means_traced(
    ds: &MaskedDataset,
    k: usize,
    init_centers: &Centers,
    cfg: &KmConfig,
) -> Result<(FitResult, RunTrace)> {
    if init_centers.k() != k {
        return Err(Error::InvalidArgument(format!(
            "expected {k} initial centers, got {}",
            init_centers.k()
        )));
    }
    if init_centers.p() != ds.p() {
        return Err(Error::ShapeMismatch { n: k, p: ds.p() });
    }
    let init = assign_initial(ds, init_centers)?;
    let unanchored = init.unanchored.clone();
    let mut state = KmState::new(ds, init, cfg.track_history);
    let converged = state.run(cfg);
    let trace = RunTrace {
        history: state.history.clone().unwrap_or_default(),
        maintained_objective: state.objective,
    };
    Ok((state.into_result(converged, unanchored), trace))
}

/// Settings for a multi-restart fit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitConfig {
    pub km: KmConfig,
    pub init: InitConfig,
    /// Run restarts on the rayon pool. The selected result does not depend on this.
    pub parallel: bool,
}

/// Default number of restarts: `100 K p`.
pub fn default_inits(k: usize, p: usize) -> usize {
    100 * k * p
}

/// Best of `n_inits` seeded runs by objective (ties to the earlier restart).
///
/// Restart `r` draws from its own stream of a generator keyed by `seed`, so the
/// outcome is identical whether restarts run serially or in parallel.
pub fn fit(
    ds: &MaskedDataset,
    k: usize,
    n_inits: usize,
    seed: u64,
    cfg: &FitConfig,
) -> Result<FitResult> {
    if n_inits == 0 {
        return Err(Error::InvalidArgument("at least one initialization is required".into()));
    }
    if k == 0 {
        return Err(Error::ZeroClusters);
    }
    if k > ds.n() {
        return Err(Error::KGreaterThanN { k, n: ds.n() });
    }
    let one = |r: usize| -> Result<FitResult> {
        let mut rng = restart_rng(seed, r as u64);
        let seeding = kmeanspp_init(ds, k, &mut rng, &cfg.init)?;
        let mut res = run_km_means(ds, k, &seeding.centers, &cfg.km)?;
        res.seed = seed;
        res.init_index = r;
        Ok(res)
    };
    let pick = |a: FitResult, b: FitResult| if b.better_than(&a) { b } else { a };
    if cfg.parallel {
        (0..n_inits)
            .into_par_iter()
            .map(one)
            .try_reduce_with(|a, b| Ok(pick(a, b)))
            .expect("n_inits >= 1")
    } else {
        let mut best: Option<FitResult> = None;
        for r in 0..n_inits {
            let res = one(r)?;
            best = Some(match best {
                Some(b) => pick(b, res),
                None => res,
            });
        }
        Ok(best.expect("n_inits >= 1"))
    }
}

/// Best objective reachable from `part` by moving a single row, if any move
/// improves it by more than `tol`. Used as a post-hoc local-optimality check.
pub fn improving_single_move(ds: &MaskedDataset, part: &Partition, tol: f64) -> Option<(usize, usize, f64)> {
    let cs = cluster_means(ds, part);
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..ds.n() {
        let from = part.labels[i];
        if cs.size(from) < 2 {
            continue;
        }
        let minus = removal_cost(&cs, ds, i, from);
        for to in 0..part.k {
            if to == from {
                continue;
            }
            let gain = minus - delta_plus(&cs, ds, i, to);
            if gain > tol && best.map_or(true, |(_, _, g)| gain > g) {
                best = Some((i, to, gain));
            }
        }
    }
    best
}

/// Partial squared distance from each row to each mean, for diagnostics.
pub fn distance_table(ds: &MaskedDataset, cs: &ClusterState) -> Vec<Vec<f64>> {
    (0..ds.n())
        .map(|i| (0..cs.k()).map(|k| partial_sq_distance(ds, i, cs, k).sq).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(xs: &[f64]) -> MaskedDataset {
        MaskedDataset::complete(xs.len(), 1, xs.to_vec()).unwrap()
    }

    fn scratch(ds: &MaskedDataset, labels: &[usize], k: usize) -> f64 {
        let cs = ClusterState::from_labels(ds, labels, k);
        objective(ds, labels, &cs)
    }

    #[test]
    fn delta_plus_zero_at_mean() {
        let ds = MaskedDataset::from_rows(&[
            [Some(1.0), Some(2.0)],
            [Some(3.0), None],
            [Some(2.0), Some(2.0)],
        ])
        .unwrap();
        let cs = ClusterState::from_labels(&ds, &[0, 0, 1], 2);
        assert_eq!(delta_plus(&cs, &ds, 2, 0), 0.0);
    }

    #[test]
    fn complete_data_delta_plus_classic_form() {
        let ds = one_d(&[0.0, 2.0, 5.0]);
        let cs = ClusterState::from_labels(&ds, &[0, 0, 1], 2);
        // n = 2, mean 1, distance^2 = 16
        assert_eq!(delta_plus(&cs, &ds, 2, 0), 2.0 * 16.0 / 3.0);
    }

    #[test]
    fn delta_minus_two_point_cluster() {
        let ds = one_d(&[0.0, 2.0]);
        let cs = ClusterState::from_labels(&ds, &[0, 0], 1);
        assert_eq!(delta_minus(&cs, &ds, 0, 0).unwrap(), 2.0);
    }

    #[test]
    fn delta_minus_sole_observed_feature_is_zero() {
        let ds = MaskedDataset::from_rows(&[[Some(1.0), Some(5.0)], [Some(3.0), None]]).unwrap();
        let cs = ClusterState::from_labels(&ds, &[0, 0], 1);
        // feature 1 has n = 1 so its term vanishes; feature 0 gives 2 * 1 / 1
        let d = delta_minus(&cs, &ds, 0, 0).unwrap();
        assert_eq!(d, 2.0);
        assert_eq!(scratch(&ds, &[0, 0], 1) - scratch(&ds, &[1, 0], 2), d);
    }

    #[test]
    fn delta_minus_last_member() {
        let ds = one_d(&[0.0, 2.0]);
        let cs = ClusterState::from_labels(&ds, &[0, 1], 2);
        assert_eq!(delta_minus(&cs, &ds, 0, 0), Err(Error::LastMember(0)));
    }

    #[test]
    fn initial_assignment_runner_up() {
        let ds = one_d(&[0.0, 10.0, 3.0]);
        let centers = Centers::from_rows(&ds, &[0, 1]);
        let init = assign_initial(&ds, &centers).unwrap();
        assert_eq!(init.partition.labels(), &[0, 1, 0]);
        assert_eq!(init.partition.second()[2], 1);
    }

    #[test]
    fn initial_assignment_ties_to_lowest_index() {
        let ds = one_d(&[5.0, 5.0, 5.0]);
        let centers = Centers::new(3, 1, vec![4.0, 6.0, 4.0], vec![true; 3]).unwrap();
        let init = assign_initial(&ds, &centers).unwrap();
        // Every row ties and lands in cluster 0. Repairs then take the lowest
        // row still in a cluster of size >= 2: row 0 to cluster 1, row 1 to 2.
        assert_eq!(init.partition.labels(), &[1, 2, 0]);
        assert_eq!(init.partition.second()[0], 0);
        assert_eq!(init.partition.second()[1], 0);
        assert_eq!(init.reseeded, vec![0, 1]);
    }

    #[test]
    fn k_greater_than_n() {
        let ds = one_d(&[1.0]);
        let centers = Centers::new(2, 1, vec![0.0, 1.0], vec![true; 2]).unwrap();
        assert!(matches!(assign_initial(&ds, &centers), Err(Error::KGreaterThanN { .. })));
    }

    #[test]
    fn unanchored_row_goes_to_largest_cluster() {
        let ds = MaskedDataset::from_rows(&[
            [Some(0.0), None],
            [Some(0.1), None],
            [Some(9.0), None],
            [None, Some(3.0)],
        ])
        .unwrap();
        let centers = Centers::from_rows(&ds, &[0, 2]);
        let init = assign_initial(&ds, &centers).unwrap();
        assert_eq!(init.unanchored, vec![3]);
        assert_eq!(init.partition.labels()[3], 0);
    }

    #[test]
    fn optimal_pass_fixes_bad_split() {
        let ds = one_d(&[0.0, 0.1, 10.0]);
        // {0}, {0.1, 10}
        let centers = Centers::new(2, 1, vec![-1.0, 1.0], vec![true; 2]).unwrap();
        let init = assign_initial(&ds, &centers).unwrap();
        assert_eq!(init.partition.labels(), &[0, 1, 1]);
        let mut state = KmState::new(&ds, init, true);
        let report = state.optimal_transfer_pass();
        assert_eq!(report.transfers, 1);
        assert_eq!(state.partition().labels(), &[0, 0, 1]);
        // Enumerated by hand: {0},{0.1,10} has W = 49.005; {0,0.1},{10} has W = 0.005.
        assert!((state.objective() - 0.005).abs() < 1e-12);
        assert!((scratch(&ds, &[0, 1, 1], 2) - 49.005).abs() < 1e-12);
    }

    #[test]
    fn optimal_pass_at_fixed_point() {
        let ds = one_d(&[0.0, 0.1, 10.0, 10.1]);
        let centers = Centers::from_rows(&ds, &[0, 2]);
        let init = assign_initial(&ds, &centers).unwrap();
        let mut state = KmState::new(&ds, init, false);
        let report = state.optimal_transfer_pass();
        assert_eq!(report.transfers, 0);
        assert!(report.converged);
    }

    #[test]
    fn quick_pass_single_swap() {
        // Row 2 (x = 4) sits in the right cluster but the left is cheaper.
        let ds = one_d(&[0.0, 1.0, 4.0, 9.0, 10.0]);
        let part = Partition::new(vec![0, 0, 1, 1, 1], vec![1, 1, 0, 0, 0], 2).unwrap();
        let state0 = ClusterState::from_labels(&ds, part.labels(), 2);
        let init = InitialAssignment {
            partition: part,
            state: state0,
            unanchored: vec![],
            reseeded: vec![],
        };
        let mut state = KmState::new(&ds, init, true);
        // Age the live set as an optimal pass with every cluster recently changed would.
        state.live.last_update = vec![ds.n() as i64, ds.n() as i64];
        let before = state.objective();
        let report = state.quick_transfer_pass(1000);
        assert_eq!(report.transfers, 1);
        assert_eq!(state.partition().labels(), &[0, 0, 0, 1, 1]);
        let oracle = scratch(&ds, &[0, 0, 1, 1, 1], 2) - scratch(&ds, &[0, 0, 0, 1, 1], 2);
        assert!((before - state.objective() - oracle).abs() < 1e-12);
    }

    #[test]
    fn quick_pass_skips_stale_rows() {
        let ds = one_d(&[0.0, 1.0, 9.0, 10.0]);
        let part = Partition::new(vec![0, 0, 1, 1], vec![1, 1, 0, 0], 2).unwrap();
        let state0 = ClusterState::from_labels(&ds, part.labels(), 2);
        let init = InitialAssignment {
            partition: part,
            state: state0,
            unanchored: vec![],
            reseeded: vec![],
        };
        let mut state = KmState::new(&ds, init, false);
        // Nothing changed within the window.
        state.live.last_update = vec![0, 0];
        let report = state.quick_transfer_pass(1000);
        assert_eq!(report.evaluations, 0);
        assert_eq!(report.transfers, 0);
        assert_eq!(report.steps, ds.n());
    }

    #[test]
    fn quick_pass_no_swap_when_runner_up_worse() {
        let ds = one_d(&[0.0, 1.0, 9.0, 10.0]);
        let part = Partition::new(vec![0, 0, 1, 1], vec![1, 1, 0, 0], 2).unwrap();
        let state0 = ClusterState::from_labels(&ds, part.labels(), 2);
        let init = InitialAssignment {
            partition: part,
            state: state0,
            unanchored: vec![],
            reseeded: vec![],
        };
        let mut state = KmState::new(&ds, init, false);
        state.live.last_update = vec![4, 4];
        let report = state.quick_transfer_pass(1000);
        assert_eq!(report.transfers, 0);
        assert!(report.evaluations > 0);
    }

    #[test]
    fn single_cluster_run() {
        let ds = one_d(&[0.0, 2.0]);
        let centers = Centers::from_rows(&ds, &[0]);
        let res = run_km_means(&ds, 1, &centers, &KmConfig::default()).unwrap();
        assert_eq!(res.objective, 2.0);
        assert!(res.converged);
        assert_eq!(res.sigma_sq_hat, 1.0);
    }

    #[test]
    fn fit_rejects_zero_inits() {
        let ds = one_d(&[0.0, 2.0]);
        assert!(fit(&ds, 1, 0, 1, &FitConfig::default()).is_err());
    }

    #[test]
    fn table_matches_distances() {
        let ds = one_d(&[0.0, 2.0, 4.0]);
        let cs = ClusterState::from_labels(&ds, &[0, 0, 1], 2);
        let t = distance_table(&ds, &cs);
        assert_eq!(t[2], vec![9.0, 0.0]);
    }
}
