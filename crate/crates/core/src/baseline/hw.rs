use crate::cluster::{Centers, FitResult, Partition};
use crate::error::{Error, Result};
use crate::hartigan::KmConfig;

/// Hartigan-Wong k-means (AS 136) on a complete row-major `n x p` matrix,
/// started from `centers` (`k x p`, row-major).
///
/// Uses the classic costs `n_l d^2 / (n_l + 1)` and `n_k d^2 / (n_k - 1)` with
/// running-mean center updates. Ties and empty-cluster repair follow the same
/// rules as [`crate::hartigan::assign_initial`].
pub fn kmeans_hw(
    data: &[f64],
    n: usize,
    p: usize,
    k: usize,
    centers: &[f64],
    cfg: &KmConfig,
) -> Result<FitResult> {
    if k == 0 {
        return Err(Error::ZeroClusters);
    }
    if k > n {
        return Err(Error::KGreaterThanN { k, n });
    }
    if data.len() != n * p || centers.len() != k * p {
        return Err(Error::ShapeMismatch { n, p });
    }
    if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteValue {
            row: idx / p,
            col: idx % p,
        });
    }
    let mut hw = Hw::new(data, n, p, k, centers);
    let converged = if k == 1 { true } else { hw.iterate(cfg) };
    Ok(hw.finish(converged))
}

struct Hw<'a> {
    x: &'a [f64],
    n: usize,
    p: usize,
    k: usize,
    c: Vec<f64>,
    nc: Vec<usize>,
    an1: Vec<f64>,
    an2: Vec<f64>,
    ic1: Vec<usize>,
    ic2: Vec<usize>,
    d: Vec<f64>,
    ncp: Vec<i64>,
    itran: Vec<bool>,
    live: Vec<i64>,
    indx: usize,
    transfers: usize,
    passes: usize,
}

impl<'a> Hw<'a> {
    fn new(x: &'a [f64], n: usize, p: usize, k: usize, centers: &[f64]) -> Self {
        let dist = |i: usize, c: &[f64], l: usize| -> f64 {
            (0..p).map(|j| (x[i * p + j] - c[l * p + j]).powi(2)).sum()
        };
        let mut ic1 = vec![0; n];
        let mut ic2 = vec![0; n];
        let mut own = vec![0.0; n];
        for i in 0..n {
            let (mut b1, mut d1) = (0, dist(i, centers, 0));
            let (mut b2, mut d2) = (usize::MAX, f64::INFINITY);
            for l in 1..k {
                let dl = dist(i, centers, l);
                if dl < d1 {
                    (b2, d2) = (b1, d1);
                    (b1, d1) = (l, dl);
                } else if dl < d2 {
                    (b2, d2) = (l, dl);
                }
            }
            ic1[i] = b1;
            ic2[i] = if k > 1 { b2 } else { b1 };
            own[i] = d1;
        }
        let mut nc = vec![0usize; k];
        for &l in &ic1 {
            nc[l] += 1;
        }
        if k > 1 {
            for e in 0..k {
                if nc[e] > 0 {
                    continue;
                }
                let mut pick: Option<usize> = None;
                for i in 0..n {
                    if nc[ic1[i]] >= 2 && pick.map_or(true, |q| own[i] > own[q]) {
                        pick = Some(i);
                    }
                }
                let i = pick.expect("k <= n");
                nc[ic1[i]] -= 1;
                nc[e] += 1;
                ic2[i] = ic1[i];
                ic1[i] = e;
                own[i] = 0.0;
            }
        }
        let mut c = vec![0.0; k * p];
        for i in 0..n {
            for j in 0..p {
                c[ic1[i] * p + j] += x[i * p + j];
            }
        }
        for l in 0..k {
            for j in 0..p {
                c[l * p + j] /= nc[l] as f64;
            }
        }
        let mut hw = Self {
            x,
            n,
            p,
            k,
            c,
            an1: vec![0.0; k],
            an2: vec![0.0; k],
            nc,
            ic1,
            ic2,
            d: vec![0.0; n],
            ncp: vec![-1; k],
            itran: vec![true; k],
            live: vec![0; k],
            indx: 0,
            transfers: 0,
            passes: 0,
        };
        for l in 0..k {
            hw.set_factors(l);
        }
        hw
    }

    fn set_factors(&mut self, l: usize) {
        let a = self.nc[l] as f64;
        self.an2[l] = a / (a + 1.0);
        self.an1[l] = if self.nc[l] > 1 { a / (a - 1.0) } else { f64::INFINITY };
    }

    #[inline]
    fn dist(&self, i: usize, l: usize) -> f64 {
        let row = &self.x[i * self.p..(i + 1) * self.p];
        let c = &self.c[l * self.p..(l + 1) * self.p];
        row.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn relocate(&mut self, i: usize, from: usize, to: usize) {
        let (al1, al2) = (self.nc[from] as f64, self.nc[to] as f64);
        let (alw, alt) = (al1 - 1.0, al2 + 1.0);
        for j in 0..self.p {
            let xv = self.x[i * self.p + j];
            let cf = &mut self.c[from * self.p + j];
            *cf = (*cf * al1 - xv) / alw;
            let ct = &mut self.c[to * self.p + j];
            *ct = (*ct * al2 + xv) / alt;
        }
        self.nc[from] -= 1;
        self.nc[to] += 1;
        self.set_factors(from);
        self.set_factors(to);
        self.ic1[i] = to;
        self.ic2[i] = from;
        self.transfers += 1;
    }

    fn optra(&mut self) {
        let m = self.n as i64;
        self.passes += 1;
        for l in 0..self.k {
            if self.itran[l] {
                self.live[l] = m + 1;
            }
        }
        for i in 0..self.n {
            let pos = i as i64 + 1;
            self.indx += 1;
            let l1 = self.ic1[i];
            if self.nc[l1] != 1 {
                if self.ncp[l1] != 0 {
                    self.d[i] = self.dist(i, l1) * self.an1[l1];
                }
                let ll = self.ic2[i];
                let mut best = usize::MAX;
                let mut r2 = f64::INFINITY;
                for l in 0..self.k {
                    let candidate = l == ll || pos < self.live[l1] || pos < self.live[l];
                    if l == l1 || !candidate {
                        continue;
                    }
                    let cost = self.dist(i, l) * self.an2[l];
                    if cost < r2 {
                        r2 = cost;
                        best = l;
                    }
                }
                if r2 >= self.d[i] {
                    self.ic2[i] = best;
                } else {
                    self.indx = 0;
                    self.live[l1] = m + pos;
                    self.live[best] = m + pos;
                    self.ncp[l1] = pos;
                    self.ncp[best] = pos;
                    self.relocate(i, l1, best);
                }
            }
            if self.indx == self.n {
                return;
            }
        }
        for l in 0..self.k {
            self.itran[l] = false;
            self.live[l] -= m;
        }
    }

    /// Returns false if the step cap was hit.
    fn qtran(&mut self, max_steps: usize) -> bool {
        let m = self.n as i64;
        let mut icoun = 0;
        let mut istep = 0i64;
        loop {
            for i in 0..self.n {
                icoun += 1;
                istep += 1;
                let (l1, l2) = (self.ic1[i], self.ic2[i]);
                if self.nc[l1] != 1 {
                    if istep <= self.ncp[l1] {
                        self.d[i] = self.dist(i, l1) * self.an1[l1];
                    }
                    if istep < self.ncp[l1] || istep < self.ncp[l2] {
                        let r2 = self.d[i] / self.an2[l2];
                        if self.dist(i, l2) < r2 {
                            icoun = 0;
                            self.indx = 0;
                            self.itran[l1] = true;
                            self.itran[l2] = true;
                            self.ncp[l1] = istep + m;
                            self.ncp[l2] = istep + m;
                            self.relocate(i, l1, l2);
                        }
                    }
                }
                if icoun == self.n {
                    return true;
                }
                if istep as usize >= max_steps {
                    return false;
                }
            }
        }
    }

    fn iterate(&mut self, cfg: &KmConfig) -> bool {
        let max_steps = cfg.max_quick_steps_factor.max(1) * self.n;
        for _ in 0..cfg.max_optimal_passes.max(1) {
            self.optra();
            if self.indx == self.n {
                return true;
            }
            if !self.qtran(max_steps) {
                return false;
            }
            // With two clusters the quick stage has already checked every alternative.
            if self.k == 2 {
                return true;
            }
            self.ncp.iter_mut().for_each(|v| *v = 0);
        }
        false
    }

    fn finish(self, converged: bool) -> FitResult {
        let (n, p, k) = (self.n, self.p, self.k);
        let mut c = vec![0.0; k * p];
        let mut nc = vec![0usize; k];
        for i in 0..n {
            nc[self.ic1[i]] += 1;
            for j in 0..p {
                c[self.ic1[i] * p + j] += self.x[i * p + j];
            }
        }
        for l in 0..k {
            for j in 0..p {
                c[l * p + j] /= nc[l] as f64;
            }
        }
        let wss: f64 = (0..n)
            .map(|i| {
                (0..p)
                    .map(|j| (self.x[i * p + j] - c[self.ic1[i] * p + j]).powi(2))
                    .sum::<f64>()
            })
            .sum();
        let partition = Partition::new(self.ic1, self.ic2, k).expect("clusters stay nonempty");
        FitResult {
            partition,
            centers: Centers::new(k, p, c, vec![true; k * p]).expect("shape"),
            objective: wss,
            sigma_sq_hat: wss / (n * p) as f64,
            transfers: self.transfers,
            iterations: self.passes,
            converged,
            seed: 0,
            init_index: 0,
            unanchored_rows: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_points_two_clusters() {
        let x = [0.0, 1.0, 9.0, 10.0];
        let res = kmeans_hw(&x, 4, 1, 2, &[0.0, 10.0], &KmConfig::default()).unwrap();
        assert_eq!(res.partition.labels(), &[0, 0, 1, 1]);
        assert_eq!(res.objective, 1.0);
        assert!(res.converged);
    }

    #[test]
    fn recovers_from_poor_start() {
        let x = [0.0, 0.1, 10.0];
        let res = kmeans_hw(&x, 3, 1, 2, &[0.0, 5.05], &KmConfig::default()).unwrap();
        assert_eq!(res.partition.labels(), &[0, 0, 1]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            kmeans_hw(&[0.0], 1, 1, 2, &[0.0, 1.0], &KmConfig::default()),
            Err(Error::KGreaterThanN { .. })
        ));
        assert!(kmeans_hw(&[0.0, 1.0], 2, 1, 1, &[0.0, 1.0], &KmConfig::default()).is_err());
    }
}
