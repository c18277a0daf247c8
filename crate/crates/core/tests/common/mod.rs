#![allow(dead_code)]

use kmmeans::rng::restart_rng;
use kmmeans::MaskedDataset;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    restart_rng(seed, 99)
}

/// Random rows drawn around `k` offsets, each cell missing with probability
/// `lambda`; rows that lose every cell keep their first one.
pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, p: usize, k: usize, lambda: f64) -> MaskedDataset {
    let offsets: Vec<f64> = (0..k * p).map(|_| rng.random_range(-5.0..5.0)).collect();
    let mut values = Vec::with_capacity(n * p);
    let mut mask = Vec::with_capacity(n * p);
    for _ in 0..n {
        let c = rng.random_range(0..k);
        let start = mask.len();
        for j in 0..p {
            values.push(offsets[c * p + j] + rng.random_range(-1.0..1.0));
            mask.push(!rng.random_bool(lambda));
        }
        if mask[start..].iter().all(|&m| !m) {
            mask[start] = true;
        }
    }
    MaskedDataset::from_parts(n, p, values, mask).unwrap()
}

/// Labels with every cluster nonempty.
pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    labels
}

/// Means by filtering each cluster's observed cells and averaging them.
pub fn naive_means(ds: &MaskedDataset, labels: &[usize], k: usize) -> Vec<Vec<Option<f64>>> {
    (0..k)
        .map(|c| {
            (0..ds.p())
                .map(|j| {
                    let vals: Vec<f64> = (0..ds.n())
                        .filter(|&i| labels[i] == c)
                        .filter_map(|i| ds.value(i, j))
                        .collect();
                    if vals.is_empty() {
                        None
                    } else {
                        Some(vals.iter().sum::<f64>() / vals.len() as f64)
                    }
                })
                .collect()
        })
        .collect()
}

/// Masked within-cluster sum of squares by a plain triple loop.
pub fn naive_objective(ds: &MaskedDataset, labels: &[usize], k: usize) -> f64 {
    let means = naive_means(ds, labels, k);
    let mut w = 0.0;
    for i in 0..ds.n() {
        for j in 0..ds.p() {
            if let Some(x) = ds.value(i, j) {
                let m = means[labels[i]][j].expect("observed cell implies defined mean");
                w += (x - m) * (x - m);
            }
        }
    }
    w
}

/// Global minimum over all labelings with nonempty clusters, for `k = 2`.
pub fn enumerate_two_way(ds: &MaskedDataset) -> f64 {
    let n = ds.n();
    let mut best = f64::INFINITY;
    // Fix row 0 in cluster 0 to skip mirrored labelings.
    for bits in 1u64..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { ((bits >> (i - 1)) & 1) as usize }).collect();
        best = best.min(naive_objective(ds, &labels, 2));
    }
    best
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
