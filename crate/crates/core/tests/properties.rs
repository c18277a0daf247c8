mod common;

use common::naive_objective;
use kmmeans::hartigan::improving_single_move;
use kmmeans::simulate::adjusted_rand;
use kmmeans::{fit, FitConfig, MaskedDataset};
use proptest::prelude::*;

fn masked_dataset() -> impl Strategy<Value = MaskedDataset> {
    (4usize..30, 1usize..5).prop_flat_map(|(n, p)| {
        (
            prop::collection::vec(-50.0f64..50.0, n * p),
            prop::collection::vec(prop::bool::weighted(0.75), n * p),
        )
            .prop_map(move |(values, mut mask)| {
                for row in mask.chunks_mut(p) {
                    if !row.iter().any(|&m| m) {
                        row[0] = true;
                    }
                }
                MaskedDataset::from_parts(n, p, values, mask).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fit_invariants(ds in masked_dataset(), k in 1usize..4, seed in any::<u64>()) {
        let k = k.min(ds.n());
        let res = fit(&ds, k, 2, seed, &FitConfig::default()).unwrap();
        prop_assert_eq!(res.partition.len(), ds.n());
        prop_assert!(res.partition.sizes().iter().all(|&s| s > 0));
        prop_assert!(res.objective >= 0.0);
        let w = naive_objective(&ds, res.partition.labels(), k);
        prop_assert!((res.objective - w).abs() <= 1e-9 * w.max(1.0));
        prop_assert!(improving_single_move(&ds, &res.partition, 1e-9 * w.max(1.0)).is_none());
        for c in 0..k {
            for j in 0..ds.p() {
                let any_obs = (0..ds.n()).any(|i| res.partition.labels()[i] == c && ds.is_observed(i, j));
                prop_assert_eq!(res.centers.get(c, j).is_some(), any_obs);
            }
        }
    }

    #[test]
    fn single_cluster_objective_is_total_masked_variation(ds in masked_dataset()) {
        let res = fit(&ds, 1, 1, 0, &FitConfig::default()).unwrap();
        let means = ds.column_means();
        let mut w = 0.0;
        for i in 0..ds.n() {
            for j in 0..ds.p() {
                if let Some(x) = ds.value(i, j) {
                    w += (x - means[j].unwrap()).powi(2);
                }
            }
        }
        prop_assert!((res.objective - w).abs() <= 1e-9 * w.max(1.0));
    }

    #[test]
    fn ari_is_symmetric_and_label_invariant(
        a in prop::collection::vec(0usize..4, 2..40),
        perm in Just([2usize, 0, 3, 1]),
        seed in any::<u64>(),
    ) {
        let b: Vec<usize> = a.iter().enumerate().map(|(i, &x)| (x + (seed as usize >> (i % 32)) % 2) % 4).collect();
        if let (Ok(ab), Ok(ba)) = (adjusted_rand(&a, &b), adjusted_rand(&b, &a)) {
            prop_assert_eq!(ab, ba);
            let relabeled: Vec<usize> = b.iter().map(|&x| perm[x]).collect();
            prop_assert_eq!(adjusted_rand(&a, &relabeled).unwrap(), ab);
            prop_assert!(ab <= 1.0);
        }
    }

    #[test]
    fn remask_keeps_observed_values(ds in masked_dataset(), drop in any::<u64>()) {
        let p = ds.p();
        let mut mask = ds.mask().to_vec();
        for (i, row) in mask.chunks_mut(p).enumerate() {
            let j = (drop as usize + i) % p;
            if row.iter().filter(|&&m| m).count() > 1 {
                row[j] = false;
            }
        }
        let thinner = ds.remask(mask.clone()).unwrap();
        for i in 0..ds.n() {
            for j in 0..p {
                let expect = if mask[i * p + j] { ds.value(i, j) } else { None };
                prop_assert_eq!(thinner.value(i, j), expect);
            }
        }
    }
}
