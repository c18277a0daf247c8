use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kmmeans::baseline::{kpod, KpodConfig};
use kmmeans::simulate::Mechanism;
use kmmeans::{delta_minus, delta_plus, fit, ClusterState, FitConfig};
use kmmeans_bench::fixture;

fn transfer_costs(c: &mut Criterion) {
    let ds = fixture(4, 1000, 10, Mechanism::Mcar, 0.2, 1);
    let labels: Vec<usize> = (0..ds.n()).map(|i| i % 4).collect();
    let cs = ClusterState::from_labels(&ds, &labels, 4);
    c.bench_function("delta_plus_minus/n1000_p10", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..ds.n() {
                acc += delta_plus(&cs, &ds, i, (labels[i] + 1) % 4);
                acc += delta_minus(&cs, &ds, i, labels[i]).unwrap();
            }
            black_box(acc)
        })
    });
}

fn restarts(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_10_restarts");
    group.sample_size(20);
    for &(n, p) in &[(500usize, 5usize), (1000, 10)] {
        let ds = fixture(4, n, p, Mechanism::Mcar, 0.1, 2);
        let cfg = FitConfig::default();
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_p{p}")), &ds, |b, ds| {
            b.iter(|| black_box(fit(ds, 4, 10, 3, &cfg).unwrap().objective))
        });
    }
    group.finish();
}

fn km_versus_kpod(c: &mut Criterion) {
    let ds = fixture(4, 500, 5, Mechanism::Mar, 0.2, 4);
    let mut group = c.benchmark_group("per_restart_mar");
    group.sample_size(20);
    group.bench_function("km_means", |b| {
        b.iter(|| black_box(fit(&ds, 4, 1, 5, &FitConfig::default()).unwrap().objective))
    });
    let cfg = KpodConfig {
        n_inits: 1,
        ..Default::default()
    };
    group.bench_function("kpod", |b| b.iter(|| black_box(kpod(&ds, 4, 5, &cfg).unwrap().fit.objective)));
    group.finish();
}

criterion_group!(benches, transfer_costs, restarts, km_versus_kpod);
criterion_main!(benches);
