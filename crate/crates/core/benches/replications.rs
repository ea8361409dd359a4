use std::hint::black_box;

use cloudmarket::dist::{BidDistribution, BidGrid};
use cloudmarket::obsa::Mechanism;
use cloudmarket::sim::{run_scenario1, Exec, Scenario1Config};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn replications(c: &mut Criterion) {
    let base = Scenario1Config {
        bids: BidDistribution::uniform(BidGrid::new(48.0, 312.0, 1.0).unwrap()),
        lambdas: vec![10.0],
        deltas: vec![3],
        p_b: 0.5,
        reps: 2000,
        seed: 1,
        exec: Exec::Sequential,
    };
    let mut group = c.benchmark_group("scenario1_replications");
    group.sample_size(20);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let cfg = Scenario1Config { exec, ..base.clone() };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &cfg, |b, cfg| {
            b.iter(|| run_scenario1(black_box(cfg), Mechanism::SecondPrice).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
