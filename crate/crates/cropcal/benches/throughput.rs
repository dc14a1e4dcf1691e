//! Throughput of the comparison matrix with parallel cells versus the
//! sequential fallback. Build with `--no-default-features` to measure a
//! binary without the rayon dependency at all.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use cropcal::harness::{compare, Algorithm, ExperimentConfig};

fn workload_config(parallel: bool) -> ExperimentConfig {
    let mut config = ExperimentConfig {
        days: 60,
        runs: 4,
        seed: 42,
        parallel,
        ..ExperimentConfig::default()
    };
    config.optimizer.demmogc.generations = 10;
    config.optimizer.de.generations = 10;
    config.optimizer.pso.iterations = 10;
    config.enkf.ensemble_size = 20;
    config
}

fn bench_compare(c: &mut Criterion) {
    let algorithms = [Algorithm::Demmogc, Algorithm::De, Algorithm::Pso];
    let varieties = ["HD-2967".to_string(), "IR64".to_string()];
    let mut group = c.benchmark_group("compare-matrix");
    group.sample_size(10);
    for (label, parallel) in [("parallel", true), ("sequential", false)] {
        let config = workload_config(parallel);
        group.bench_function(label, |b| {
            b.iter(|| compare(black_box(&config), &algorithms, &varieties).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_compare);
criterion_main!(benches);
