//! Sequential vs rayon execution of the grid-parallel workloads.

use std::hint::black_box;

use btriple::boundary::{verify_suite, VerifyConfig};
use btriple::config::Scheme;
use btriple::discrete::{convergence_study, random_exactness, FluxKind};
use btriple::graph::MetricGraph;
use btriple::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn verify(c: &mut Criterion) {
    let star = MetricGraph::star(3, 1.0).unwrap();
    let mut group = c.benchmark_group("verify_suite_star3");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = VerifyConfig { samples: 50, exec, ..VerifyConfig::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, cfg| {
            b.iter(|| verify_suite(black_box(&star), cfg).unwrap())
        });
    }
    group.finish();
}

fn discrete(c: &mut Criterion) {
    let mut group = c.benchmark_group("random_exactness_40");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| random_exactness(black_box(40), 7, exec)));
    }
    group.finish();

    let interval = MetricGraph::interval(1.0).unwrap();
    let z = Complex64::new(-1.0, 0.0);
    let mut group = c.benchmark_group("convergence_fem_p1");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                convergence_study(&interval, z, &[16, 32, 64, 128], Scheme::FemP1, FluxKind::Consistent, exec).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, verify, discrete);
criterion_main!(benches);
