use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use kdq_core::decomposition::decomposition_identity;
use kdq_core::figures::{figure_data, Figure};
use kdq_core::par::{max_over, Execution};
use kdq_core::random::{random_circuit, random_density, rng_for};
use kdq_core::system::build_hamiltonian;
use kdq_core::verify::{run_verification, Level, VerifyConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn figure_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("figure_4_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| figure_data(black_box(Figure::Fig4), exec).unwrap())
        });
    }
    group.finish();
}

fn decomposition_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("decomposition_500_circuits");
    group.sample_size(10);
    let h = build_hamiltonian(2, 1.0).unwrap();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                max_over(exec, 500, |k| {
                    let mut rng = rng_for(0, k as u64);
                    let circuit = random_circuit(&mut rng, 2, 6);
                    let rho = random_density(&mut rng, 4);
                    decomposition_identity(&circuit, &rho, &h).unwrap().residual_max
                })
            })
        });
    }
    group.finish();
}

fn verify_quick(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_quick");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = VerifyConfig {
            exec,
            ..VerifyConfig::new(Level::Quick, 0)
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_verification(black_box(&cfg))));
    }
    group.finish();
}

criterion_group!(benches, figure_sweep, decomposition_batch, verify_quick);
criterion_main!(benches);
