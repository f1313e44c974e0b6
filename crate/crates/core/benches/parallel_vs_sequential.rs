use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use wpdj::harness::cmd_transients;
use wpdj::oracle::enumerate_all;
use wpdj::readout::{accuracy_monte_carlo, calibrate_phi0, compute_threshold};
use wpdj::{CouplingSet, Execution, NoiseModel, ProbeModel, RunConfig};

fn modes() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel),
    ]
}

fn threshold_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("threshold_search");
    group.sample_size(10);
    for n in [12usize, 16] {
        let energies: Vec<f64> = (0..n).map(|k| 30.0 * k as f64 + 0.4 * (k * k) as f64).collect();
        let couplings = CouplingSet::new(
            vec![1.0; n],
            (0..n).map(|k| Complex64::new(1.0 + 0.1 * k as f64, 0.0)).collect(),
        )
        .unwrap();
        let probe = ProbeModel::uniform(n, 1.0, 5000.0).unwrap();
        let phi0 = calibrate_phi0(&energies, 5.0, n - 1).unwrap();
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| {
                    compute_threshold(black_box(phi0.clone()), 5.0, &energies, &couplings, &probe, exec).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let cfg = RunConfig::default().resolve().unwrap();
    let setup = cfg.setup().unwrap();
    let cal = setup.calibrate(None, Execution::default()).unwrap();
    let functions = enumerate_all(8).unwrap();
    let noise = NoiseModel::with_per_point_sigma(cal.margin() / 6.0, 10_000, 1).unwrap();
    let mut group = c.benchmark_group("monte_carlo_20k");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(name, |b| {
            b.iter(|| accuracy_monte_carlo(&setup, &cal, &functions, &noise, 20_000, exec).unwrap())
        });
    }
    group.finish();
}

fn transient_sweep(c: &mut Criterion) {
    let cfg = RunConfig::default().resolve().unwrap();
    let functions = enumerate_all(8).unwrap();
    let mut group = c.benchmark_group("transients_all_72");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_function(name, |b| b.iter(|| cmd_transients(&cfg, &functions, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, threshold_search, monte_carlo, transient_sweep);
criterion_main!(benches);
