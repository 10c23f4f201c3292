//! Sweep harness throughput: data-parallel rows vs the sequential fallback.
//!
//! Run with `cargo bench -p spectral-lab`. Built without the `parallel`
//! feature both entry points take the sequential path, so the two series
//! coincide.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spectral_lab::synth::{run_sweep, run_sweep_serial, SweepConfig, SyntheticSpec};

fn bench_spec(d: usize) -> SyntheticSpec {
    SyntheticSpec {
        d,
        beta: 2.0,
        signal: vec![1.0, 0.8, 0.5],
        n_per_class: 128,
        rotation_seed: 7,
        noise_seed: 13,
    }
}

fn bench_config() -> SweepConfig {
    SweepConfig {
        k_list: vec![1, 2, 4],
        n_test: 256,
        ..SweepConfig::default()
    }
}

fn sweep_benches(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for &d in &[16usize, 32] {
        let spec = bench_spec(d);
        let config = bench_config();
        let grid = [128usize, 256, 512];
        group.bench_with_input(BenchmarkId::new("parallel", d), &d, |b, _| {
            b.iter(|| run_sweep(&spec, &grid, 4, &config).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("serial", d), &d, |b, _| {
            b.iter(|| run_sweep_serial(&spec, &grid, 4, &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep_benches);
criterion_main!(benches);
