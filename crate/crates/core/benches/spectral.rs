//! Forward spectrum and basis construction on a one-thread pool against the
//! default pool. `FROZEN_SL_THREADS` caps the default pool; building with
//! `--no-default-features` measures the sequential path instead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frozen_sl::basis_system::build_basis;
use frozen_sl::forward::spectrum_with;
use frozen_sl::function_space::ProblemConfig;
use frozen_sl::unperturbed::compute_unperturbed;
use frozen_sl::Complex64 as C;
use rayon::ThreadPool;

const N: usize = 16;

fn pools() -> Vec<(String, ThreadPool)> {
    let default = std::env::var("FROZEN_SL_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(rayon::current_num_threads);
    let mut out = Vec::new();
    for threads in [1, default] {
        if out.iter().any(|(_, p): &(String, ThreadPool)| p.current_num_threads() == threads) {
            continue;
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        out.push((format!("{threads}-threads"), pool));
    }
    out
}

fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "rayon"
    } else {
        "sequential"
    }
}

fn bench(c: &mut Criterion) {
    let cfg = ProblemConfig::from_fn(0, 1, 1.0, 1024, |t| C::from_polar(10.0, t)).unwrap();
    let q = cfg.sample(|t| C::new(t.sin(), 0.5 * t));
    let basis = build_basis(&compute_unperturbed(&cfg, N).unwrap()).unwrap();

    let mut group = c.benchmark_group(format!("spectral/{}", mode()));
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("forward", &label), &pool, |b, pool| {
            b.iter(|| pool.install(|| spectrum_with(black_box(&basis), black_box(&q)).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("basis", &label), &pool, |b, pool| {
            b.iter(|| pool.install(|| build_basis(&compute_unperturbed(black_box(&cfg), N).unwrap()).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
