//! Grid-scan and quadrature benchmarks.
//!
//! The hot paths are data-parallel over α points (condition scans, modulus
//! bound, Fourier inversion) and sequential where the math is (counting
//! recurrences, lattice convolution). Each benchmark id carries the compile
//! mode, so
//!
//! ```text
//! cargo bench                          # rayon-parallel core
//! cargo bench --no-default-features    # sequential fallback
//! ```
//!
//! produce directly comparable reports (criterion keeps both baselines).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dcs_core::exact::count_exact;
use dcs_core::khintchine::{solve_saddle, TiltedEnsemble};
use dcs_core::verify::{check_condition_iii_prime, check_modulus_bound, v_sum};
use dcs_core::weights::{StructureKind, WeightSequence};

const MODE: &str = if cfg!(feature = "parallel") {
    "parallel"
} else {
    "serial"
};

fn bench_condition_scan(c: &mut Criterion) {
    let w = WeightSequence::example3();
    let mut group = c.benchmark_group("condition_iii_prime_scan");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new(MODE, "delta_1e-3"), |b| {
        b.iter(|| {
            let report =
                check_condition_iii_prime(&w, StructureKind::Multiset, &[1e-3], 0.1).unwrap();
            black_box(report.verdict);
        })
    });
    group.finish();
}

fn bench_modulus_bound(c: &mut Criterion) {
    let w = WeightSequence::power_law(1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("modulus_bound_grid");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new(MODE, "n_500"), |b| {
        b.iter(|| {
            let report = check_modulus_bound(&w, StructureKind::Multiset, 500).unwrap();
            black_box(report.max_violation);
        })
    });
    group.finish();
}

fn bench_quadrature(c: &mut Criterion) {
    let w = WeightSequence::power_law(1.0, 1.0).unwrap();
    let sp = solve_saddle(&w, StructureKind::Multiset, 400).unwrap();
    let ens = TiltedEnsemble::new(&w, StructureKind::Multiset, 400, sp.delta_n).unwrap();
    let mut group = c.benchmark_group("point_prob_quadrature");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new(MODE, "n_400"), |b| {
        b.iter(|| black_box(ens.point_prob_quadrature().unwrap().value))
    });
    group.finish();
}

fn bench_v_sum_single(c: &mut Criterion) {
    let w = WeightSequence::power_law(1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("v_sum_single_eval");
    group.bench_function(BenchmarkId::new(MODE, "delta_1e-3"), |b| {
        b.iter(|| black_box(v_sum(&w, 1e-3, 0.37).unwrap().value))
    });
    group.finish();
}

fn bench_exact_counting(c: &mut Criterion) {
    // Sequential by nature: a baseline non-parallel workload for contrast.
    let w = WeightSequence::power_law(1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("count_exact");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new(MODE, "partitions_2000"), |b| {
        b.iter(|| {
            let t = count_exact(&w, StructureKind::Multiset, 2000).unwrap();
            black_box(t.count(2000).clone());
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_condition_scan,
    bench_modulus_bound,
    bench_quadrature,
    bench_v_sum_single,
    bench_exact_counting
);
criterion_main!(benches);
