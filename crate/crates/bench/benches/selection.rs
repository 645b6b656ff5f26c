use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rinv_bench::{frame_instance, identity_instance};
use rinv_core::matrix::sym_eigendecomposition;
use rinv_core::{exhaustive_best_subset, run_selection, PivotRule, Tolerances};

fn selection(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("select_identity");
    group.sample_size(10);
    for n in [16usize, 32, 64] {
        let dec = identity_instance(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &dec, |b, dec| {
            b.iter(|| run_selection(black_box(dec), 0.5, PivotRule::FirstFeasible, &tol).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("select_frame");
    group.sample_size(10);
    for n in [16usize, 32, 64] {
        let dec = frame_instance(n, 1);
        for (name, rule) in [
            ("first", PivotRule::FirstFeasible),
            ("greedy", PivotRule::GreedyMinPotential),
        ] {
            group.bench_with_input(BenchmarkId::new(name, n), &dec, |b, dec| {
                b.iter(|| run_selection(black_box(dec), 0.9, rule, &tol).unwrap())
            });
        }
    }
    group.finish();
}

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("sym_eigen");
    for n in [16usize, 64, 128] {
        let l = frame_instance(n, 3).images();
        let a = rinv_core::DenseMatrix::from_nalgebra(&l * l.transpose()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| sym_eigendecomposition(black_box(a)).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let dec = frame_instance(6, 2);
    c.bench_function("oracle_12_choose_4", |b| {
        b.iter(|| exhaustive_best_subset(black_box(&dec), 4).unwrap())
    });
}

criterion_group!(benches, selection, eigensolver, oracle);
criterion_main!(benches);
