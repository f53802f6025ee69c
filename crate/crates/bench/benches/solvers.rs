use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use resgraph::lsq::{gradient, objective};
use resgraph::similarity::{resistance_table, ResistanceOperator};
use resgraph::{reconstruct_full, solve_block_cd, InitMode, SolverConfig};
use resgraph_bench::grid_problem;

fn resistance_operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("resistance_operator");
    for side in [5, 8, 10] {
        let (g, _) = grid_problem(side, 0.1, 0);
        group.bench_with_input(BenchmarkId::from_parameter(side * side), &g, |b, g| {
            b.iter(|| ResistanceOperator::new(black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn objective_and_gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("lsq");
    group.sample_size(20);
    for side in [5, 8, 10] {
        let (g, ms) = grid_problem(side, 0.25, 1);
        let w = g
            .weights()
            .iter()
            .map(|x| 0.9 * x + 0.01)
            .collect::<Vec<_>>();
        let n = side * side;
        group.bench_with_input(BenchmarkId::new("objective", n), &w, |b, w| {
            b.iter(|| objective(black_box(w), &ms).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gradient", n), &w, |b, w| {
            b.iter(|| gradient(black_box(w), &ms).unwrap())
        });
    }
    group.finish();
}

fn block_cd(c: &mut Criterion) {
    let (_, ms) = grid_problem(10, 0.25, 2);
    let cfg = SolverConfig {
        max_iters: 20,
        init: InitMode::Uniform,
        stall_window: 0,
        ..SolverConfig::block(100)
    };
    let mut group = c.benchmark_group("block_cd");
    group.sample_size(10);
    group.bench_function("grid100_20iters", |b| {
        b.iter(|| solve_block_cd(black_box(&ms), &cfg).unwrap())
    });
    group.finish();
}

fn exact_reconstruction(c: &mut Criterion) {
    let mut group = c.benchmark_group("reconstruct_full");
    for side in [5, 8, 10] {
        let (g, _) = grid_problem(side, 0.1, 0);
        let table = resistance_table(&g).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(side * side), &table, |b, t| {
            b.iter(|| reconstruct_full(black_box(t), side * side).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    resistance_operator,
    objective_and_gradient,
    block_cd,
    exact_reconstruction
);
criterion_main!(benches);
