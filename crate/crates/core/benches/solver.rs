//! Parallel vs sequential kernels.
//!
//! `spmv` and the sweep are compared inside one binary; for everything else
//! run once with default features and once with `--no-default-features`.

use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use domeheat::config::RunConfig;
use domeheat::mesh::generate_half_disc;
use domeheat::sweep::{self, SweepSpec};
use domeheat::{FemMatrices, HeatProblem, ProblemConfig};

fn spmv(c: &mut Criterion) {
    let mut group = c.benchmark_group("spmv");
    for level in [3, 4, 5] {
        let mesh = generate_half_disc(1.0, PI / 12.0, level).unwrap();
        let matrices = FemMatrices::assemble(&mesh).unwrap();
        let a = &matrices.stiffness;
        let x: Vec<f64> = (0..a.n_cols()).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; a.n_rows()];
        group.bench_with_input(BenchmarkId::new("parallel", a.n_rows()), &level, |b, _| {
            b.iter(|| a.spmv_into(black_box(&x), &mut y).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", a.n_rows()), &level, |b, _| {
            b.iter(|| a.spmv_into_sequential(black_box(&x), &mut y).unwrap())
        });
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for level in [3, 5] {
        let mesh = generate_half_disc(1.0, PI / 12.0, level).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(mesh.n_vertices()), &mesh, |b, mesh| {
            b.iter(|| FemMatrices::assemble(black_box(mesh)).unwrap())
        });
    }
    group.finish();
}

fn forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward_solve");
    group.sample_size(10);
    for level in [2, 4] {
        let mesh = generate_half_disc(1.0, PI / 12.0, level).unwrap();
        let matrices = FemMatrices::assemble(&mesh).unwrap();
        let config = ProblemConfig {
            n_steps: 100,
            ..Default::default()
        };
        let problem = HeatProblem::new(&mesh, &matrices, config).unwrap();
        let control = problem.constant_control(40.0);
        group.bench_with_input(BenchmarkId::from_parameter(mesh.n_vertices()), &control, |b, u| {
            b.iter(|| problem.solve_forward_final(black_box(u)).unwrap())
        });
    }
    group.finish();
}

fn sweep_cases(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let base = RunConfig::parse("level = 0\nn_steps = 50\n").unwrap();
    let spec = SweepSpec::parse("lambda 1e-4\nlambda 1e-2\nlambda 1\nlambda 1e2\n").unwrap();
    let mesh = base.mesh.build(None).unwrap();
    let matrices = FemMatrices::assemble(&mesh).unwrap();
    group.bench_function("parallel", |b| b.iter(|| sweep::run_sweep(&spec, &base)));
    group.bench_function("sequential", |b| {
        b.iter(|| {
            for case in spec.cases(&base) {
                let problem = ProblemConfig {
                    lambda: case.lambda,
                    n_steps: case.n_steps,
                    ..base.problem
                };
                black_box(sweep::optimize(&mesh, &matrices, problem, &base).unwrap());
            }
        })
    });
    group.finish();
}

criterion_group!(benches, spmv, assembly, forward, sweep_cases);
criterion_main!(benches);
