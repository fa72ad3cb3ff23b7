use std::hint::black_box;

use cofrag_core::{
    project_initial_condition, truncate, BreakupKernel, CoagulationKernel, CollisionKernel, GrowthBound, MassGrid,
    Solver, SolverConfig, State,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn granulation(n_cells: usize, t_end: f64) -> (Solver, Vec<f64>) {
    let grid = MassGrid::geometric(1e-3, 1e3, n_cells).unwrap();
    let coag = CoagulationKernel::granulation(1.0, 1.0, 0.5, GrowthBound::new(1.0, 1.0, 0.5)).unwrap();
    let kernels = truncate(coag, CollisionKernel::constant(0.1).unwrap(), 1000).unwrap();
    let cfg = SolverConfig::new(grid.clone(), kernels, BreakupKernel::power_law(0.0).unwrap(), t_end);
    let g0 = project_initial_condition(&grid, |x| (-x).exp()).unwrap();
    (Solver::new(cfg).unwrap(), g0)
}

fn bench_rhs(c: &mut Criterion) {
    let (solver, g0) = granulation(120, 1.0);
    let state = State::new(g0);
    c.bench_function("rhs_120_cells", |b| b.iter(|| solver.rhs(black_box(&state)).unwrap()));
}

fn bench_run(c: &mut Criterion) {
    let (solver, g0) = granulation(60, 0.1);
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    group.bench_function("granulation_60_cells", |b| b.iter(|| solver.run_from(State::new(black_box(g0.clone()))).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_rhs, bench_run);
criterion_main!(benches);
