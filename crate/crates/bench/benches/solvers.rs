use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracture_core::eigenerosion::solve_ee;
use fracture_core::fem::assembly::assemble_scalar_into;
use fracture_core::fem::cholesky::SymbolicCholesky;
use fracture_core::fem::{assemble, kernel_for, CsrMatrix, QuadKernel, StiffnessMultiplierField};
use fracture_core::{
    build_grid, EEOptions, EEVariant, EpsilonSetting, LinearSolverKind, PFParams, PhaseField, QuadratureMode,
    StudyConfig,
};

const MESHES: [f64; 2] = [0.02, 0.01];

fn assembly(c: &mut Criterion) {
    let cfg = StudyConfig::table1();
    let mut group = c.benchmark_group("assembly");
    for ratio in MESHES {
        let grid = build_grid(cfg.problem.d, ratio).unwrap();
        for mode in [QuadratureMode::Fast, QuadratureMode::Reference] {
            let kernel = kernel_for(mode, cfg.problem.material);
            let ones = StiffnessMultiplierField::uniform(&grid, 1.0);
            group.bench_with_input(BenchmarkId::new(mode.as_str(), ratio), &grid, |b, g| {
                b.iter(|| assemble(g, &kernel, &ones).unwrap())
            });
        }
    }
    group.finish();
}

fn cholesky(c: &mut Criterion) {
    let cfg = StudyConfig::table1();
    let mut group = c.benchmark_group("cholesky");
    for ratio in MESHES {
        let grid = build_grid(cfg.problem.d, ratio).unwrap();
        let quad = QuadKernel::new(2);
        let mut a = CsrMatrix::grid_pattern(&grid, 1);
        assemble_scalar_into(&mut a, &grid, &quad, &vec![1.0; grid.element_count() * quad.len()], 1e-2).unwrap();
        let symbolic = SymbolicCholesky::for_grid(&grid, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("factorize", ratio), &a, |b, a| {
            b.iter(|| symbolic.factorize(a).unwrap())
        });
        let factor = symbolic.factorize(&a).unwrap();
        let rhs = vec![1.0; a.n];
        group.bench_with_input(BenchmarkId::new("solve", ratio), &rhs, |b, rhs| b.iter(|| factor.solve(rhs)));
    }
    group.finish();
}

fn eigenerosion(c: &mut Criterion) {
    let cfg = StudyConfig::table1();
    let options = EEOptions {
        quadrature: QuadratureMode::Fast,
        residual: 0.0,
        solver: LinearSolverKind::Direct,
    };
    let mut group = c.benchmark_group("eigenerosion");
    group.sample_size(10);
    for ratio in MESHES {
        let grid = build_grid(cfg.problem.d, ratio).unwrap();
        group.bench_with_input(BenchmarkId::new("solve", ratio), &grid, |b, g| {
            b.iter(|| solve_ee(g, &cfg.problem, EpsilonSetting::Auto, EEVariant::Plain, &options).unwrap())
        });
    }
    group.finish();
}

fn phase_field(c: &mut Criterion) {
    let cfg = StudyConfig::table1();
    let mut group = c.benchmark_group("phase_field");
    group.sample_size(10);
    for ratio in MESHES {
        let grid = build_grid(cfg.problem.d, ratio).unwrap();
        let mut pf = PhaseField::new(&grid, &cfg.problem, QuadratureMode::Fast, LinearSolverKind::Direct).unwrap();
        let params = PFParams::new(0.01, cfg.problem.d, &cfg.pf).unwrap();
        let v = pf.initial_v();
        group.bench_function(BenchmarkId::new("iteration", ratio), |b| {
            b.iter(|| {
                let u = pf.solve_u(&v, &params).unwrap();
                pf.solve_v(&u, &v, &params).unwrap()
            })
        });
        group.bench_function(BenchmarkId::new("alternate_minimize", ratio), |b| {
            b.iter(|| pf.alternate_minimize(&params, None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, assembly, cholesky, eigenerosion, phase_field);
criterion_main!(benches);
