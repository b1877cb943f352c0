use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use esfem::assembly::{assemble, Discretisation};
use esfem::solver::LinearSolver;
use esfem::{Method, ScenarioKind};
use esfem_bench::{loaded_state, problem, residual_norm};

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for (kind, name) in [(ScenarioKind::Dea, "dea"), (ScenarioKind::Myocardium, "myocardium")] {
        for method in Method::ALL {
            let p = problem(kind, method, 6);
            assert!(residual_norm(&p).is_finite());
            let (state, dofs) = loaded_state(&p);
            group.bench_with_input(BenchmarkId::new(name, method), &p, |b, p| {
                b.iter(|| assemble(&p.disc, &state, 1.0, &dofs).unwrap())
            });
        }
    }
    group.finish();
}

fn linear_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for method in [Method::Tet, Method::Fsns, Method::Hex] {
        let p = problem(ScenarioKind::Dea, method, 6);
        let (state, dofs) = loaded_state(&p);
        let sys = assemble(&p.disc, &state, 1.0, &dofs).unwrap();
        let mut solver = LinearSolver::new();
        group.bench_function(BenchmarkId::new("dea", method), |b| {
            b.iter(|| solver.solve(&sys.matrix, &sys.residual).unwrap())
        });
    }
    group.finish();
}

fn discretisation(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    for method in [Method::Fs, Method::Ns, Method::Fsns] {
        let p = problem(ScenarioKind::Myocardium, method, 6);
        let mesh = p.disc.mesh().clone();
        let config = *p.disc.config();
        let rule = esfem::scenarios::FiberRule::new(10.0);
        group.bench_function(BenchmarkId::new("myocardium", method), |b| {
            b.iter(|| Discretisation::new(mesh.clone(), config, &|x| rule.frame(x)).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = assembly, linear_solve, discretisation
}
criterion_main!(benches);
