use std::hint::black_box;

use chi2_core::liealg::{closure, DEFAULT_TOL};
use chi2_core::operators::chi2_generators;
use chi2_core::synthesis::{random_target_su, synthesize, SynthesisProblem, Target};
use chi2_core::trotter::{trotter_v, Axis, TrotterPlan};
use chi2_core::{gates, OperatorMatrix};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn lie_closure(c: &mut Criterion) {
    let mut group = c.benchmark_group("closure");
    for n in [2u32, 4, 6] {
        let g = chi2_generators(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| closure(black_box(&g.labeled()), DEFAULT_TOL).unwrap().0.dim)
        });
    }
    group.finish();
}

fn evolution(c: &mut Criterion) {
    let g = chi2_generators(8).unwrap();
    c.bench_function("evolve_h8", |b| b.iter(|| gates::evolve(black_box(&g.g1), 0.37).unwrap()));
}

fn trotter(c: &mut Criterion) {
    let plan = TrotterPlan::new(0.7, 1024, Axis::Y, 2).unwrap();
    c.bench_function("trotter_m1024", |b| b.iter(|| trotter_v(black_box(&plan)).unwrap().error));
}

fn synthesis(c: &mut Criterion) {
    let g = chi2_generators(2).unwrap();
    let target = random_target_su(3, 1).unwrap().into_entries();
    let target = OperatorMatrix::new(g.basis().clone(), target).unwrap();
    let gens: Vec<(String, OperatorMatrix)> = g.labeled().iter().map(|(l, m)| (l.to_string(), (*m).clone())).collect();
    let problem = SynthesisProblem::new(gens, Target::Unitary(target), 1e-8).unwrap().with_restarts(8);
    let mut group = c.benchmark_group("synthesis");
    group.sample_size(10);
    group.bench_function("su3_h2", |b| b.iter(|| synthesize(black_box(&problem)).unwrap().achieved_residual));
    group.finish();
}

criterion_group!(benches, lie_closure, evolution, trotter, synthesis);
criterion_main!(benches);
