use std::collections::BTreeMap;
use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use natgrad::document::TABLE_TOL;
use natgrad::pde::{functional_gradient, lambda1_estimate, Mesh};
use natgrad::problems::instantiate;
use natgrad::solvers::{solve_mountain_pass, MPParams};
use natgrad::{TransformTable, TrendOptions};
use natgrad_bench::{bump, cubic, decaying_g};

fn transform(c: &mut Criterion) {
    let g = decaying_g(2.0);
    c.bench_function("transform/build s_max=50", |b| {
        b.iter(|| TransformTable::build(black_box(&g), 2.0, 50.0, TABLE_TOL).unwrap())
    });
    let table = TransformTable::build(&g, 2.0, 50.0, TABLE_TOL).unwrap();
    let vs: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
    c.bench_function("transform/invert 1000 values", |b| {
        b.iter(|| vs.iter().map(|&v| table.invert_a(black_box(v)).unwrap()).sum::<f64>())
    });
}

fn pde(c: &mut Criterion) {
    let prob = cubic(401);
    let v = bump(&prob);
    c.bench_function("pde/gradient 401 nodes", |b| {
        b.iter(|| functional_gradient(&prob, black_box(&v)).unwrap())
    });
    let mesh = Arc::new(Mesh::interval(1.0, 401, 3.0).unwrap());
    c.bench_function("pde/lambda1 p=3 401 nodes", |b| {
        b.iter(|| lambda1_estimate(black_box(&mesh)).unwrap())
    });
}

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solvers");
    group.sample_size(10);
    let prob = cubic(201);
    group.bench_function("mountain pass cubic 201 nodes", |b| {
        b.iter(|| solve_mountain_pass(black_box(&prob), &MPParams::default()).unwrap())
    });
    group.finish();
}

fn hypotheses(c: &mut Criterion) {
    let mut group = c.benchmark_group("hypotheses");
    group.sample_size(10);
    let inst = instantiate("i", &BTreeMap::new()).unwrap();
    group.bench_function("catalogue entry i", |b| {
        b.iter(|| inst.check(&TrendOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, transform, pde, solvers, hypotheses);
criterion_main!(benches);
