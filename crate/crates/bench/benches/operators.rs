use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracterp::nonstationary::{builtin_operator, builtin_schedule};
use fracterp::quaternion::example_operator;
use fracterp::{backward_trajectory, AffineMap, DomainBox, GridFunction, LocalRBOperator, RBOperator, Side};

fn first_example() -> RBOperator {
    let maps = vec![AffineMap::ratio((1, 3), (0, 1)), AffineMap::ratio((2, 3), (1, 3))];
    RBOperator::from_exprs(DomainBox::half_open(0.0, 1.0), maps, &["-1", "x"], &["0.5*sin(x)", "-2/3*cos(x)"]).unwrap()
}

fn apply(c: &mut Criterion) {
    let t = first_example();
    let local = LocalRBOperator::from_global(&t);
    let mut group = c.benchmark_group("apply");
    for res in [244, 2188, 19684] {
        let f = GridFunction::from_fn(t.domain().clone(), res, 1, |x| vec![x[0].sin()]).unwrap();
        group.bench_with_input(BenchmarkId::new("global", res), &f, |b, f| b.iter(|| t.apply(black_box(f)).unwrap()));
        group.bench_with_input(BenchmarkId::new("local", res), &f, |b, f| b.iter(|| local.apply_local(black_box(f)).unwrap()));
    }
    group.finish();
}

fn fixed_points(c: &mut Criterion) {
    let mut group = c.benchmark_group("fixed_point");
    let t = first_example();
    let f0 = GridFunction::zeros(t.domain().clone(), 2188, 1).unwrap();
    group.bench_function("first_example", |b| b.iter(|| t.iterate_to_fixed_point(black_box(&f0), 1e-9, 200).unwrap()));

    let parabola = builtin_operator("parabola").unwrap();
    let z = GridFunction::zeros(parabola.domain().clone(), 1025, 1).unwrap();
    group.bench_function("parabola", |b| b.iter(|| parabola.iterate_to_fixed_point(black_box(&z), 1e-12, 200).unwrap()));

    let q = example_operator(Side::Left);
    let q0 = GridFunction::zeros(q.domain().clone(), 1025, 4).unwrap();
    group.bench_function("quaternion", |b| b.iter(|| q.quat_fixed_point(black_box(&q0), 1e-9, 200).unwrap()));
    group.finish();
}

fn trajectories(c: &mut Criterion) {
    let sched = builtin_schedule("takagi_parabola").unwrap();
    let f0 = GridFunction::zeros(DomainBox::closed(0.0, 1.0), 1025, 1).unwrap();
    c.bench_function("trajectory/takagi_parabola_30", |b| b.iter(|| backward_trajectory(&sched, black_box(&f0), 30).unwrap()));
}

criterion_group!(benches, apply, fixed_points, trajectories);
criterion_main!(benches);
