use criterion::{criterion_group, criterion_main, Criterion};
use lepage_bench::{first_order, second_order, third_order_with_shear};
use lepage_core::charts::{check_theta_invariance, obstruction_3rd};
use lepage_core::lepage::{caratheodory_closed, caratheodory_contraction, euler_lagrange, principal_component};
use lepage_core::relativity::{hilbert_caratheodory, metric_objects, Signature};

fn lepage_equivalents(c: &mut Criterion) {
    let l1 = first_order(3, 2, 7).unwrap();
    let l2 = second_order(7).unwrap();
    c.bench_function("principal component r=1 n=3 m=2", |b| b.iter(|| principal_component(&l1).unwrap()));
    c.bench_function("principal component r=2", |b| b.iter(|| principal_component(&l2).unwrap()));
    c.bench_function("euler-lagrange r=2", |b| b.iter(|| euler_lagrange(&l2).unwrap()));
    c.bench_function("caratheodory closed r=2", |b| b.iter(|| caratheodory_closed(&l2).unwrap()));
    c.bench_function("caratheodory contraction r=2", |b| b.iter(|| caratheodory_contraction(&l2).unwrap()));
}

fn charts(c: &mut Criterion) {
    let l2 = second_order(11).unwrap();
    let t = lepage_core::charts::shear(*l2.space()).unwrap();
    c.bench_function("theta invariance r=2 shear", |b| b.iter(|| check_theta_invariance(&l2, &t).unwrap()));
    let (l3, t3) = third_order_with_shear(11).unwrap();
    c.bench_function("third-order obstruction", |b| b.iter(|| obstruction_3rd(&l3, &t3).unwrap()));
}

fn hilbert(c: &mut Criterion) {
    // curvature objects are cached, so this times the construction itself
    metric_objects(3, Signature::Riemannian).unwrap();
    let mut g = c.benchmark_group("hilbert");
    g.sample_size(10);
    g.bench_function("caratheodory n=2", |b| b.iter(|| hilbert_caratheodory(2).unwrap()));
    g.bench_function("caratheodory n=3", |b| b.iter(|| hilbert_caratheodory(3).unwrap()));
    g.finish();
}

criterion_group!(benches, lepage_equivalents, charts, hilbert);
criterion_main!(benches);
