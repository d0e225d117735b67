use criterion::{criterion_group, criterion_main, Criterion};
use dislab::energy::{peach_koehler, renormalized_energy};
use dislab::greens::{h_omega, k_omega, k_numeric};
use dislab::{Domain, Vec2};
use dislab_bench::{ellipse, three_dislocations};
use std::hint::black_box;

fn kernels(c: &mut Criterion) {
    let (x, y) = (Vec2::new(0.3, 0.2), Vec2::new(-0.4, 0.1));
    let e = ellipse();
    // Warm the solver cache so the numeric benches time evaluation, not setup.
    k_omega(&e, x, y).unwrap();
    c.bench_function("k disk images", |b| b.iter(|| k_omega(&Domain::UnitDisk, black_box(x), black_box(y))));
    c.bench_function("k disk numeric", |b| b.iter(|| k_numeric(&Domain::UnitDisk, black_box(x), black_box(y))));
    c.bench_function("k ellipse", |b| b.iter(|| k_omega(&e, black_box(x), black_box(y))));
    c.bench_function("h ellipse near boundary", |b| b.iter(|| h_omega(&e, black_box(Vec2::new(1.99, 0.0)))));
}

fn forces(c: &mut Criterion) {
    let sys = three_dislocations();
    let e = ellipse();
    peach_koehler(&e, &sys, None).unwrap();
    c.bench_function("forces disk n=3", |b| b.iter(|| peach_koehler(&Domain::UnitDisk, black_box(&sys), None)));
    c.bench_function("forces ellipse n=3", |b| b.iter(|| peach_koehler(&e, black_box(&sys), None)));
    c.bench_function("energy ellipse n=3", |b| b.iter(|| renormalized_energy(&e, black_box(&sys))));
}

criterion_group!(benches, kernels, forces);
criterion_main!(benches);
