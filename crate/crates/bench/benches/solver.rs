use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;
use sdot_core::*;

fn atoms_fixture(omega: &ConvexPolygon, n: usize, seed: u64) -> Atoms {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let pts: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.gen_range(0.02..0.98), rng.gen_range(0.02..0.98)))
            .collect();
        if let Ok(a) = Atoms::new(pts, omega) {
            return a;
        }
    }
}

fn bench_build(c: &mut Criterion) {
    let omega = unit_square();
    let mut group = c.benchmark_group("tesselation_build");
    for n in [5usize, 15, 50] {
        let atoms = atoms_fixture(&omega, n, 7);
        let prices = initial_prices(&atoms, &omega).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| build(black_box(&atoms), Metric::new(0.5), &prices, &omega))
        });
    }
    group.finish();
}

fn bench_step_ingredients(c: &mut Criterion) {
    let omega = unit_square();
    let atoms = atoms_fixture(&omega, 15, 7);
    let prices = initial_prices(&atoms, &omega).unwrap();
    let metric = Metric::new(0.5);
    let complex = build(&atoms, metric, &prices, &omega);
    c.bench_function("hessian_and_mixed_derivative", |b| {
        b.iter(|| {
            let m = hessian(black_box(&complex), metric, &atoms).unwrap();
            let d = mixed_derivative(&complex, metric, &atoms);
            (m, d)
        })
    });
    c.bench_function("euler_step_n15", |b| {
        b.iter(|| continuation::euler_step(&prices, 0.0, 0.01, &atoms, &omega).unwrap())
    });
}

fn bench_solvers(c: &mut Criterion) {
    let omega = unit_square();
    let atoms = atoms_fixture(&omega, 5, 7);
    c.bench_function("continuation_run_n5_100steps", |b| {
        b.iter(|| run(black_box(&atoms), &omega, Schedule::standard(100)).unwrap())
    });
    let p0 = initial_prices(&atoms, &omega).unwrap();
    c.bench_function("newton_solve_eps1", |b| {
        b.iter(|| solve_fixed_eps(&atoms, &omega, 1.0, &p0, 1e-10).unwrap())
    });
}

criterion_group!(benches, bench_build, bench_step_ingredients, bench_solvers);
criterion_main!(benches);
