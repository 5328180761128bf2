use criterion::{criterion_group, criterion_main, Criterion};
use ruelle_bench::{golden_renewal, nonlattice_distribution, nonlattice_renewal};
use ruelle_core::forcing::Forcing;
use ruelle_core::key_renewal::solve_key_renewal;
use ruelle_core::renewal::{renewal_fixed_point, FixedPointOptions};
use ruelle_core::TimeGrid;

fn fixed_point(c: &mut Criterion) {
    let opts = FixedPointOptions::default();
    let lattice = golden_renewal();
    let grid = TimeGrid::new(0.0, 30.0, 0.125).unwrap();
    c.bench_function("renewal_fixed_point/lattice_t30", |b| {
        b.iter(|| renewal_fixed_point(&lattice, grid, &opts).unwrap())
    });
    let nonlattice = nonlattice_renewal();
    let grid = TimeGrid::new(0.0, 200.0, 1.0 / 64.0).unwrap();
    c.bench_function("renewal_fixed_point/nonlattice_t200", |b| {
        b.iter(|| renewal_fixed_point(&nonlattice, grid, &opts).unwrap())
    });
}

fn key_renewal(c: &mut Criterion) {
    let dist = nonlattice_distribution();
    let z = Forcing::ExpStep { beta: 1.0 };
    let grid = TimeGrid::new(0.0, 100.0, 0.5).unwrap();
    let mut group = c.benchmark_group("key_renewal");
    group.sample_size(10);
    group.bench_function("nonlattice_t100", |b| b.iter(|| solve_key_renewal(&dist, &z, grid).unwrap()));
    group.finish();
}

criterion_group!(benches, fixed_point, key_renewal);
criterion_main!(benches);
