use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ruelle_bench::gauss;
use ruelle_core::transfer::{leading_eigendata, GibbsScan};
use ruelle_core::EigenOptions;

fn eigendata(c: &mut Criterion) {
    let mut group = c.benchmark_group("gauss_eigendata");
    group.sample_size(10);
    for m in [50, 200] {
        let u = gauss(m);
        let quick = EigenOptions::quick();
        let dense = EigenOptions {
            gibbs: GibbsScan::Off,
            ..EigenOptions::default()
        };
        group.bench_with_input(BenchmarkId::new("power", m), &u, |b, u| {
            b.iter(|| leading_eigendata(u, &quick).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("with_dense_gap", m), &u, |b, u| {
            b.iter(|| leading_eigendata(u, &dense).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, eigendata);
criterion_main!(benches);
