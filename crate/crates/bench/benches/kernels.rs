use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use lmax_core::excursion::MaxPmfTable;
use lmax_core::montecarlo::{self, SimConfig};
use lmax_core::series::ProductSeries;
use lmax_core::walk::{Sign, WalkSpec};

fn specs() -> [(&'static str, WalkSpec); 3] {
    [
        ("constant", WalkSpec::constant(0.5).unwrap()),
        ("plus_k1", WalkSpec::perturbed(1, 0.5, Sign::Plus).unwrap()),
        ("plus_k3", WalkSpec::perturbed(3, 0.5, Sign::Plus).unwrap()),
    ]
}

fn series_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("series_build");
    let n = 1_000_000;
    group.throughput(Throughput::Elements(n as u64));
    for (name, spec) in specs() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &spec, |b, &spec| {
            b.iter(|| ProductSeries::build(black_box(spec), n).unwrap())
        });
    }
    group.finish();
}

fn pmf_table(c: &mut Criterion) {
    let n = 1_000_000;
    let series = ProductSeries::build(WalkSpec::perturbed(2, 0.0, Sign::Plus).unwrap(), n).unwrap();
    let mut group = c.benchmark_group("pmf_table");
    group.throughput(Throughput::Elements(n as u64));
    group.bench_function("plus_k2", |b| b.iter(|| MaxPmfTable::build(black_box(&series), n).unwrap()));
    group.finish();
}

fn simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let excursions = 20_000;
    group.throughput(Throughput::Elements(excursions));
    for workers in [1, 4] {
        let config = SimConfig {
            workers,
            cap_steps: 100_000,
            ..SimConfig::new(WalkSpec::perturbed(1, 1.0, Sign::Minus).unwrap(), excursions, 7)
        };
        group.bench_with_input(BenchmarkId::new("minus_k1", workers), &config, |b, config| {
            b.iter(|| montecarlo::run(black_box(config)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, series_build, pmf_table, simulate);
criterion_main!(benches);
