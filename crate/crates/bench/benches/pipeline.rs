use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use lidiag_bench::fixture;
use lidiag_core::diagnose::{calibrate, estimate_cn0, CalibrationOptions, SearchGrids};
use lidiag_core::ica::{diagnostic_dca, find_features, FeatureWindows, SmoothingConfig};
use lidiag_core::model::{simulate, SimulationOptions};

fn simulation(c: &mut Criterion) {
    let (cell, _) = fixture();
    let mut g = c.benchmark_group("simulate");
    g.bench_function("c20_discharge", |b| {
        b.iter(|| simulate(black_box(&cell), &SimulationOptions::discharge(0.05, 10.0)).unwrap())
    });
    g.bench_function("1c_discharge", |b| {
        b.iter(|| simulate(black_box(&cell), &SimulationOptions::discharge(1.0, 5.0)).unwrap())
    });
    g.finish();
}

fn dca(c: &mut Criterion) {
    let (_, trace) = fixture();
    let cfg = SmoothingConfig::default();
    let windows = FeatureWindows::default();
    c.bench_function("dca_and_features", |b| {
        b.iter(|| {
            let curve = diagnostic_dca(black_box(&trace), &cfg).unwrap();
            find_features(&curve, &windows).unwrap()
        })
    });
}

fn search(c: &mut Criterion) {
    let (cell, trace) = fixture();
    let opts = CalibrationOptions::default();
    let grid = SearchGrids::default().c_n0.values(cell.negative.c_0);
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("stage_cn0", |b| {
        b.iter(|| estimate_cn0(&cell, black_box(&trace), &grid, &opts.estimation).unwrap())
    });
    g.bench_function("calibrate", |b| {
        b.iter(|| calibrate(&cell, black_box(&trace), &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, simulation, dca, search);
criterion_main!(benches);
