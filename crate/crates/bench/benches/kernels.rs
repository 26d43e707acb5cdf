use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use vislab::fourier::FftEngine;
use vislab::heat_flow::{HeatSeries, SpectralMeasure};
use vislab::ns_solver::NavierStokes;
use vislab::{DataParams, Field, Grid, InitialData, Rank};

fn taylor_green(grid: &Grid) -> Field {
    Field::sample(grid, Rank::Vector, |x, o| {
        o[0] = x[0].sin() * x[1].cos() + 0.5 * (2.0 * x[1]).sin();
        o[1] = -x[0].cos() * x[1].sin();
    })
    .to_spectral()
}

fn fft(c: &mut Criterion) {
    let grid = Grid::new(vec![2048, 64], vec![1024.0, 1024.0]).unwrap();
    let engine = FftEngine::new(&grid);
    let values: Vec<f64> = (0..grid.len()).map(|i| (i as f64 * 0.37).sin()).collect();
    c.bench_function("fft round trip 2048x64", |b| {
        b.iter(|| engine.to_physical(&engine.to_spectral(black_box(&values))))
    });
}

fn nonlinear(c: &mut Criterion) {
    let grid = Grid::cubic(2, 256, 2.0 * PI).unwrap();
    let ns = NavierStokes::new(&grid, 0.01, 2.0 / 3.0).unwrap();
    let u = taylor_green(&grid).into_spectral_components().unwrap();
    c.bench_function("nonlinear term 256^2", |b| {
        b.iter(|| ns.nonlinear(black_box(&u)))
    });
}

fn heat_oracle(c: &mut Criterion) {
    let data = InitialData::new(DataParams::new(6, 2).unwrap());
    c.bench_function("grid-free heat measure n=6", |b| {
        b.iter(|| {
            let m = SpectralMeasure::from_data(black_box(&data), 12).unwrap();
            HeatSeries::sample(&m, data.params().eps(), 1.0, 1024)
        })
    });
    c.bench_function("exact L2 norm n=6", |b| {
        b.iter(|| black_box(&data).exact_l2_sq().unwrap())
    });
}

criterion_group!(benches, fft, nonlinear, heat_oracle);
criterion_main!(benches);
