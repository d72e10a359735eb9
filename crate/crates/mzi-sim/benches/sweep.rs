//! Parallel versus sequential sweep execution on a mixed protocol grid.
//!
//! Run with `cargo bench -p mzi-sim`; build with `--no-default-features` to
//! measure the purely sequential build (both benches then coincide).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use num_complex::Complex64 as C64;

use mzi_sim::protocols::{ConcentrateInputs, RemotePrepareInputs, TeleportInputs};
use mzi_sim::sweep::{run_points, run_points_sequential, SweepPoint};

fn mixed_grid(points_per_protocol: usize) -> Vec<SweepPoint> {
    let mut points = Vec::with_capacity(3 * points_per_protocol);
    for k in 0..points_per_protocol {
        // Angles strictly inside (0, π/2) keep every pair normalized and
        // non-degenerate.
        let theta = std::f64::consts::FRAC_PI_2 * (k as f64 + 0.5) / points_per_protocol as f64;
        let (alpha, beta) = (C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0));
        points.push(SweepPoint::Teleport(TeleportInputs { alpha, beta }));
        points.push(SweepPoint::Concentrate(ConcentrateInputs::matched(
            alpha, beta,
        )));
        points.push(SweepPoint::RemotePrepare(RemotePrepareInputs {
            a: alpha,
            b: beta,
            mu: beta,
            nu: alpha,
        }));
    }
    points
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    for points_per_protocol in [32usize, 128] {
        let grid = mixed_grid(points_per_protocol);
        group.throughput(Throughput::Elements(grid.len() as u64));
        group.bench_with_input(
            BenchmarkId::new("parallel", grid.len()),
            &grid,
            |b, grid| b.iter(|| run_points(grid).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", grid.len()),
            &grid,
            |b, grid| b.iter(|| run_points_sequential(grid).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
