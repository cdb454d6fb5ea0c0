use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use grushin_bench::{alpha, ring_problem, zigzag};
use grushin_core::geometry::grushin_length;
use grushin_core::modulus::{nonrectifiable_integral, solve_modulus, IntegralGrid, ModulusOptions};
use grushin_core::{grushin_distance, DistanceOptions, Metric, Point};

fn distance(c: &mut Criterion) {
    let opts = DistanceOptions::default();
    let mut g = c.benchmark_group("distance");
    for a in [0.5, 1.0, 2.0] {
        g.bench_function(format!("unit_vertical_alpha_{a}"), |b| {
            b.iter(|| grushin_distance(Point::new(0.0, 0.0), black_box(Point::new(0.0, 1.0)), alpha(a), &opts).unwrap())
        });
    }
    g.bench_function("generic_pair_alpha_1", |b| {
        b.iter(|| grushin_distance(Point::new(-1.3, 0.4), black_box(Point::new(2.1, -1.7)), alpha(1.0), &opts).unwrap())
    });
    g.finish();
}

fn length(c: &mut Criterion) {
    let curve = zigzag(16);
    c.bench_function("grushin_length_zigzag16_alpha_0.5", |b| {
        b.iter(|| grushin_length(black_box(&curve), alpha(0.5)).unwrap())
    });
}

fn modulus(c: &mut Criterion) {
    let (family, grid) = ring_problem(144, 48);
    let opts = ModulusOptions::default();
    let mut g = c.benchmark_group("modulus");
    g.sample_size(10);
    g.bench_function("ring_144_curves_48x48", |b| {
        b.iter(|| solve_modulus(black_box(&family), &grid, Metric::Euclidean, alpha(1.0), &opts).unwrap())
    });
    g.finish();
}

fn integral(c: &mut Criterion) {
    c.bench_function("nonrectifiable_family_integral_alpha_1", |b| {
        b.iter(|| nonrectifiable_integral(black_box(alpha(1.0)), IntegralGrid::PRIMARY).unwrap())
    });
}

criterion_group!(benches, distance, length, modulus, integral);
criterion_main!(benches);
