//! Shared inputs for the benchmarks, kept small enough to iterate quickly.

use grushin_core::modulus::{ring_family, CurveFamily, DensityGrid, RingCoords};
use grushin_core::{Alpha, Point, Polyline};

pub fn alpha(a: f64) -> Alpha {
    Alpha::new(a).expect("valid alpha")
}

/// A zig-zag polyline crossing the singular line `n` times.
pub fn zigzag(n: usize) -> Polyline {
    let v = (0..=n).map(|i| Point::new(if i % 2 == 0 { -0.5 } else { 0.75 }, 0.1 * i as f64)).collect();
    Polyline::from_vertices(v).expect("distinct vertices")
}

/// Euclidean ring family and a grid matched to it.
pub fn ring_problem(curves: usize, cells: usize) -> (CurveFamily, DensityGrid) {
    let family =
        ring_family(Point::default(), 1.0, 2.0, curves, RingCoords::Euclidean, alpha(1.0)).expect("ring family");
    let grid = DensityGrid::euclidean(family.hull(0.1).expect("hull"), cells, cells).expect("grid");
    (family, grid)
}
