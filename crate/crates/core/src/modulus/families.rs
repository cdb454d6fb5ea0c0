use serde::{Deserialize, Serialize};

use super::solve::CurveFamily;
use crate::error::{Error, Result};
use crate::geometry::canonical_phi_inverse;
use crate::types::{Alpha, Point, Polyline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RingCoords {
    Euclidean,
    /// Radial segments of the Euclidean annulus pulled back by the canonical chart.
    GrushinPullback,
}

/// Uniform chart samples per pulled-back ray, before refinement near the singular line.
pub const PULLBACK_SAMPLES: usize = 257;

/// `n` radial segments of the annulus `r_in < |z - center| < r_out` at angles
/// `2 pi (k + 1/2) / n`.
pub fn ring_family(
    center: Point,
    r_in: f64,
    r_out: f64,
    n: usize,
    coords: RingCoords,
    alpha: Alpha,
) -> Result<CurveFamily> {
    if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < r_in < r_out, got {r_in}, {r_out}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("ring families need at least one curve".into()));
    }
    let curves = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
            let dir = Point::new(t.cos(), t.sin());
            let (a, b) = (center + dir * r_in, center + dir * r_out);
            match coords {
                RingCoords::Euclidean => Polyline::from_vertices(vec![a, b]),
                RingCoords::GrushinPullback => pullback_segment(a, b, alpha),
            }
        })
        .collect::<Result<_>>()?;
    let label = format!("ring r_in={r_in} r_out={r_out} n={n} {coords:?}");
    Ok(CurveFamily::new(label, curves))
}

/// Pulls the chart segment `[a, b]` back to Grushin coordinates. Where the segment
/// crosses the image of the singular line, parameters are refined geometrically
/// towards the crossing, which itself becomes a vertex.
pub fn pullback_segment(a: Point, b: Point, alpha: Alpha) -> Result<Polyline> {
    let m = PULLBACK_SAMPLES - 1;
    let mut ts: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
    if a.x * b.x < 0.0 {
        let tc = a.x / (a.x - b.x);
        let step = 1.0 / m as f64;
        ts.push(tc);
        for k in 1..=40 {
            let d = step * 0.5f64.powi(k);
            ts.extend([tc - d, tc + d]);
        }
        ts.retain(|t| (0.0..=1.0).contains(t));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
    }
    let verts: Vec<Point> = ts.iter().map(|&t| canonical_phi_inverse(a.lerp(b, t), alpha)).collect();
    let params = ts;
    // Drop vertices that round onto their predecessor.
    let mut keep_v = Vec::with_capacity(verts.len());
    let mut keep_t = Vec::with_capacity(verts.len());
    for (p, t) in verts.into_iter().zip(params) {
        if keep_v.last() != Some(&p) {
            keep_v.push(p);
            keep_t.push(t);
        }
    }
    Polyline::new(keep_v, keep_t)
}

/// Curve count for a ring family whose outer spacing `2 pi r_out / n` is about one
/// cell of an `nx`-wide grid over the padded hull: fewer curves leave most cells
/// unconstrained and the discrete modulus collapses towards zero.
pub fn ring_curves_for_grid(nx: usize) -> usize {
    let n = (std::f64::consts::TAU * nx as f64 / 2.2).ceil() as usize;
    n.div_ceil(4) * 4
}
