//! Points on Grushin spheres, located by root finding along Euclidean rays.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{grushin_distance, DistanceOptions};
use crate::error::{Error, Result};
use crate::geometry::grushin_speed;
use crate::types::{Alpha, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SphereOptions {
    pub distance: DistanceOptions,
    /// Accept a ray point when `|d(center, p) - r| <= rel_tol * r`.
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for SphereOptions {
    fn default() -> Self {
        SphereOptions { distance: DistanceOptions::default(), rel_tol: 1e-3, max_iterations: 80 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub angle: f64,
    pub point: Point,
    pub distance: f64,
    pub evaluations: usize,
    /// Set when the ray search failed; `point` is then the best iterate.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrushinBallSample {
    pub center: Point,
    pub radius: f64,
    /// Points from rays that met the tolerance.
    pub boundary_points: Vec<Point>,
    pub rays: Vec<RaySample>,
}

impl GrushinBallSample {
    pub fn failed_rays(&self) -> usize {
        self.rays.iter().filter(|r| r.flag.is_some()).count()
    }
}

/// Samples `n` points of the Grushin sphere of radius `r` around `center`, one per
/// Euclidean ray at angles `2 pi k / n`.
pub fn grushin_sphere_sample(
    center: Point,
    r: f64,
    n: usize,
    alpha: Alpha,
    opts: &SphereOptions,
) -> Result<GrushinBallSample> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 rays, got {n}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    if !center.is_finite() {
        return Err(Error::NonFinitePoint(center.x, center.y));
    }
    let rays: Vec<RaySample> = (0..n)
        .into_par_iter()
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64;
            solve_ray(center, r, angle, alpha, opts)
        })
        .collect::<Result<_>>()?;
    let boundary_points = rays.iter().filter(|s| s.flag.is_none()).map(|s| s.point).collect();
    Ok(GrushinBallSample { center, radius: r, boundary_points, rays })
}

fn solve_ray(center: Point, r: f64, angle: f64, alpha: Alpha, opts: &SphereOptions) -> Result<RaySample> {
    let dir = Point::new(angle.cos(), angle.sin());
    let g =
        |t: f64| -> Result<f64> { Ok(grushin_distance(center, center + dir * t, alpha, &opts.distance)?.distance - r) };
    let tol = opts.rel_tol * r;

    // Riemannian first guess; on the singular line fall back to the Euclidean radius.
    let speed = grushin_speed(center, dir, alpha);
    let mut t0 = if speed.is_finite() && speed > 0.0 { r / speed } else { r };
    let mut g0 = g(t0)?;
    let (mut lo, mut glo, mut hi, mut ghi);
    let mut guard = 0;
    if g0 < 0.0 {
        lo = t0;
        glo = g0;
        loop {
            t0 *= 2.0;
            g0 = g(t0)?;
            guard += 1;
            if g0 >= 0.0 || guard > 200 {
                break;
            }
            lo = t0;
            glo = g0;
        }
        hi = t0;
        ghi = g0;
    } else {
        hi = t0;
        ghi = g0;
        loop {
            t0 *= 0.5;
            g0 = g(t0)?;
            guard += 1;
            if g0 < 0.0 || guard > 200 {
                break;
            }
            hi = t0;
            ghi = g0;
        }
        lo = t0;
        glo = g0;
    }
    let sample = |t: f64, gv: f64, evaluations: usize, flag: Option<String>| RaySample {
        angle,
        point: center + dir * t,
        distance: gv + r,
        evaluations,
        flag,
    };
    if !(glo < 0.0 && ghi >= 0.0) {
        return Ok(sample(hi, ghi, guard + 1, Some("could not bracket the sphere".into())));
    }

    // Illinois variant of regula falsi.
    let mut side = 0i8;
    for _ in 0..opts.max_iterations {
        let (best_t, best_g) = if glo.abs() < ghi.abs() { (lo, glo) } else { (hi, ghi) };
        if best_g.abs() <= tol {
            return Ok(sample(best_t, best_g, guard + 1, None));
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mut t = (lo * ghi - hi * glo) / (ghi - glo);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let gt = g(t)?;
        guard += 1;
        if gt < 0.0 {
            lo = t;
            glo = gt;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            ghi = gt;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    // Halved function values in the Illinois step are not true residuals; re-evaluate.
    let t = if glo.abs() < ghi.abs() { lo } else { hi };
    let gt = g(t)?;
    let flag = (gt.abs() > tol).then(|| format!("residual {:.3e} exceeds tolerance {:.3e}", gt.abs(), tol));
    Ok(sample(t, gt, guard + 2, flag))
}
