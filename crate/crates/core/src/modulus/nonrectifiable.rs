//! Positive modulus of the family `{phi(gamma_a) : a in [0, 1]}` of chart images of
//! Grushin non-rectifiable curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::DensityGrid;
use super::solve::{solve_modulus, CurveFamily, ModulusOptions, ModulusSummary};
use crate::curves::{nonrectifiable_image_curve, sample_curve, Grading};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::types::{Alpha, Metric};

/// Geometric panel grading for the bound integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralGrid {
    pub ratio: f64,
    pub floor: f64,
}

impl IntegralGrid {
    pub const PRIMARY: IntegralGrid = IntegralGrid { ratio: 0.5, floor: 9.094_947_017_729_282e-13 };
    pub const SECONDARY: IntegralGrid = IntegralGrid { ratio: 1.0 / 3.0, floor: 4.856_935_749_618_861e-15 };
}

/// The integrand `t^alpha + t^(-alpha) (t^(alpha-1)/ln^2 t - alpha t^(alpha-1)/ln t)^2`,
/// written with `L = -ln t` to avoid cancellation.
pub fn nonrectifiable_integrand(t: f64, alpha: f64) -> f64 {
    let l = -t.ln();
    let q = 1.0 / (l * l) + alpha / l;
    t.powf(alpha) + t.powf(alpha - 2.0) * q * q
}

/// `I = ∫_0^{1/2} integrand dt`: adaptive Gauss–Kronrod panels on `[floor, 1/2]`
/// plus the tail `∫_0^floor`, which is evaluated from the expansion
/// `t^(alpha-2) (alpha^2/L^2 + 2 alpha/L^3 + 1/L^4)`.
///
/// The tail cannot be dropped: for `alpha = 1` it is about `1/ln(1/floor)`.
pub fn nonrectifiable_integral(alpha: Alpha, grid: IntegralGrid) -> Result<f64> {
    let a = alpha.value();
    if a < 1.0 {
        return Err(Error::AlphaBelowOne(a));
    }
    if !(grid.ratio > 0.0 && grid.ratio < 1.0 && grid.floor > 0.0 && grid.floor < 0.5) {
        return Err(Error::InvalidArgument("integral grid needs 0 < ratio < 1 and 0 < floor < 1/2".into()));
    }
    let mut total = 0.0;
    let mut hi = 0.5;
    while hi > grid.floor {
        let lo = (hi * grid.ratio).max(grid.floor);
        let q = quadrature::integrate(|t| nonrectifiable_integrand(t, a), lo, hi, 1e-13, 0.0, 200);
        if !q.converged {
            return Err(Error::QuadratureFailed { lo, hi, estimate: q.error });
        }
        total += q.value;
        hi = lo;
    }
    Ok(total + integral_tail(a, grid.floor)?)
}

fn integral_tail(a: f64, eps: f64) -> Result<f64> {
    let big_l = -eps.ln();
    let c = a - 1.0;
    // J_k = ∫_0^eps t^(a-2) L^(-k) dt = ∫_{L_eps}^∞ e^(-c s) s^(-k) ds.
    let j = |k: i32| -> Result<f64> {
        if c == 0.0 {
            return Ok(big_l.powi(1 - k) / (k - 1) as f64);
        }
        let mut sum = 0.0;
        let mut lo = big_l;
        loop {
            let hi = 2.0 * lo;
            let q = quadrature::integrate(|s| (-c * s).exp() * s.powi(-k), lo, hi, 1e-13, 0.0, 200);
            if !q.converged {
                return Err(Error::QuadratureFailed { lo, hi, estimate: q.error });
            }
            sum += q.value;
            if q.value <= 1e-17 * sum || hi > 1e300 {
                return Ok(sum);
            }
            lo = hi;
        }
    };
    let poly = eps.powf(a + 1.0) / (a + 1.0);
    Ok(poly + a * a * j(2)? + 2.0 * a * j(3)? + j(4)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NonrectifiableOptions {
    pub curves: usize,
    /// Samples per curve, graded towards the singular end.
    pub samples: usize,
    /// Grid override; by default the grid is matched to the curve spacing.
    pub grid: Option<(usize, usize)>,
    pub modulus: ModulusOptions,
}

impl Default for NonrectifiableOptions {
    fn default() -> Self {
        NonrectifiableOptions { curves: 33, samples: 257, grid: None, modulus: ModulusOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonrectifiableBound {
    pub alpha: Alpha,
    pub upper_integral: f64,
    /// `I` on the two panel gradings.
    pub integral_grids: [f64; 2],
    pub integral_rel_diff: f64,
    pub modulus_lower_bound: f64,
    pub family_modulus_estimate: f64,
    pub curves: usize,
    pub modulus: ModulusSummary,
}

/// The sampled family `phi(gamma_a)`, `a = j / (curves - 1)`.
pub fn nonrectifiable_family(alpha: Alpha, curves: usize, samples: usize) -> Result<CurveFamily> {
    if curves < 2 {
        return Err(Error::InvalidArgument("need at least 2 curves".into()));
    }
    let lines = (0..curves)
        .into_par_iter()
        .map(|j| {
            let a = j as f64 / (curves - 1) as f64;
            sample_curve(&nonrectifiable_image_curve(a, alpha)?, samples, Grading::geometric())
        })
        .collect::<Result<_>>()?;
    Ok(CurveFamily::new(format!("phi(gamma_a), {curves} curves"), lines))
}

/// Grid whose cell height is about the spacing between neighbouring curves.
pub fn matched_grid(family: &CurveFamily) -> Result<(usize, usize)> {
    let hull = family.hull(0.1)?;
    let spacing = 1.0 / (family.len() - 1) as f64;
    let n = ((hull.height() / spacing).round() as usize).max(16);
    Ok((n, n))
}

pub fn nonrectifiable_modulus_bound(alpha: Alpha, opts: &NonrectifiableOptions) -> Result<NonrectifiableBound> {
    if alpha.value() < 1.0 {
        return Err(Error::AlphaBelowOne(alpha.value()));
    }
    let i1 = nonrectifiable_integral(alpha, IntegralGrid::PRIMARY)?;
    let i2 = nonrectifiable_integral(alpha, IntegralGrid::SECONDARY)?;
    let family = nonrectifiable_family(alpha, opts.curves, opts.samples)?;
    let (nx, ny) = match opts.grid {
        Some(g) => g,
        None => matched_grid(&family)?,
    };
    let grid = DensityGrid::euclidean(family.hull(0.1)?, nx, ny)?;
    let result = solve_modulus(&family, &grid, Metric::Euclidean, alpha, &opts.modulus)?;
    Ok(NonrectifiableBound {
        alpha,
        upper_integral: i1,
        integral_grids: [i1, i2],
        integral_rel_diff: (i1 - i2).abs() / i1,
        modulus_lower_bound: 1.0 / i1,
        family_modulus_estimate: result.value,
        curves: family.len(),
        modulus: result.summary(),
    })
}
