use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::DensityGrid;
use crate::error::{Error, Result};
use crate::geometry::grushin_speed;
use crate::types::{Alpha, Metric, Polyline, Rect};

/// Midpoint samples per cell width used when discretizing line integrals.
const SAMPLES_PER_CELL: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFamily {
    pub label: String,
    pub curves: Vec<Polyline>,
}

impl CurveFamily {
    pub fn new(label: impl Into<String>, curves: Vec<Polyline>) -> Self {
        CurveFamily { label: label.into(), curves }
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Bounding box of every vertex, padded by `pad` of each side.
    pub fn hull(&self, pad: f64) -> Result<Rect> {
        if self.curves.is_empty() {
            return Err(Error::InvalidArgument("empty curve family".into()));
        }
        Rect::hull(self.curves.iter().flat_map(|c| c.vertices()), pad)
    }
}

/// Sparse constraint row: `∫_γ ρ ds ≈ ∑ coeffs[k] * ρ[cells[k]]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row {
    pub cells: Vec<u32>,
    pub coeffs: Vec<f64>,
}

/// Discretizes `ρ -> ∫_c ρ ds` on the grid. Pinned cells are left out since the
/// density vanishes there.
pub fn constraint_row(grid: &DensityGrid, c: &Polyline, metric: Metric, alpha: Alpha) -> Result<Row> {
    let h = grid.hx().min(grid.hy()) / SAMPLES_PER_CELL;
    let mut entries: Vec<(u32, f64)> = Vec::new();
    for (a, b) in c.segments() {
        for p in [a, b] {
            if !grid.bbox().contains(p) {
                return Err(Error::OutsideGrid(p.x, p.y));
            }
        }
        let d = b - a;
        let m = ((d.norm() / h).ceil() as usize).max(1);
        for k in 0..m {
            let p = a.lerp(b, (k as f64 + 0.5) / m as f64);
            let ds = match metric {
                Metric::Euclidean => d.norm(),
                Metric::Grushin => grushin_speed(p, d, alpha),
            } / m as f64;
            for (cell, w) in grid.stencil(p)? {
                if w == 0.0 || grid.is_pinned(cell) {
                    continue;
                }
                if !ds.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "infinite speed at ({}, {}) outside the pinned cells",
                        p.x, p.y
                    )));
                }
                entries.push((cell as u32, w * ds));
            }
        }
    }
    entries.sort_unstable_by_key(|e| e.0);
    let mut row = Row::default();
    for (cell, v) in entries {
        if row.cells.last() == Some(&cell) {
            *row.coeffs.last_mut().unwrap() += v;
        } else {
            row.cells.push(cell);
            row.coeffs.push(v);
        }
    }
    Ok(row)
}

/// `∫_c ρ ds` with bilinear interpolation of the grid values.
pub fn line_integral(rho: &DensityGrid, c: &Polyline, metric: Metric, alpha: Alpha) -> Result<f64> {
    let row = constraint_row(rho, c, metric, alpha)?;
    Ok(row.cells.iter().zip(&row.coeffs).map(|(&k, &a)| a * rho.values()[k as usize]).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModulusOptions {
    /// Stop when the largest KKT residual of a sweep falls below this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Multiplier on each dual step; 1 is the exact coordinate maximization.
    pub damping: f64,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        ModulusOptions { tol: 1e-6, max_sweeps: 100_000, damping: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub nx: usize,
    pub ny: usize,
    pub bbox: Rect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusResult {
    /// `∑ w ρ²` of the returned, admissible density.
    pub value: f64,
    pub density: DensityGrid,
    /// Largest constraint violation `max(0, 1 - ∫ρ)` before the final scaling.
    pub residual: f64,
    /// Largest KKT residual of the last sweep.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Factor applied in the final feasibility scaling.
    pub scale: f64,
    /// Smallest line integral after scaling (at least 1 up to rounding).
    pub min_line_integral: f64,
    pub curves: usize,
}

/// JSON summary of a [`ModulusResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusSummary {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub curves: usize,
    pub grid: GridInfo,
}

impl ModulusResult {
    pub fn summary(&self) -> ModulusSummary {
        ModulusSummary {
            value: self.value,
            residual: self.residual,
            iterations: self.iterations,
            converged: self.converged,
            curves: self.curves,
            grid: GridInfo { nx: self.density.nx(), ny: self.density.ny(), bbox: self.density.bbox() },
        }
    }
}

/// Discrete 2-modulus: minimizes `∑ w ρ²` subject to `∫_γ ρ ds >= 1` for every
/// curve, by Hildreth's dual coordinate ascent.
///
/// With `ρ = W⁻¹ Aᵀ λ` and `λ >= 0` the density is nonnegative automatically, so
/// only the dual sign constraints need projecting. The final density is scaled so
/// that the smallest line integral is exactly one; the value is therefore an upper
/// bound for the discrete modulus.
pub fn solve_modulus(
    family: &CurveFamily,
    template: &DensityGrid,
    metric: Metric,
    alpha: Alpha,
    opts: &ModulusOptions,
) -> Result<ModulusResult> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty curve family".into()));
    }
    let rows: Vec<Row> =
        family.curves.par_iter().map(|c| constraint_row(template, c, metric, alpha)).collect::<Result<_>>()?;
    let inv_w: Vec<f64> = template.weights().iter().map(|w| if w.is_finite() { 1.0 / w } else { 0.0 }).collect();
    let scaled: Vec<Vec<f64>> =
        rows.iter().map(|r| r.cells.iter().zip(&r.coeffs).map(|(&k, &a)| a * inv_w[k as usize]).collect()).collect();
    let mut diag = Vec::with_capacity(rows.len());
    for (i, (r, s)) in rows.iter().zip(&scaled).enumerate() {
        let d: f64 = r.coeffs.iter().zip(s).map(|(a, b)| a * b).sum();
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::DegenerateCurve(i));
        }
        diag.push(d);
    }

    let n = template.values().len();
    let mut rho = vec![0.0; n];
    let mut lambda = vec![0.0; rows.len()];
    let mut iterations = 0;
    let mut kkt = f64::INFINITY;
    while iterations < opts.max_sweeps {
        kkt = 0.0;
        for (i, r) in rows.iter().enumerate() {
            let dot: f64 = r.cells.iter().zip(&r.coeffs).map(|(&k, &a)| a * rho[k as usize]).sum();
            let step = (opts.damping * (1.0 - dot) / diag[i]).max(-lambda[i]);
            if step != 0.0 {
                lambda[i] += step;
                for (&k, &s) in r.cells.iter().zip(&scaled[i]) {
                    rho[k as usize] += step * s;
                }
            }
            kkt = f64::max(kkt, (step * diag[i]).abs());
        }
        iterations += 1;
        if kkt < opts.tol {
            break;
        }
    }

    let integrals: Vec<f64> =
        rows.iter().map(|r| r.cells.iter().zip(&r.coeffs).map(|(&k, &a)| a * rho[k as usize]).sum()).collect();
    let min_int = integrals.iter().copied().fold(f64::INFINITY, f64::min);
    let residual = (1.0 - min_int).max(0.0);
    if !(min_int > 0.0) {
        return Err(Error::InvalidArgument("dual ascent produced a zero density".into()));
    }
    let scale = 1.0 / min_int;
    rho.iter_mut().for_each(|v| *v = (*v * scale).max(0.0));
    let mut density = template.clone();
    density.set_values(rho)?;
    Ok(ModulusResult {
        value: density.energy(),
        density,
        residual,
        kkt_residual: kkt,
        iterations,
        converged: kkt < opts.tol,
        scale,
        min_line_integral: min_int * scale,
        curves: family.len(),
    })
}

/// Moduli at a coarse grid and at twice its resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub coarse: ModulusSummary,
    pub fine: ModulusSummary,
    /// `2 fine - coarse`, the first-order Richardson value; indicative only, since
    /// the discretization error of a sampled family need not be first order.
    pub extrapolated: f64,
}

pub fn solve_modulus_refined(
    family: &CurveFamily,
    bbox: Rect,
    nx: usize,
    ny: usize,
    metric: Metric,
    alpha: Alpha,
    opts: &ModulusOptions,
) -> Result<RefinementReport> {
    let coarse = DensityGrid::for_metric(bbox, (nx / 2).max(2), (ny / 2).max(2), metric, alpha)?;
    let fine = DensityGrid::for_metric(bbox, nx, ny, metric, alpha)?;
    let c = solve_modulus(family, &coarse, metric, alpha, opts)?.summary();
    let f = solve_modulus(family, &fine, metric, alpha, opts)?.summary();
    Ok(RefinementReport { extrapolated: 2.0 * f.value - c.value, coarse: c, fine: f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Point;

    fn segment(p: Point, q: Point) -> Polyline {
        Polyline::from_vertices(vec![p, q]).unwrap()
    }

    fn al(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    #[test]
    fn line_integrals_of_constant_density() {
        let bbox = Rect::new(0.0, 3.0, -1.0, 1.0).unwrap();
        let mut g = DensityGrid::euclidean(bbox, 30, 20).unwrap();
        g.fill(1.0).unwrap();
        let c = segment(Point::new(1.0, 0.0), Point::new(2.0, 0.0));
        assert!((line_integral(&g, &c, Metric::Euclidean, al(1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((line_integral(&g, &c, Metric::Grushin, al(1.0)).unwrap() - 1.0).abs() < 1e-12);
        let out = segment(Point::new(1.0, 0.0), Point::new(4.0, 0.0));
        assert!(matches!(line_integral(&g, &out, Metric::Euclidean, al(1.0)), Err(Error::OutsideGrid(..))));
    }

    #[test]
    fn radial_extremal_density_has_unit_integral() {
        let bbox = Rect::new(-2.2, 2.2, -2.2, 2.2).unwrap();
        let mut g = DensityGrid::euclidean(bbox, 400, 400).unwrap();
        let vals = (0..400)
            .flat_map(|j| (0..400).map(move |i| (i, j)))
            .map(|(i, j)| 1.0 / (g.cell_center(i, j).norm() * 2f64.ln()))
            .collect();
        g.set_values(vals).unwrap();
        let t = 0.3f64;
        let c = segment(Point::new(t.cos(), t.sin()), Point::new(2.0 * t.cos(), 2.0 * t.sin()));
        let v = line_integral(&g, &c, Metric::Euclidean, al(1.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn single_segment_modulus_shrinks_with_the_grid() {
        let fam = CurveFamily::new("one", vec![segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0))]);
        let bbox = fam.hull(0.1).unwrap();
        let solve = |n| {
            let g = DensityGrid::euclidean(bbox, n, n).unwrap();
            solve_modulus(&fam, &g, Metric::Euclidean, al(1.0), &Default::default()).unwrap().value
        };
        assert!(solve(256) < solve(64));
    }

    #[test]
    fn rejects_empty_family() {
        let g = DensityGrid::euclidean(Rect::new(0.0, 1.0, 0.0, 1.0).unwrap(), 4, 4).unwrap();
        let fam = CurveFamily::new("none", vec![]);
        assert!(solve_modulus(&fam, &g, Metric::Euclidean, al(1.0), &Default::default()).is_err());
    }
}
