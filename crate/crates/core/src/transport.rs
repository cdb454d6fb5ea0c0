//! Transport of Grushin densities to the canonical chart.

use crate::error::{Error, Result};
use crate::geometry::{canonical_phi, canonical_phi_inverse};
use crate::modulus::DensityGrid;
use crate::types::{Alpha, Point, Rect};

/// Resamples `rho` on the chart image grid as `rho~(u, v) = |x(u)|^(-alpha) rho(x(u), v)`,
/// so that `∫_γ rho ds_alpha = ∫_{phi∘γ} rho~ ds_E` and the Grushin energy of `rho`
/// equals the Euclidean energy of `rho~`.
///
/// `rho` must vanish on every cell that meets the singular line.
pub fn density_transport(rho: &DensityGrid, alpha: Alpha) -> Result<DensityGrid> {
    let b = rho.bbox();
    let (nx, ny) = (rho.nx(), rho.ny());
    let hx = rho.hx();
    for i in 0..nx {
        let (x0, x1) = (b.x_min + i as f64 * hx, b.x_min + (i + 1) as f64 * hx);
        let meets_line = x0 <= 0.0 && x1 >= 0.0;
        if meets_line && (0..ny).any(|j| rho.values()[rho.index(i, j)] != 0.0) {
            return Err(Error::DensityOnSingularLine(i));
        }
    }
    let lo = canonical_phi(Point::new(b.x_min, b.y_min), alpha);
    let hi = canonical_phi(Point::new(b.x_max, b.y_max), alpha);
    let target_box = Rect::new(lo.x, hi.x, lo.y, hi.y)?;
    let mut out = DensityGrid::euclidean(target_box, nx, ny)?;
    let a = alpha.value();
    let mut values = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = canonical_phi_inverse(out.cell_center(i, j), alpha).x;
            let si = (((x - b.x_min) / hx).floor().max(0.0) as usize).min(nx - 1);
            let v = rho.values()[rho.index(si, j)];
            values.push(if v == 0.0 || x == 0.0 { 0.0 } else { x.abs().powf(-a) * v });
        }
    }
    out.set_values(values)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::line_integral;
    use crate::types::{Metric, Polyline};

    #[test]
    fn zero_maps_to_zero() {
        let a = Alpha::new(1.0).unwrap();
        let g = DensityGrid::grushin(Rect::new(-1.0, 1.0, 0.0, 1.0).unwrap(), 8, 8, a).unwrap();
        let t = density_transport(&g, a).unwrap();
        assert!(t.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_density_on_singular_column() {
        let a = Alpha::new(0.5).unwrap();
        let mut g = DensityGrid::grushin(Rect::new(-1.0, 1.0, 0.0, 1.0).unwrap(), 4, 4, a).unwrap();
        g.fill(1.0).unwrap();
        assert!(matches!(density_transport(&g, a), Err(Error::DensityOnSingularLine(_))));
    }

    #[test]
    fn energy_and_line_integral_identities() {
        let a = Alpha::new(1.0).unwrap();
        let mut g = DensityGrid::grushin(Rect::new(1.0, 2.0, 0.0, 1.0).unwrap(), 64, 16, a).unwrap();
        g.fill(1.0).unwrap();
        let t = density_transport(&g, a).unwrap();
        assert!((g.energy() - 2f64.ln()).abs() < 1e-12);
        assert!((t.energy() - 2f64.ln()).abs() < 0.02 * 2f64.ln());
        let seg = Polyline::from_vertices(vec![Point::new(1.0, 0.0), Point::new(2.0, 0.0)]).unwrap();
        let img = seg.map(|p| canonical_phi(p, a)).unwrap();
        let lhs = line_integral(&g, &seg, Metric::Grushin, a).unwrap();
        let rhs = line_integral(&t, &img, Metric::Euclidean, a).unwrap();
        assert!((lhs - 1.0).abs() < 1e-12);
        assert!((rhs - 1.0).abs() < 0.02, "{rhs}");
    }
}
