use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::column_integral;
use crate::types::{Alpha, Metric, Point, Rect};

/// Piecewise data on a rectangular cell grid: a density value and a measure weight
/// per cell. Cells with infinite weight are pinned to density zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    bbox: Rect,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    weights: Vec<f64>,
}

/// Serializable form of a density: geometry and values, row-major with `x` fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub bbox: Rect,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl DensityGrid {
    /// Cell areas as weights.
    pub fn euclidean(bbox: Rect, nx: usize, ny: usize) -> Result<Self> {
        check_dims(nx, ny)?;
        let area = bbox.width() * bbox.height() / (nx * ny) as f64;
        Ok(DensityGrid { bbox, nx, ny, values: vec![0.0; nx * ny], weights: vec![area; nx * ny] })
    }

    /// Grushin cell measures `dy * ∫ |x|^(-alpha) dx`, infinite on cells meeting the
    /// singular line when `alpha >= 1`.
    pub fn grushin(bbox: Rect, nx: usize, ny: usize, alpha: Alpha) -> Result<Self> {
        check_dims(nx, ny)?;
        let hx = bbox.width() / nx as f64;
        let hy = bbox.height() / ny as f64;
        let columns: Vec<f64> = (0..nx)
            .map(|i| hy * column_integral(bbox.x_min + i as f64 * hx, bbox.x_min + (i + 1) as f64 * hx, alpha))
            .collect();
        let weights = (0..ny).flat_map(|_| columns.iter().copied()).collect();
        Ok(DensityGrid { bbox, nx, ny, values: vec![0.0; nx * ny], weights })
    }

    pub fn for_metric(bbox: Rect, nx: usize, ny: usize, metric: Metric, alpha: Alpha) -> Result<Self> {
        match metric {
            Metric::Euclidean => DensityGrid::euclidean(bbox, nx, ny),
            Metric::Grushin => DensityGrid::grushin(bbox, nx, ny, alpha),
        }
    }

    /// Same geometry and values with every weight multiplied by `c > 0`.
    pub fn with_scaled_weights(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight scale must be positive, got {c}")));
        }
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= c);
        Ok(out)
    }

    pub fn bbox(&self) -> Rect {
        self.bbox
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        self.bbox.width() / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.bbox.height() / self.ny as f64
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        Point::new(self.bbox.x_min + (i as f64 + 0.5) * self.hx(), self.bbox.y_min + (j as f64 + 0.5) * self.hy())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn is_pinned(&self, k: usize) -> bool {
        self.weights[k].is_infinite()
    }

    /// Columns containing at least one pinned cell.
    pub fn pinned_columns(&self) -> Vec<usize> {
        (0..self.nx).filter(|&i| self.is_pinned(self.index(i, 0))).collect()
    }

    /// Replaces the values; they must be finite, nonnegative and zero on pinned cells.
    pub fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::InvalidArgument(format!("expected {} values, got {}", self.values.len(), values.len())));
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "density value {} at cell {k} is not a finite nonnegative number",
                values[k]
            )));
        }
        if let Some(k) = (0..values.len()).find(|&k| self.is_pinned(k) && values[k] != 0.0) {
            return Err(Error::DensityOnSingularLine(k % self.nx));
        }
        self.values = values;
        Ok(())
    }

    /// Sets every non-pinned cell to `v`.
    pub fn fill(&mut self, v: f64) -> Result<()> {
        let values = (0..self.values.len()).map(|k| if self.is_pinned(k) { 0.0 } else { v }).collect();
        self.set_values(values)
    }

    /// `∑ w ρ²` over cells carrying density.
    pub fn energy(&self) -> f64 {
        self.values.iter().zip(&self.weights).filter(|(v, _)| **v != 0.0).map(|(v, w)| w * v * v).sum()
    }

    /// Bilinear interpolation weights between the four nearest cell centres, clamped
    /// at the boundary.
    pub fn stencil(&self, p: Point) -> Result<[(usize, f64); 4]> {
        let b = &self.bbox;
        let slack = 1e-9 * (b.width() + b.height());
        if !(p.x >= b.x_min - slack && p.x <= b.x_max + slack && p.y >= b.y_min - slack && p.y <= b.y_max + slack) {
            return Err(Error::OutsideGrid(p.x, p.y));
        }
        let (i, tx) = axis(p.x, b.x_min, self.hx(), self.nx);
        let (j, ty) = axis(p.y, b.y_min, self.hy(), self.ny);
        let (i1, j1) = ((i + 1).min(self.nx - 1), (j + 1).min(self.ny - 1));
        Ok([
            (self.index(i, j), (1.0 - tx) * (1.0 - ty)),
            (self.index(i1, j), tx * (1.0 - ty)),
            (self.index(i, j1), (1.0 - tx) * ty),
            (self.index(i1, j1), tx * ty),
        ])
    }

    pub fn sample(&self, p: Point) -> Result<f64> {
        Ok(self.stencil(p)?.iter().map(|&(k, w)| w * self.values[k]).sum())
    }

    pub fn to_record(&self) -> DensityRecord {
        DensityRecord { bbox: self.bbox, nx: self.nx, ny: self.ny, values: self.values.clone() }
    }
}

fn check_dims(nx: usize, ny: usize) -> Result<()> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument(format!("grid must be at least 2x2, got {nx}x{ny}")));
    }
    Ok(())
}

fn axis(x: f64, x0: f64, h: f64, n: usize) -> (usize, f64) {
    let f = ((x - x0) / h - 0.5).clamp(0.0, (n - 1) as f64);
    let i = (f.floor() as usize).min(n - 2);
    (i, f - i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grushin_weights_pin_the_singular_column() {
        let bbox = Rect::new(-1.0, 1.0, 0.0, 1.0).unwrap();
        let g = DensityGrid::grushin(bbox, 4, 2, Alpha::new(1.0).unwrap()).unwrap();
        assert_eq!(g.pinned_columns(), vec![1, 2]);
        let g = DensityGrid::grushin(bbox, 4, 2, Alpha::new(0.5).unwrap()).unwrap();
        assert!(g.pinned_columns().is_empty());
        let total: f64 = g.weights().iter().sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pinned_cells_reject_density() {
        let bbox = Rect::new(-1.0, 1.0, 0.0, 1.0).unwrap();
        let mut g = DensityGrid::grushin(bbox, 4, 2, Alpha::new(1.0).unwrap()).unwrap();
        assert_eq!(g.set_values(vec![1.0; 8]), Err(Error::DensityOnSingularLine(1)));
        g.fill(1.0).unwrap();
        assert_eq!(g.values()[1], 0.0);
    }

    #[test]
    fn bilinear_reproduces_linear_functions() {
        let bbox = Rect::new(0.0, 2.0, -1.0, 1.0).unwrap();
        let mut g = DensityGrid::euclidean(bbox, 8, 4).unwrap();
        let vals = (0..4)
            .flat_map(|j| (0..8).map(move |i| (i, j)))
            .map(|(i, j)| {
                let c = g.cell_center(i, j);
                1.0 + 2.0 * c.x + 0.5 * c.y
            })
            .collect();
        g.set_values(vals).unwrap();
        let p = Point::new(1.1, 0.2);
        assert!((g.sample(p).unwrap() - (1.0 + 2.2 + 0.1)).abs() < 1e-12);
        assert!(g.sample(Point::new(3.0, 0.0)).is_err());
    }
}
