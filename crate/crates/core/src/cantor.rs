//! Curves through a Cantor set on the singular line built from transported geodesic arcs.

use serde::{Deserialize, Serialize};

use crate::distance::{grushin_distance, DistanceOptions, DistanceReport};
use crate::error::{Error, Result};
use crate::geometry::{canonical_phi_inverse, ChartMetric};
use crate::types::{Alpha, Point, Polyline};

pub const MAX_DEPTH: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorCurveSpec {
    pub l: f64,
    pub depth: usize,
    pub alpha: Alpha,
}

impl CantorCurveSpec {
    pub fn new(l: f64, depth: usize, alpha: Alpha) -> Result<Self> {
        if !(l > 0.0 && l < 0.5) {
            return Err(Error::InvalidArgument(format!("L must lie in (0, 1/2), got {l}")));
        }
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::DepthOutOfRange(depth));
        }
        Ok(CantorCurveSpec { l, depth, alpha })
    }

    /// Dimension `(1 + alpha) ln 2 / ln(1/L)` of the Cantor set in the Grushin metric.
    pub fn dimension(&self) -> f64 {
        (1.0 + self.alpha.value()) * 2f64.ln() / (1.0 / self.l).ln()
    }

    /// Ratio `2 L^(1/(1+alpha))` between consecutive level contributions.
    pub fn predicted_ratio(&self) -> f64 {
        2.0 * self.l.powf(self.alpha.beta())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemovedInterval {
    pub level: usize,
    pub a: f64,
    pub b: f64,
    pub arc_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVerdict {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorCurve {
    pub spec: CantorCurveSpec,
    pub dimension: f64,
    /// Length of the unit arc from `(0,0)` to `(0,1)`.
    pub unit_length: f64,
    pub intervals: Vec<RemovedInterval>,
    /// Total measured arc length contributed by each level, starting at level 1.
    pub level_contributions: Vec<f64>,
    pub ratios: Vec<f64>,
    pub predicted_ratio: f64,
    pub partial_length: f64,
    /// `sum_n 2^(n-1) (L^(n-1) (1-2L))^(1/(1+alpha)) C` up to the depth.
    pub predicted_partial_length: f64,
    pub verdict: SeriesVerdict,
    pub polyline: Polyline,
}

/// Builds the curve after computing the unit geodesic once.
pub fn cantor_curve(spec: &CantorCurveSpec, opts: &DistanceOptions) -> Result<CantorCurve> {
    let unit = grushin_distance(Point::new(0.0, 0.0), Point::new(0.0, 1.0), spec.alpha, opts)?;
    cantor_curve_from_geodesic(spec, &unit)
}

/// Builds the curve from a precomputed geodesic between `(0,0)` and `(0,1)`.
///
/// A Grushin dilation by `lambda` acts on the chart as the homothety by
/// `lambda^(1+alpha)`, so the arc over `[a, b]` is the unit chart path scaled by
/// `b - a` and shifted by `a`.
pub fn cantor_curve_from_geodesic(spec: &CantorCurveSpec, unit: &DistanceReport) -> Result<CantorCurve> {
    let spec = CantorCurveSpec::new(spec.l, spec.depth, spec.alpha)?;
    if unit.from != Point::new(0.0, 0.0) || unit.to != Point::new(0.0, 1.0) || unit.alpha != spec.alpha {
        return Err(Error::InvalidArgument("expected the unit geodesic from (0,0) to (0,1)".into()));
    }
    let cm = ChartMetric::new(spec.alpha);
    let l = spec.l;

    let mut components = vec![(0.0f64, 1.0f64)];
    let mut intervals = Vec::new();
    let mut contributions = Vec::with_capacity(spec.depth);
    let mut arcs: Vec<(f64, Vec<Point>)> = Vec::new();
    for level in 1..=spec.depth {
        let mut next = Vec::with_capacity(2 * components.len());
        let mut total = 0.0;
        for &(lo, hi) in &components {
            let len = hi - lo;
            let a = lo + len * l;
            let b = hi - len * l;
            let chart: Vec<Point> =
                unit.chart_path.iter().map(|p| Point::new(p.x * (b - a), a + p.y * (b - a))).collect();
            let arc_length = cm.polyline_length(&chart);
            total += arc_length;
            intervals.push(RemovedInterval { level, a, b, arc_length });
            arcs.push((a, chart));
            next.push((lo, a));
            next.push((b, hi));
        }
        contributions.push(total);
        components = next;
    }

    arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut verts = vec![Point::new(0.0, 0.0)];
    for (_, chart) in &arcs {
        verts.extend(chart.iter().map(|&c| canonical_phi_inverse(c, spec.alpha)));
    }
    verts.push(Point::new(0.0, 1.0));
    let polyline = Polyline::from_vertices_dedup(verts)?;

    let ratios: Vec<f64> = contributions.windows(2).map(|w| w[1] / w[0]).collect();
    let beta = spec.alpha.beta();
    let predicted_partial_length = (1..=spec.depth)
        .map(|n| 2f64.powi(n as i32 - 1) * (l.powi(n as i32 - 1) * (1.0 - 2.0 * l)).powf(beta) * unit.distance)
        .sum();
    let below_one = if ratios.is_empty() { spec.predicted_ratio() < 1.0 } else { ratios.iter().all(|&r| r < 1.0) };
    let verdict = if below_one { SeriesVerdict::Convergent } else { SeriesVerdict::Divergent };
    Ok(CantorCurve {
        spec,
        dimension: spec.dimension(),
        unit_length: unit.distance,
        partial_length: contributions.iter().sum(),
        level_contributions: contributions,
        ratios,
        predicted_ratio: spec.predicted_ratio(),
        predicted_partial_length,
        verdict,
        intervals,
        polyline,
    })
}
