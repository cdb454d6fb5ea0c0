//! Approximate Grushin distance by optimizing polylines in the canonical chart.
//!
//! In chart coordinates every straight segment has an exactly computable length,
//! including segments that cross or touch the image of the singular line. A path
//! is a chart polyline with fixed endpoints; all interior vertices move together
//! under damped Newton steps on the block-tridiagonal Hessian, with per-vertex
//! coordinate sweeps as the fallback near singular vertices, then refined by
//! midpoint insertion (which leaves the length unchanged, so the reported
//! length never increases from one level to the next).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{canonical_phi, canonical_phi_inverse, ChartMetric};
use crate::types::{Alpha, Point, Polyline};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceOptions {
    /// Relative tolerance on the length change between refinement levels.
    pub rel_tol: f64,
    pub min_vertices: usize,
    pub max_vertices: usize,
    /// Cap on relaxation sweeps at one refinement level.
    pub max_sweeps: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { rel_tol: 1e-3, min_vertices: 9, max_vertices: 129, max_sweeps: 400 }
    }
}

impl DistanceOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        DistanceOptions { rel_tol, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.min_vertices < 3 || self.max_vertices < self.min_vertices {
            return Err(Error::InvalidArgument("vertex limits must satisfy 3 <= min <= max".into()));
        }
        Ok(())
    }
}

/// Shape of the initial chart path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    Straight,
    BulgePositive,
    BulgeNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub vertices: usize,
    pub length: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub from: Point,
    pub to: Point,
    pub alpha: Alpha,
    pub distance: f64,
    /// False when the level-to-level change never fell below the tolerance.
    pub converged: bool,
    pub start: Start,
    pub history: Vec<LevelRecord>,
    /// Optimal path vertices in chart coordinates.
    pub chart_path: Vec<Point>,
}

impl DistanceReport {
    /// Path vertices pulled back to Grushin coordinates, parametrized by arc length.
    pub fn witness(&self) -> Result<Polyline> {
        let cm = ChartMetric::new(self.alpha);
        let mut verts = Vec::with_capacity(self.chart_path.len());
        let mut params = Vec::with_capacity(self.chart_path.len());
        let mut s = 0.0;
        for (i, &c) in self.chart_path.iter().enumerate() {
            if i > 0 {
                s += cm.segment_length(self.chart_path[i - 1], c);
            }
            verts.push(canonical_phi_inverse(c, self.alpha));
            params.push(s);
        }
        if self.distance > 0.0 {
            params.iter_mut().for_each(|t| *t /= self.distance);
        }
        Polyline::new(verts, params)
    }
}

/// Approximates `d_alpha(p, q)`.
pub fn grushin_distance(p: Point, q: Point, alpha: Alpha, opts: &DistanceOptions) -> Result<DistanceReport> {
    opts.validate()?;
    for z in [p, q] {
        if !z.is_finite() {
            return Err(Error::NonFinitePoint(z.x, z.y));
        }
    }
    let cm = ChartMetric::new(alpha);
    let (a, b) = (canonical_phi(p, alpha), canonical_phi(q, alpha));
    let report = |distance, converged, start, history, chart_path| DistanceReport {
        from: p,
        to: q,
        alpha,
        distance,
        converged,
        start,
        history,
        chart_path,
    };
    if p == q {
        return Ok(report(0.0, true, Start::Straight, Vec::new(), vec![a, b]));
    }
    if alpha.value() == 0.0 {
        let d = p.dist(q);
        let history = vec![LevelRecord { vertices: 2, length: d, sweeps: 0 }];
        return Ok(report(d, true, Start::Straight, history, vec![a, b]));
    }

    // Race the candidate starts through the coarse levels and keep the shortest.
    let race_to = 17.min(opts.max_vertices);
    let mut best: Option<Path> = None;
    for start in [Start::Straight, Start::BulgePositive, Start::BulgeNegative] {
        let mut path = Path::new(&cm, initial_path(a, b, start), start);
        if !path.length.is_finite() {
            continue;
        }
        loop {
            path.relax(&cm, opts);
            if path.v.len() >= race_to {
                break;
            }
            path.refine();
        }
        if best.as_ref().is_none_or(|b| path.length < b.length) {
            best = Some(path);
        }
    }
    let mut path = best.ok_or_else(|| Error::InvalidArgument("no start path has finite length".into()))?;

    let mut converged = false;
    loop {
        let n = path.v.len();
        if n >= opts.min_vertices && path.history.len() >= 2 {
            let prev = path.history[path.history.len() - 2].length;
            if prev - path.length <= opts.rel_tol * path.length {
                converged = true;
                break;
            }
        }
        if 2 * n - 1 > opts.max_vertices {
            break;
        }
        path.refine();
        path.relax(&cm, opts);
    }
    Ok(report(path.length, converged, path.start, path.history, path.v))
}

fn initial_path(a: Point, b: Point, start: Start) -> Vec<Point> {
    let d = b - a;
    let amp = match start {
        Start::Straight => 0.0,
        Start::BulgePositive => 0.5 * d.norm(),
        Start::BulgeNegative => -0.5 * d.norm(),
    };
    (0..5)
        .map(|i| {
            let s = i as f64 / 4.0;
            a + d * s + Point::new(4.0 * s * (1.0 - s) * amp, 0.0)
        })
        .collect()
}

struct Path {
    v: Vec<Point>,
    length: f64,
    start: Start,
    history: Vec<LevelRecord>,
}

impl Path {
    fn new(cm: &ChartMetric, v: Vec<Point>, start: Start) -> Self {
        let length = cm.polyline_length(&v);
        Path { v, length, start, history: Vec::new() }
    }

    fn refine(&mut self) {
        let mut out = Vec::with_capacity(2 * self.v.len() - 1);
        for w in self.v.windows(2) {
            out.push(w[0]);
            out.push(w[0].lerp(w[1], 0.5));
        }
        out.push(*self.v.last().unwrap());
        self.v = out;
    }

    fn relax(&mut self, cm: &ChartMetric, opts: &DistanceOptions) {
        let n = self.v.len();
        let sweep_tol = opts.rel_tol * 1e-3;
        let mut sweeps = 0;
        let mut mu = 1e-3;
        while sweeps < opts.max_sweeps {
            let before = self.length;
            sweeps += 1;
            match newton_step(cm, &self.v, before, &mut mu) {
                Some((v, len)) => {
                    self.v = v;
                    self.length = len;
                }
                None => {
                    // Singular vertices or a failed damped step: one coordinate sweep.
                    for i in (1..n - 1).chain((1..n - 1).rev()) {
                        relax_vertex(cm, &mut self.v, i);
                    }
                    self.length = cm.polyline_length(&self.v);
                }
            }
            if before - self.length <= sweep_tol * self.length {
                break;
            }
        }
        self.history.push(LevelRecord { vertices: n, length: self.length, sweeps });
    }
}

type Block = [[f64; 2]; 2];

fn block_inv(m: Block) -> Option<Block> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det > 0.0 && m[0][0] > 0.0 && det.is_finite()) {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn block_mul(a: Block, b: Block) -> Block {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn block_vec(a: Block, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn transpose(a: Block) -> Block {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Levenberg-Marquardt step on all interior vertices at once. The Hessian of a
/// polyline length is block tridiagonal; each segment contributes a 4x4 block
/// obtained by differencing the analytic gradient.
fn newton_step(cm: &ChartMetric, v: &[Point], length: f64, mu: &mut f64) -> Option<(Vec<Point>, f64)> {
    let n = v.len();
    let m = n - 2;
    let mut g = vec![[0.0; 2]; n];
    let mut diag = vec![[[0.0; 2]; 2]; n];
    let mut off = vec![[[0.0; 2]; 2]; n - 1];
    for s in 0..n - 1 {
        let (a, b) = (v[s], v[s + 1]);
        let (ga, gb) = cm.segment_grad(a, b);
        if !(ga.is_finite() && gb.is_finite()) {
            return None;
        }
        g[s][0] += ga.x;
        g[s][1] += ga.y;
        g[s + 1][0] += gb.x;
        g[s + 1][1] += gb.y;
        let h = 1e-6 * a.dist(b).max(1e-12);
        // Columns: derivative w.r.t. a.x, a.y, b.x, b.y of (ga, gb).
        let mut col = [[0.0; 4]; 4];
        for (k, d) in [(0, Point::new(h, 0.0)), (1, Point::new(0.0, h))] {
            let (pa, pb) = cm.segment_grad(a + d, b);
            let (ma, mb) = cm.segment_grad(a - d, b);
            col[k] = [
                (pa.x - ma.x) / (2.0 * h),
                (pa.y - ma.y) / (2.0 * h),
                (pb.x - mb.x) / (2.0 * h),
                (pb.y - mb.y) / (2.0 * h),
            ];
            let (pa, pb) = cm.segment_grad(a, b + d);
            let (ma, mb) = cm.segment_grad(a, b - d);
            col[k + 2] = [
                (pa.x - ma.x) / (2.0 * h),
                (pa.y - ma.y) / (2.0 * h),
                (pb.x - mb.x) / (2.0 * h),
                (pb.y - mb.y) / (2.0 * h),
            ];
        }
        let hs = |r: usize, c: usize| 0.5 * (col[c][r] + col[r][c]);
        for r in 0..2 {
            for c in 0..2 {
                diag[s][r][c] += hs(r, c);
                diag[s + 1][r][c] += hs(r + 2, c + 2);
                off[s][r][c] += hs(r, c + 2);
            }
        }
    }
    if diag.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return None;
    }
    let scale = (1..n - 1).map(|i| diag[i][0][0].abs() + diag[i][1][1].abs()).sum::<f64>() / (2 * m) as f64;

    for _ in 0..40 {
        let lambda = *mu * scale;
        // Block Thomas on interior blocks 1..n-1; off[i] couples i and i+1.
        let mut cinv: Vec<Block> = Vec::with_capacity(m);
        let mut upper: Vec<Block> = Vec::with_capacity(m);
        let mut rhs: Vec<[f64; 2]> = Vec::with_capacity(m);
        let mut ok = true;
        for i in 1..n - 1 {
            let mut d = diag[i];
            d[0][0] += lambda;
            d[1][1] += lambda;
            let mut r = [-g[i][0], -g[i][1]];
            if i > 1 {
                let l = transpose(off[i - 1]);
                let lu = block_mul(l, upper[i - 2]);
                let lr = block_vec(l, rhs[i - 2]);
                for a in 0..2 {
                    r[a] -= lr[a];
                    for b in 0..2 {
                        d[a][b] -= lu[a][b];
                    }
                }
            }
            let Some(di) = block_inv(d) else {
                ok = false;
                break;
            };
            cinv.push(di);
            upper.push(block_mul(di, off[i]));
            rhs.push(block_vec(di, r));
        }
        if ok {
            let mut x = vec![[0.0; 2]; m];
            for k in (0..m).rev() {
                x[k] = rhs[k];
                if k + 1 < m {
                    let u = block_vec(upper[k], x[k + 1]);
                    x[k][0] -= u[0];
                    x[k][1] -= u[1];
                }
            }
            let mut w = v.to_vec();
            for k in 0..m {
                w[k + 1] = v[k + 1] + Point::new(x[k][0], x[k][1]);
            }
            let len = cm.polyline_length(&w);
            if len < length {
                *mu = (*mu / 3.0).max(1e-12);
                return Some((w, len));
            }
        }
        *mu *= 10.0;
        if *mu > 1e12 {
            break;
        }
    }
    *mu = 1e-3;
    None
}

fn local_cost(cm: &ChartMetric, prev: Point, p: Point, next: Point) -> f64 {
    cm.segment_length(prev, p) + cm.segment_length(p, next)
}

fn local_grad(cm: &ChartMetric, prev: Point, p: Point, next: Point) -> Point {
    let (_, g1) = cm.segment_grad(prev, p);
    let (g2, _) = cm.segment_grad(p, next);
    g1 + g2
}

/// One damped Newton step for vertex `i` with its neighbours held fixed.
fn relax_vertex(cm: &ChartMetric, v: &mut [Point], i: usize) {
    let (prev, p, next) = (v[i - 1], v[i], v[i + 1]);
    let scale = prev.dist(next).max(1e-300);
    let f0 = local_cost(cm, prev, p, next);
    let g = local_grad(cm, prev, p, next);

    let step = if g.is_finite() {
        let h = 1e-6 * scale;
        let gx = (local_grad(cm, prev, p + Point::new(h, 0.0), next)
            - local_grad(cm, prev, p - Point::new(h, 0.0), next))
            * (0.5 / h);
        let gy = (local_grad(cm, prev, p + Point::new(0.0, h), next)
            - local_grad(cm, prev, p - Point::new(0.0, h), next))
            * (0.5 / h);
        let (hxx, hyy) = (gx.x, gy.y);
        let hxy = 0.5 * (gx.y + gy.x);
        let det = hxx * hyy - hxy * hxy;
        let newton = if det.is_finite() && det > 0.0 && hxx > 0.0 {
            Some(Point::new(-(hyy * g.x - hxy * g.y) / det, -(hxx * g.y - hxy * g.x) / det))
        } else {
            None
        };
        newton.unwrap_or_else(|| {
            let gn = g.norm();
            if gn > 0.0 {
                g * (-0.1 * scale / gn)
            } else {
                Point::default()
            }
        })
    } else {
        Point::default()
    };

    let cap = 0.5 * scale;
    let len = step.norm();
    let step = if len > cap { step * (cap / len) } else { step };
    if len > 0.0 {
        let mut t = 1.0;
        for _ in 0..30 {
            let q = p + step * t;
            if local_cost(cm, prev, q, next) < f0 {
                v[i] = q;
                return;
            }
            t *= 0.5;
        }
    }
    // Non-finite gradient (vertex on the singular line) or a failed line search:
    // fall back to a compass search.
    let mut r = 0.01 * scale;
    while r > 1e-9 * scale {
        for d in [Point::new(r, 0.0), Point::new(-r, 0.0), Point::new(0.0, r), Point::new(0.0, -r)] {
            let q = p + d;
            if local_cost(cm, prev, q, next) < f0 {
                v[i] = q;
                return;
            }
        }
        r *= 0.25;
    }
}

/// The unit constant `C(alpha) = d((0,0), (0,1))` of the snowflake on the singular line.
pub fn snowflake_constant(alpha: Alpha, opts: &DistanceOptions) -> Result<f64> {
    Ok(grushin_distance(Point::new(0.0, 0.0), Point::new(0.0, 1.0), alpha, opts)?.distance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    #[test]
    fn zero_distance_and_euclidean_case() {
        let p = Point::new(0.3, -1.0);
        let r = grushin_distance(p, p, al(1.0), &Default::default()).unwrap();
        assert_eq!(r.distance, 0.0);
        let q = Point::new(1.3, 2.0);
        let r = grushin_distance(p, q, al(0.0), &Default::default()).unwrap();
        assert!((r.distance - p.dist(q)).abs() < 1e-15);
    }

    #[test]
    fn horizontal_pair_is_a_straight_line() {
        // Horizontal segments are geodesic: the metric is at least |dx|.
        let r = grushin_distance(Point::new(-1.0, 0.5), Point::new(2.0, 0.5), al(2.0), &Default::default()).unwrap();
        assert!((r.distance - 3.0).abs() < 1e-9, "{}", r.distance);
        assert!(r.converged);
    }

    #[test]
    fn history_is_monotone() {
        let r = grushin_distance(Point::new(0.0, 0.0), Point::new(0.0, 1.0), al(1.0), &Default::default()).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1].length <= w[0].length * (1.0 + 1e-12));
        }
        assert!(r.witness().unwrap().len() == r.chart_path.len());
    }

    #[test]
    fn rejects_bad_input() {
        let o = DistanceOptions::default();
        assert!(grushin_distance(Point::new(f64::NAN, 0.0), Point::new(0.0, 0.0), al(1.0), &o).is_err());
        assert!(grushin_distance(Point::new(0.0, 0.0), Point::new(0.0, 1.0), al(1.0), &DistanceOptions::with_tol(0.0))
            .is_err());
    }
}
