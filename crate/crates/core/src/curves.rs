//! Parametric curves, graded sampling and the rectifiability probe.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{canonical_phi, grushin_length};
use crate::types::{Alpha, Metric, Point, Polyline};

/// Parameter interval; `open_start` excludes the left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub start: f64,
    pub end: f64,
    pub open_start: bool,
}

impl Domain {
    pub fn closed(start: f64, end: f64) -> Self {
        Domain { start, end, open_start: false }
    }

    pub fn open_left(start: f64, end: f64) -> Self {
        Domain { start, end, open_start: true }
    }

    pub fn span(&self) -> f64 {
        self.end - self.start
    }
}

pub type Evaluator = Arc<dyn Fn(f64) -> Point + Send + Sync>;

/// A curve given by an evaluator on a parameter domain, plus a vertical shift.
///
/// The shift is kept apart from the evaluator because vertical translation is an
/// isometry of both metrics: length computations use the unshifted curve and so
/// keep full floating point resolution near the left endpoint.
#[derive(Clone)]
pub struct ParametricCurve {
    label: String,
    domain: Domain,
    eval: Evaluator,
    shift: f64,
}

impl fmt::Debug for ParametricCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricCurve")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("shift", &self.shift)
            .finish()
    }
}

impl ParametricCurve {
    /// Checks the domain and that the evaluator is finite at dyadic parameters.
    pub fn new(label: impl Into<String>, domain: Domain, eval: Evaluator) -> Result<Self> {
        if !(domain.start.is_finite() && domain.end.is_finite() && domain.end > domain.start) {
            return Err(Error::InvalidArgument(format!("empty curve domain [{}, {}]", domain.start, domain.end)));
        }
        for k in 0..=32 {
            let t = domain.start + domain.span() * k as f64 / 32.0;
            if k == 0 && domain.open_start {
                continue;
            }
            let p = eval(t);
            if !p.is_finite() {
                return Err(Error::InvalidArgument(format!("evaluator is not finite at t = {t}")));
            }
        }
        Ok(ParametricCurve { label: label.into(), domain, eval, shift: 0.0 })
    }

    pub fn segment(p: Point, q: Point) -> Result<Self> {
        ParametricCurve::new(
            format!("segment ({}, {}) -> ({}, {})", p.x, p.y, q.x, q.y),
            Domain::closed(0.0, 1.0),
            Arc::new(move |t| p.lerp(q, t)),
        )
    }

    pub fn with_vertical_shift(mut self, a: f64) -> Self {
        self.shift = a;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn vertical_shift(&self) -> f64 {
        self.shift
    }

    pub fn point(&self, t: f64) -> Point {
        let p = (self.eval)(t);
        Point::new(p.x, p.y + self.shift)
    }

    fn base_point(&self, t: f64) -> Point {
        (self.eval)(t)
    }
}

/// Serializable description of the curve families the toolkit knows how to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "parameters", rename_all = "kebab-case")]
pub enum CurveSpec {
    /// `t -> (t, -t^alpha / ln t + a)` on `(0, 1/2]`.
    NonrectifiableGrushin {
        a: f64,
        alpha: Alpha,
    },
    /// Its image under the canonical chart.
    NonrectifiableImage {
        a: f64,
        alpha: Alpha,
    },
    Segment {
        from: Point,
        to: Point,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub label: String,
    #[serde(flatten)]
    pub spec: CurveSpec,
}

impl CurveRecord {
    pub fn build(&self) -> Result<ParametricCurve> {
        let c = match self.spec {
            CurveSpec::NonrectifiableGrushin { a, alpha } => nonrectifiable_curve(a, alpha)?,
            CurveSpec::NonrectifiableImage { a, alpha } => nonrectifiable_image_curve(a, alpha)?,
            CurveSpec::Segment { from, to } => ParametricCurve::segment(from, to)?,
        };
        Ok(ParametricCurve { label: self.label.clone(), ..c })
    }
}

fn nonrectifiable_profile(t: f64, alpha: f64) -> f64 {
    -t.powf(alpha) / t.ln()
}

/// `gamma_a(t) = (t, -t^alpha / ln t + a)` for `t` in `(0, 1/2]`: rectifiable in
/// the Euclidean plane but of infinite Grushin length.
pub fn nonrectifiable_curve(a: f64, alpha: Alpha) -> Result<ParametricCurve> {
    let al = alpha.value();
    if al <= 0.0 {
        return Err(Error::InvalidArgument("the family needs alpha > 0".into()));
    }
    Ok(ParametricCurve::new(
        format!("gamma_a(a={a}, alpha={al})"),
        Domain::open_left(0.0, 0.5),
        Arc::new(move |t| Point::new(t, nonrectifiable_profile(t, al))),
    )?
    .with_vertical_shift(a))
}

/// The chart image `phi(gamma_a)`: `t -> (t^(1+alpha)/(1+alpha), -t^alpha / ln t + a)`.
pub fn nonrectifiable_image_curve(a: f64, alpha: Alpha) -> Result<ParametricCurve> {
    let al = alpha.value();
    if al <= 0.0 {
        return Err(Error::InvalidArgument("the family needs alpha > 0".into()));
    }
    Ok(ParametricCurve::new(
        format!("gamma_tilde_a(a={a}, alpha={al})"),
        Domain::open_left(0.0, 0.5),
        Arc::new(move |t| canonical_phi(Point::new(t, nonrectifiable_profile(t, al)), alpha)),
    )?
    .with_vertical_shift(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Grading {
    Uniform,
    /// Offsets from the left endpoint grow geometrically by `1/ratio` from `floor`
    /// until they reach the uniform spacing of the remaining points.
    GeometricLeft {
        ratio: f64,
        floor: f64,
    },
}

impl Grading {
    pub fn geometric() -> Self {
        Grading::GeometricLeft { ratio: 0.5, floor: 2f64.powi(-40) }
    }
}

/// Sample parameters for `n` points on `domain`.
pub fn sample_parameters(domain: Domain, n: usize, grading: Grading) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    let span = domain.span();
    match grading {
        Grading::Uniform => {
            if domain.open_start {
                // Skip the excluded endpoint: n points ending at the right end.
                Ok((1..=n).map(|i| domain.start + span * i as f64 / n as f64).collect())
            } else {
                Ok((0..n).map(|i| domain.start + span * i as f64 / (n - 1) as f64).collect())
            }
        }
        Grading::GeometricLeft { ratio, floor } => {
            if !(ratio > 0.0 && ratio < 1.0) || !(floor > 0.0 && floor < span) {
                return Err(Error::InvalidArgument(format!(
                    "geometric grading needs 0 < ratio < 1 and 0 < floor < span, got ratio {ratio}, floor {floor}"
                )));
            }
            let mut out = Vec::with_capacity(n);
            let m = if domain.open_start {
                n
            } else {
                out.push(domain.start);
                n - 1
            };
            let growth = 1.0 / ratio;
            // g geometric offsets floor * growth^k, then uniform steps to the end.
            let mut g = 1;
            while g + 1 < m {
                let last = floor * growth.powi(g as i32);
                let h = (span - last) / (m - g - 1) as f64;
                if last - floor * growth.powi(g as i32 - 1) > h || last >= span {
                    break;
                }
                g += 1;
            }
            let last = floor * growth.powi(g as i32 - 1);
            for k in 0..g {
                out.push(domain.start + floor * growth.powi(k as i32));
            }
            let rest = m - g;
            let h = (span - last) / rest as f64;
            for k in 1..=rest {
                out.push(domain.start + last + h * k as f64);
            }
            if let Some(end) = out.last_mut() {
                *end = domain.end;
            }
            Ok(out)
        }
    }
}

/// Polyline through the curve at `n` graded parameters; consecutive duplicate
/// vertices (possible after rounding) are dropped.
pub fn sample_curve(c: &ParametricCurve, n: usize, grading: Grading) -> Result<Polyline> {
    sample_with(c, n, grading, true)
}

fn sample_with(c: &ParametricCurve, n: usize, grading: Grading, shifted: bool) -> Result<Polyline> {
    let ts = sample_parameters(c.domain, n, grading)?;
    let mut verts = Vec::with_capacity(ts.len());
    let mut params = Vec::with_capacity(ts.len());
    for t in ts {
        let p = if shifted { c.point(t) } else { c.base_point(t) };
        if !p.is_finite() {
            return Err(Error::NonFinitePoint(p.x, p.y));
        }
        if verts.last() == Some(&p) {
            continue;
        }
        verts.push(p);
        params.push(t);
    }
    Polyline::new(verts, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "length", rename_all = "kebab-case")]
pub enum Verdict {
    Convergent(f64),
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeLevel {
    pub samples: usize,
    /// Smallest parameter offset from the left endpoint (open domains only).
    pub floor: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub label: String,
    pub metric: Metric,
    pub verdict: Verdict,
    pub levels: Vec<ProbeLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub k_min: u32,
    pub k_max: u32,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { k_min: 6, k_max: 16 }
    }
}

/// Exponent of the sampling floor `2^-E_k` at refinement level `k`.
///
/// The floor deepens with the level: divergence at an open endpoint can be as slow
/// as `ln ln(1/floor)`, and a fixed floor would make every sample sequence look
/// Cauchy.
fn floor_exponent(k: u32) -> f64 {
    40.0 * 10f64.powf((k as f64 - 6.0) / 10.0)
}

/// Measures lengths of refined samples with `2^k + 1` points and classifies the sequence.
pub fn rectifiability_probe(
    c: &ParametricCurve,
    alpha: Alpha,
    metric: Metric,
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if opts.k_min < 1 || opts.k_max < opts.k_min + 3 || opts.k_max > 24 {
        return Err(Error::InvalidArgument("probe levels must satisfy 1 <= k_min, k_min + 3 <= k_max <= 24".into()));
    }
    let mut levels = Vec::new();
    for k in opts.k_min..=opts.k_max {
        let n = (1usize << k) + 1;
        let (grading, floor) = if c.domain.open_start {
            let floor = 2f64.powf(-floor_exponent(k)).max(f64::MIN_POSITIVE).min(0.25 * c.domain.span());
            (Grading::GeometricLeft { ratio: 0.5, floor }, floor)
        } else {
            (Grading::Uniform, 0.0)
        };
        let line = sample_with(c, n, grading, false)?;
        let length = match metric {
            Metric::Euclidean => line.euclidean_length(),
            Metric::Grushin => grushin_length(&line, alpha)?,
        };
        levels.push(ProbeLevel { samples: line.len(), floor, length });
        if length == f64::INFINITY {
            break;
        }
    }
    Ok(ProbeReport { label: c.label.clone(), metric, verdict: classify(&levels), levels })
}

fn classify(levels: &[ProbeLevel]) -> Verdict {
    let l: Vec<f64> = levels.iter().map(|v| v.length).collect();
    if l.last() == Some(&f64::INFINITY) {
        return Verdict::Divergent;
    }
    let rel = |i: usize| (l[i] - l[i - 1]) / l[i - 1].abs().max(f64::MIN_POSITIVE);
    let n = l.len();
    if n >= 5 && (n - 4..n).all(|i| rel(i) > 0.02) {
        return Verdict::Divergent;
    }
    if n >= 4 && (n - 3..n).all(|i| rel(i).abs() < 1e-3) {
        return Verdict::Convergent(l[n - 1]);
    }
    Verdict::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    #[test]
    fn nonrectifiable_curve_formula() {
        let c = nonrectifiable_curve(0.0, al(1.0)).unwrap();
        let p = c.point(0.5);
        assert_eq!(p.x, 0.5);
        assert!((p.y - 0.721_347_520_444_481_7).abs() < 1e-15);
        let c1 = nonrectifiable_curve(1.0, al(1.0)).unwrap();
        assert_eq!(c1.point(0.25).y, c.point(0.25).y + 1.0);
        assert!(nonrectifiable_curve(0.0, al(0.0)).is_err());
    }

    #[test]
    fn image_curve_is_phi_of_grushin_curve() {
        let a = al(1.7);
        let g = nonrectifiable_curve(0.3, a).unwrap();
        let h = nonrectifiable_image_curve(0.3, a).unwrap();
        for k in 1..=20 {
            let t = 0.5 * k as f64 / 20.0;
            let p = canonical_phi(g.point(t), a);
            let q = h.point(t);
            assert_eq!(p, q);
        }
    }

    #[test]
    fn uniform_sample_matches_formula() {
        let c = nonrectifiable_image_curve(0.0, al(1.0)).unwrap();
        let c = ParametricCurve { domain: Domain::closed(0.1, 0.5), ..c };
        let line = sample_curve(&c, 5, Grading::Uniform).unwrap();
        for (p, &t) in line.vertices().iter().zip(line.params()) {
            assert!((p.x - t * t / 2.0).abs() < 1e-15);
            assert!((p.y + t / t.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_grading_is_finer_at_left() {
        let d = Domain::open_left(0.0, 0.5);
        let u = sample_parameters(d, 65, Grading::Uniform).unwrap();
        let g = sample_parameters(d, 65, Grading::geometric()).unwrap();
        assert_eq!(g.len(), 65);
        assert!(g[0] < u[0]);
        assert_eq!(g[0], 2f64.powi(-40));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*g.last().unwrap(), 0.5);
        let closed = sample_parameters(Domain::closed(0.0, 1.0), 9, Grading::geometric()).unwrap();
        assert_eq!(closed.len(), 9);
        assert_eq!(closed[0], 0.0);
    }

    #[test]
    fn two_point_segment() {
        let c = ParametricCurve::segment(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
        let line = sample_curve(&c, 2, Grading::Uniform).unwrap();
        assert_eq!(line.len(), 2);
    }

    #[test]
    fn curve_record_json_shape() {
        let rec = CurveRecord { label: "g0".into(), spec: CurveSpec::NonrectifiableImage { a: 0.0, alpha: al(1.0) } };
        let v: serde_json::Value = serde_json::to_value(&rec).unwrap();
        assert_eq!(v["label"], "g0");
        assert_eq!(v["family"], "nonrectifiable-image");
        assert_eq!(v["parameters"]["alpha"], 1.0);
        let back: CurveRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.build().unwrap().label(), "g0");
    }

    #[test]
    fn probe_segment_converges_to_endpoint_formula() {
        let c = ParametricCurve::segment(Point::new(1.0, 0.0), Point::new(1.0, 2.0)).unwrap();
        let r = rectifiability_probe(&c, al(1.0), Metric::Grushin, &ProbeOptions { k_min: 2, k_max: 8 }).unwrap();
        match r.verdict {
            Verdict::Convergent(l) => assert!((l - 2.0).abs() < 1e-12),
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn probe_classifies_the_nonrectifiable_family() {
        let a = al(1.0);
        let g = nonrectifiable_curve(0.5, a).unwrap();
        let r = rectifiability_probe(&g, a, Metric::Grushin, &ProbeOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Divergent, "{:?}", r.levels);
        let h = nonrectifiable_image_curve(0.5, a).unwrap();
        let r = rectifiability_probe(&h, a, Metric::Euclidean, &ProbeOptions::default()).unwrap();
        assert!(matches!(r.verdict, Verdict::Convergent(_)), "{:?}", r.levels);
    }
}
