//! Metric primitives: speed, lengths, the canonical chart and Grushin area.
//!
//! The Grushin length element is `sqrt(dx^2 + |x|^(-2 alpha) dy^2)`. The canonical
//! map `phi(x, y) = (|x|^alpha x / (1+alpha), y)` turns it into the conformal
//! metric `k |u|^(-e) |dw|` with `e = alpha/(1+alpha)` and `k = (1+alpha)^(-e)`,
//! which is what [`ChartMetric`] evaluates in closed form.

use crate::error::{Error, Result};
use crate::quadrature;
use crate::types::{Alpha, Point, Polyline, Rect};

/// Grushin norm of the tangent vector `v` based at `p`.
#[inline]
pub fn grushin_speed(p: Point, v: Point, alpha: Alpha) -> f64 {
    let a = alpha.value();
    if a == 0.0 {
        return v.norm();
    }
    if v.y == 0.0 {
        return v.x.abs();
    }
    let w = p.x.abs().powf(a);
    if w == 0.0 {
        return f64::INFINITY;
    }
    v.x.hypot(v.y / w)
}

/// Grushin length of a polyline; `f64::INFINITY` when some segment has infinite length.
pub fn grushin_length(curve: &Polyline, alpha: Alpha) -> Result<f64> {
    let mut total = 0.0;
    for (a, b) in curve.segments() {
        total += segment_length(a, b, alpha)?;
        if total == f64::INFINITY {
            break;
        }
    }
    Ok(total)
}

pub fn euclidean_length(curve: &Polyline) -> f64 {
    curve.euclidean_length()
}

/// Grushin length of the straight segment from `a` to `b`.
pub fn segment_length(a: Point, b: Point, alpha: Alpha) -> Result<f64> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let al = alpha.value();
    if dy == 0.0 || al == 0.0 {
        return Ok(dx.hypot(dy));
    }
    if dx == 0.0 {
        let w = a.x.abs().powf(al);
        return Ok(if w == 0.0 { f64::INFINITY } else { dy.abs() / w });
    }
    let m = dy / dx;
    let (xa, xb) = (a.x.abs(), b.x.abs());
    if a.x * b.x < 0.0 {
        Ok(radial_length(0.0, xa, m, al)? + radial_length(0.0, xb, m, al)?)
    } else {
        radial_length(xa.min(xb), xa.max(xb), m, al)
    }
}

/// `∫_lo^hi sqrt(1 + m^2 x^(-2 alpha)) dx` for `0 <= lo < hi`, integrated over dyadic
/// shells so that the quadrature never sees the singularity at zero.
fn radial_length(lo: f64, hi: f64, m: f64, alpha: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let m = m.abs();
    let f = |x: f64| (m * x.powf(-alpha)).hypot(1.0);
    if lo > 0.0 && hi <= 2.0 * lo {
        return shell(&f, lo, hi);
    }
    if lo == 0.0 && alpha >= 1.0 {
        // The integrand behaves like m x^(-alpha), which is not integrable at zero.
        return Ok(f64::INFINITY);
    }
    // Below this radius sqrt(1 + u^2) = u to double precision and the tail is exact.
    let exact_below = if lo == 0.0 { (m * 1e-8).powf(1.0 / alpha) } else { 0.0 };
    let floor = hi * 1e-15;
    let mut total = 0.0;
    let mut x = hi;
    loop {
        let next = 0.5 * x;
        if lo > 0.0 && next <= lo {
            total += shell(&f, lo, x)?;
            return Ok(total);
        }
        if lo == 0.0 && (x <= exact_below || x <= floor) {
            let tail = m * x.powf(1.0 - alpha) / (1.0 - alpha);
            return Ok(total + tail + if x <= exact_below { 0.0 } else { x });
        }
        total += shell(&f, next, x)?;
        x = next;
    }
}

fn shell(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let q = quadrature::integrate(f, a, b, 1e-12, 0.0, 200);
    if q.converged {
        Ok(q.value)
    } else {
        Err(Error::QuadratureFailed { lo: a, hi: b, estimate: q.error })
    }
}

/// The canonical chart `(x, y) -> (|x|^alpha x / (1+alpha), y)`.
#[inline]
pub fn canonical_phi(p: Point, alpha: Alpha) -> Point {
    let a1 = 1.0 + alpha.value();
    Point::new(p.x.signum() * p.x.abs().powf(a1) / a1, p.y)
}

#[inline]
pub fn canonical_phi_inverse(p: Point, alpha: Alpha) -> Point {
    let a1 = 1.0 + alpha.value();
    if p.x == 0.0 {
        return Point::new(0.0, p.y);
    }
    Point::new(p.x.signum() * (a1 * p.x.abs()).powf(1.0 / a1), p.y)
}

/// Grushin dilation `(x, y) -> (lambda x, lambda^(1+alpha) y)`.
pub fn dilate(p: Point, lambda: f64, alpha: Alpha) -> Result<Point> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {lambda}")));
    }
    Ok(Point::new(lambda * p.x, lambda.powf(1.0 + alpha.value()) * p.y))
}

/// Distance between `(0, b1)` and `(0, b2)` given the unit constant `c = d((0,0),(0,1))`.
#[inline]
pub fn snowflake_distance_on_y(b1: f64, b2: f64, alpha: Alpha, c: f64) -> f64 {
    c * (b1 - b2).abs().powf(alpha.beta())
}

/// `∫_{x0}^{x1} |x|^(-alpha) dx`, infinite when the integral diverges.
pub fn column_integral(x0: f64, x1: f64, alpha: Alpha) -> f64 {
    let a = alpha.value();
    let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
    if lo == hi {
        return 0.0;
    }
    if a == 0.0 {
        return hi - lo;
    }
    let touches_zero = lo <= 0.0 && hi >= 0.0;
    if touches_zero && a >= 1.0 {
        return f64::INFINITY;
    }
    if (a - 1.0).abs() < 1e-12 {
        // Same sign by the check above.
        return (hi.abs().ln() - lo.abs().ln()).abs();
    }
    let prim = |x: f64| x.signum() * x.abs().powf(1.0 - a) / (1.0 - a);
    (prim(hi) - prim(lo)).abs()
}

/// Grushin area `∫∫ |x|^(-alpha) dx dy` of a rectangle.
pub fn grushin_area(rect: &Rect, alpha: Alpha) -> f64 {
    rect.height() * column_integral(rect.x_min, rect.x_max, alpha)
}

/// The Grushin metric written in the canonical chart: `k |u|^(-e) |dw|`.
#[derive(Debug, Clone, Copy)]
pub struct ChartMetric {
    pub k: f64,
    pub e: f64,
}

impl ChartMetric {
    pub fn new(alpha: Alpha) -> Self {
        let e = alpha.chart_exponent();
        ChartMetric { k: (1.0 + alpha.value()).powf(-e), e }
    }

    #[inline]
    fn f(&self, u: f64) -> f64 {
        if self.e == 0.0 {
            1.0
        } else {
            u.abs().powf(-self.e)
        }
    }

    #[inline]
    fn prim(&self, u: f64) -> f64 {
        u.signum() * u.abs().powf(1.0 - self.e) / (1.0 - self.e)
    }

    /// Mean of `|u|^(-e)` over `[u0, u1]`.
    pub fn mean(&self, u0: f64, u1: f64) -> f64 {
        if self.e == 0.0 {
            return 1.0;
        }
        let h = u1 - u0;
        let m = 0.5 * (u0 + u1);
        if h == 0.0 {
            return self.f(m);
        }
        if h.abs() <= 1e-4 * m.abs() {
            let r = h / m;
            return self.f(m) * (1.0 + self.e * (self.e + 1.0) / 24.0 * r * r);
        }
        (self.prim(u1) - self.prim(u0)) / h
    }

    /// Partial derivatives of [`ChartMetric::mean`] with respect to `u0` and `u1`.
    pub fn mean_grad(&self, u0: f64, u1: f64) -> (f64, f64) {
        if self.e == 0.0 {
            return (0.0, 0.0);
        }
        let h = u1 - u0;
        let m = 0.5 * (u0 + u1);
        if h.abs() <= 1e-4 * m.abs() {
            let am = m.abs();
            let f1 = -self.e * m.signum() * am.powf(-self.e - 1.0);
            let f2 = self.e * (self.e + 1.0) * am.powf(-self.e - 2.0);
            return (0.5 * f1 - f2 * h / 12.0, 0.5 * f1 + f2 * h / 12.0);
        }
        let g = self.mean(u0, u1);
        ((g - self.f(u0)) / h, (self.f(u1) - g) / h)
    }

    /// Exact Grushin length of the chart segment `[a, b]`.
    #[inline]
    pub fn segment_length(&self, a: Point, b: Point) -> f64 {
        let d = (b - a).norm();
        if d == 0.0 {
            return 0.0;
        }
        self.k * d * self.mean(a.x, b.x)
    }

    /// Gradients of [`ChartMetric::segment_length`] with respect to `a` and `b`.
    pub fn segment_grad(&self, a: Point, b: Point) -> (Point, Point) {
        let diff = b - a;
        let d = diff.norm();
        if d == 0.0 {
            return (Point::default(), Point::default());
        }
        let dir = diff * (1.0 / d);
        let g = self.mean(a.x, b.x);
        let (g0, g1) = self.mean_grad(a.x, b.x);
        let ga = Point::new(-dir.x * g + d * g0, -dir.y * g) * self.k;
        let gb = Point::new(dir.x * g + d * g1, dir.y * g) * self.k;
        (ga, gb)
    }

    pub fn polyline_length(&self, chart_vertices: &[Point]) -> f64 {
        chart_vertices.windows(2).map(|w| self.segment_length(w[0], w[1])).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    #[test]
    fn speed_examples() {
        let a = al(1.0);
        assert_eq!(grushin_speed(Point::new(1.0, 0.0), Point::new(0.0, 1.0), a), 1.0);
        assert_eq!(grushin_speed(Point::new(0.0, 0.0), Point::new(1.0, 0.0), a), 1.0);
        assert_eq!(grushin_speed(Point::new(0.0, 0.0), Point::new(0.0, 1.0), a), f64::INFINITY);
        assert!((grushin_speed(Point::new(2.0, 5.0), Point::new(3.0, 8.0), a) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn vertical_segment_off_line() {
        let a = al(2.0);
        let l = segment_length(Point::new(0.5, 0.0), Point::new(0.5, 1.0), a).unwrap();
        assert!((l - 4.0).abs() < 1e-14);
    }

    #[test]
    fn horizontal_segment_is_euclidean() {
        let line = Polyline::from_vertices(vec![Point::new(-1.0, 3.0), Point::new(2.0, 3.0)]).unwrap();
        assert_eq!(grushin_length(&line, al(1.0)).unwrap(), 3.0);
    }

    #[test]
    fn oblique_segment_matches_closed_form() {
        // alpha = 1, x from 1 to 2, slope m: ∫ sqrt(1 + m^2/x^2) dx has an elementary antiderivative.
        let m: f64 = 3.0;
        let prim = |x: f64| {
            let s = (x * x + m * m).sqrt();
            s - m * ((m + s) / x).ln()
        };
        let exact = prim(2.0) - prim(1.0);
        let l = segment_length(Point::new(1.0, 0.0), Point::new(2.0, m), al(1.0)).unwrap();
        assert!((l - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn crossing_segment_small_alpha() {
        // alpha = 1/2 crossing the singular line: compare with a direct integral in the chart.
        let a = al(0.5);
        let p = Point::new(-0.3, 0.0);
        let q = Point::new(0.7, 0.4);
        let l = segment_length(p, q, a).unwrap();
        let m = 0.4 / 1.0;
        let f = |x: f64| (m * x.abs().powf(-0.5)).hypot(1.0);
        let left = quadrature::integrate(f, -0.3, 0.0, 1e-13, 0.0, 5000).value;
        let right = quadrature::integrate(f, 0.0, 0.7, 1e-13, 0.0, 5000).value;
        assert!((l - (left + right)).abs() < 1e-8, "{l} vs {}", left + right);
    }

    #[test]
    fn crossing_segment_diverges_for_alpha_at_least_one() {
        for a in [1.0, 2.0] {
            let l = segment_length(Point::new(-1.0, 0.0), Point::new(1.0, 1.0), al(a)).unwrap();
            assert_eq!(l, f64::INFINITY);
        }
    }

    #[test]
    fn phi_roundtrip() {
        let a = al(1.5);
        for p in [Point::new(0.3, 1.0), Point::new(-2.0, -1.0), Point::new(0.0, 4.0)] {
            let q = canonical_phi_inverse(canonical_phi(p, a), a);
            assert!((q.x - p.x).abs() < 1e-14 && q.y == p.y);
        }
    }

    #[test]
    fn area_of_unit_strip() {
        let r = Rect::new(1.0, 2.0, 0.0, 1.0).unwrap();
        assert!((grushin_area(&r, al(1.0)) - 2f64.ln()).abs() < 1e-15);
        let r = Rect::new(-1.0, 1.0, 0.0, 2.0).unwrap();
        assert!((grushin_area(&r, al(0.5)) - 8.0).abs() < 1e-14);
        assert_eq!(grushin_area(&r, al(1.0)), f64::INFINITY);
    }

    #[test]
    fn chart_segment_matches_grushin_segment() {
        // A chart segment off the singular line is a curve in Grushin coordinates; compare
        // its closed-form length with a direct quadrature of the pulled back curve.
        let a = al(2.0);
        let cm = ChartMetric::new(a);
        let (p, q) = (Point::new(0.2, 0.0), Point::new(1.1, 0.7));
        let closed = cm.segment_length(p, q);
        let speed = |t: f64| {
            let h = 1e-6;
            let x0 = canonical_phi_inverse(p.lerp(q, t - h), a);
            let x1 = canonical_phi_inverse(p.lerp(q, t + h), a);
            let x = canonical_phi_inverse(p.lerp(q, t), a);
            grushin_speed(x, (x1 - x0) * (0.5 / h), a)
        };
        let direct = quadrature::integrate(speed, 0.0, 1.0, 1e-11, 0.0, 500).value;
        assert!((closed - direct).abs() < 1e-7 * direct, "{closed} vs {direct}");
    }

    #[test]
    fn chart_gradient_matches_finite_differences() {
        let cm = ChartMetric::new(al(1.0));
        let cases = [
            (Point::new(0.3, 0.1), Point::new(-0.4, 0.9)),
            (Point::new(0.5, 0.0), Point::new(0.50001, 0.3)),
            (Point::new(-1.0, 2.0), Point::new(-0.2, -1.0)),
        ];
        for (a, b) in cases {
            let (ga, gb) = cm.segment_grad(a, b);
            let h = 1e-7;
            let fd = |da: Point, db: Point| {
                (cm.segment_length(a + da, b + db) - cm.segment_length(a - da, b - db)) / (2.0 * h)
            };
            let ex = Point::new(h, 0.0);
            let ey = Point::new(0.0, h);
            let z = Point::default();
            assert!((ga.x - fd(ex, z)).abs() < 1e-6);
            assert!((ga.y - fd(ey, z)).abs() < 1e-6);
            assert!((gb.x - fd(z, ex)).abs() < 1e-6);
            assert!((gb.y - fd(z, ey)).abs() < 1e-6);
        }
    }

    #[test]
    fn chart_mean_branches_agree() {
        let cm = ChartMetric::new(al(2.0));
        let u = 0.7;
        for h in [1e-3, 1.5e-4 * u, 0.9e-4 * u] {
            let taylor_or_exact = cm.mean(u, u + h);
            let exact = (cm.prim(u + h) - cm.prim(u)) / h;
            assert!((taylor_or_exact - exact).abs() < 1e-10, "h = {h}");
        }
    }
}
