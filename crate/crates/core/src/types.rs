//! Basic value types shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The Grushin exponent. Always finite and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidAlpha(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Hölder exponent `1/(1+alpha)` of the metric along the singular line.
    #[inline]
    pub fn beta(self) -> f64 {
        1.0 / (1.0 + self.0)
    }

    /// Exponent of the conformal factor in the canonical chart, `alpha/(1+alpha)`.
    #[inline]
    pub fn chart_exponent(self) -> f64 {
        self.0 / (1.0 + self.0)
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Alpha::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn checked(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(Error::NonFinitePoint(x, y))
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    /// True when the point lies on the singular line `x = 0`.
    #[inline]
    pub fn on_singular_line(self) -> bool {
        self.x == 0.0
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// An ordered list of at least two vertices with strictly increasing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    vertices: Vec<Point>,
    params: Vec<f64>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>, params: Vec<f64>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidPolyline(format!("need at least 2 vertices, got {}", vertices.len())));
        }
        if vertices.len() != params.len() {
            return Err(Error::InvalidPolyline(format!("{} vertices but {} parameters", vertices.len(), params.len())));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinitePoint(p.x, p.y));
        }
        if params.iter().any(|t| !t.is_finite()) || params.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPolyline("parameters must be finite and strictly increasing".into()));
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::InvalidPolyline(format!("consecutive duplicate vertex at index {}", i + 1)));
        }
        Ok(Polyline { vertices, params })
    }

    /// Builds a polyline parametrized by vertex index over `[0, 1]`.
    pub fn from_vertices(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        let denom = n.saturating_sub(1).max(1) as f64;
        let params = (0..n).map(|i| i as f64 / denom).collect();
        Polyline::new(vertices, params)
    }

    /// Like [`Polyline::from_vertices`] but silently drops consecutive duplicates first.
    pub fn from_vertices_dedup(mut vertices: Vec<Point>) -> Result<Self> {
        vertices.dedup();
        Polyline::from_vertices(vertices)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Point {
        self.vertices[0]
    }

    pub fn last(&self) -> Point {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn euclidean_length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Polyline> {
        Polyline::new(self.vertices.iter().map(|&p| f(p)).collect(), self.params.clone())
    }
}

/// Which length element a computation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Euclidean,
    Grushin,
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "grushin" => Ok(Metric::Grushin),
            other => Err(Error::Parse(format!("unknown metric '{other}'"))),
        }
    }
}

/// Closed axis-aligned rectangle with positive side lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let ok = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) && x_max > x_min && y_max > y_min;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Rect { x_min, x_max, y_min, y_max })
    }

    /// Smallest rectangle containing all points, each side grown by `pad` times its length.
    pub fn hull<'a>(points: impl IntoIterator<Item = &'a Point>, pad: f64) -> Result<Self> {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        // A degenerate side is padded relative to the other one.
        let big = (x1 - x0).max(y1 - y0).max(1e-12);
        let wx = if x1 > x0 { x1 - x0 } else { big };
        let wy = if y1 > y0 { y1 - y0 } else { big };
        Rect::new(x0 - pad * wx, x1 + pad * wx, y0 - pad * wy, y1 + pad * wy)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}
