use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{canonical_phi, canonical_phi_inverse};
use crate::types::{Alpha, Point};

/// A planar homeomorphism built from the canonical chart, the conformal self-maps
/// `(x, y) -> (±λx, ±λ^(1+α) y + a)`, affine maps and compositions of those.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapKind {
    CanonicalPhi,
    CanonicalPhiInverse,
    GrushinConformal {
        lambda: f64,
        a: f64,
        positive: bool,
    },
    EuclideanAffine {
        m: [[f64; 2]; 2],
        b: [f64; 2],
    },
    /// Applied right to left.
    Composition {
        maps: Vec<MapKind>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub alpha: Alpha,
    #[serde(flatten)]
    pub kind: MapKind,
}

impl MapKind {
    pub fn identity() -> Self {
        MapKind::EuclideanAffine { m: [[1.0, 0.0], [0.0, 1.0]], b: [0.0, 0.0] }
    }

    pub fn gconf(lambda: f64, a: f64, positive: bool) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite() && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("gconf needs lambda > 0 and finite a, got {lambda}, {a}")));
        }
        Ok(MapKind::GrushinConformal { lambda, a, positive })
    }

    fn validate(&self) -> Result<()> {
        match self {
            MapKind::GrushinConformal { lambda, a, positive } => MapKind::gconf(*lambda, *a, *positive).map(|_| ()),
            MapKind::EuclideanAffine { m, b } => {
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if !(det != 0.0 && det.is_finite()) || !b.iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidArgument("affine map must be finite and invertible".into()));
                }
                Ok(())
            }
            MapKind::Composition { maps } => {
                if maps.is_empty() {
                    return Err(Error::InvalidArgument("empty composition".into()));
                }
                maps.iter().try_for_each(MapKind::validate)
            }
            _ => Ok(()),
        }
    }

    fn eval(&self, p: Point, alpha: Alpha) -> Point {
        match self {
            MapKind::CanonicalPhi => canonical_phi(p, alpha),
            MapKind::CanonicalPhiInverse => canonical_phi_inverse(p, alpha),
            MapKind::GrushinConformal { lambda, a, positive } => {
                let s = if *positive { 1.0 } else { -1.0 };
                Point::new(s * lambda * p.x, s * lambda.powf(1.0 + alpha.value()) * p.y + a)
            }
            MapKind::EuclideanAffine { m, b } => {
                Point::new(m[0][0] * p.x + m[0][1] * p.y + b[0], m[1][0] * p.x + m[1][1] * p.y + b[1])
            }
            MapKind::Composition { maps } => maps.iter().rev().fold(p, |q, f| f.eval(q, alpha)),
        }
    }
}

impl MapSpec {
    pub fn new(alpha: Alpha, kind: MapKind) -> Result<Self> {
        kind.validate()?;
        Ok(MapSpec { alpha, kind })
    }

    pub fn identity(alpha: Alpha) -> Self {
        MapSpec { alpha, kind: MapKind::identity() }
    }

    /// Parses the compact text form, e.g. `phi . gconf(l=2,a=0,s=++) . phi_inv` or
    /// `affine(2,0,0,1,0,0)`; terms are separated by `.` and composed right to left.
    pub fn parse(text: &str, alpha: Alpha) -> Result<Self> {
        let mut terms = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        for (i, ch) in text.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                '.' if depth == 0 => {
                    terms.push(&text[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
            if depth < 0 {
                return Err(Error::Parse(format!("unbalanced ')' in '{text}'")));
            }
        }
        if depth != 0 {
            return Err(Error::Parse(format!("unbalanced '(' in '{text}'")));
        }
        terms.push(&text[start..]);
        let mut maps = terms.into_iter().map(parse_term).collect::<Result<Vec<_>>>()?;
        let kind = if maps.len() == 1 { maps.pop().unwrap() } else { MapKind::Composition { maps } };
        MapSpec::new(alpha, kind)
    }

    pub fn eval(&self, p: Point) -> Point {
        self.kind.eval(p, self.alpha)
    }

    /// Flattens compositions and merges neighbouring conformal maps, neighbouring
    /// affine maps and adjacent chart/inverse pairs.
    pub fn simplify(&self) -> MapSpec {
        let mut flat = Vec::new();
        flatten(&self.kind, &mut flat);
        let a1 = 1.0 + self.alpha.value();
        let mut out: Vec<MapKind> = Vec::new();
        for g in flat {
            let merged = match (out.last(), &g) {
                (
                    Some(MapKind::GrushinConformal { lambda: l1, a: a1_, positive: p1 }),
                    MapKind::GrushinConformal { lambda: l2, a: a2, positive: p2 },
                ) => {
                    let s1 = if *p1 { 1.0 } else { -1.0 };
                    Some(Some(MapKind::GrushinConformal {
                        lambda: l1 * l2,
                        a: s1 * l1.powf(a1) * a2 + a1_,
                        positive: p1 == p2,
                    }))
                }
                (Some(MapKind::EuclideanAffine { m: m1, b: b1 }), MapKind::EuclideanAffine { m: m2, b: b2 }) => {
                    let mut m = [[0.0; 2]; 2];
                    for (r, row) in m.iter_mut().enumerate() {
                        for (c, v) in row.iter_mut().enumerate() {
                            *v = m1[r][0] * m2[0][c] + m1[r][1] * m2[1][c];
                        }
                    }
                    let b = [m1[0][0] * b2[0] + m1[0][1] * b2[1] + b1[0], m1[1][0] * b2[0] + m1[1][1] * b2[1] + b1[1]];
                    Some(Some(MapKind::EuclideanAffine { m, b }))
                }
                (Some(MapKind::CanonicalPhi), MapKind::CanonicalPhiInverse)
                | (Some(MapKind::CanonicalPhiInverse), MapKind::CanonicalPhi) => Some(None),
                _ => None,
            };
            match merged {
                Some(replacement) => {
                    out.pop();
                    out.extend(replacement);
                }
                None => out.push(g),
            }
        }
        let kind = match out.len() {
            0 => MapKind::identity(),
            1 => out.pop().unwrap(),
            _ => MapKind::Composition { maps: out },
        };
        MapSpec { alpha: self.alpha, kind }
    }
}

fn flatten(k: &MapKind, out: &mut Vec<MapKind>) {
    match k {
        MapKind::Composition { maps } => maps.iter().for_each(|m| flatten(m, out)),
        other => out.push(other.clone()),
    }
}

fn parse_term(raw: &str) -> Result<MapKind> {
    let t = raw.trim();
    let (name, args) = match t.find('(') {
        Some(i) if t.ends_with(')') => (t[..i].trim(), Some(&t[i + 1..t.len() - 1])),
        Some(_) => return Err(Error::Parse(format!("malformed term '{t}'"))),
        None => (t, None),
    };
    let num =
        |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{}' in '{t}'", s.trim())));
    match (name, args) {
        ("phi", None) => Ok(MapKind::CanonicalPhi),
        ("phi_inv", None) => Ok(MapKind::CanonicalPhiInverse),
        ("id", None) => Ok(MapKind::identity()),
        ("gconf", Some(args)) => {
            let (mut lambda, mut a, mut positive) = (None, 0.0, true);
            for kv in args.split(',') {
                let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value in '{t}'")))?;
                match k.trim() {
                    "l" => lambda = Some(num(v)?),
                    "a" => a = num(v)?,
                    "s" => {
                        positive = match v.trim() {
                            "++" => true,
                            "--" => false,
                            other => {
                                return Err(Error::Parse(format!("signs must be ++ or --, got '{other}'")));
                            }
                        }
                    }
                    other => return Err(Error::Parse(format!("unknown gconf key '{other}'"))),
                }
            }
            let lambda = lambda.ok_or_else(|| Error::Parse(format!("gconf needs l= in '{t}'")))?;
            MapKind::gconf(lambda, a, positive).map_err(|e| Error::Parse(e.to_string()))
        }
        ("affine", Some(args)) => {
            let v = args.split(',').map(num).collect::<Result<Vec<_>>>()?;
            if v.len() != 6 {
                return Err(Error::Parse(format!("affine takes 6 numbers, got {}", v.len())));
            }
            Ok(MapKind::EuclideanAffine { m: [[v[0], v[1]], [v[2], v[3]]], b: [v[4], v[5]] })
        }
        _ => Err(Error::Parse(format!("unknown map term '{t}'"))),
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::CanonicalPhi => write!(f, "phi"),
            MapKind::CanonicalPhiInverse => write!(f, "phi_inv"),
            MapKind::GrushinConformal { lambda, a, positive } => {
                write!(f, "gconf(l={lambda},a={a},s={})", if *positive { "++" } else { "--" })
            }
            MapKind::EuclideanAffine { m, b } => {
                write!(f, "affine({},{},{},{},{},{})", m[0][0], m[0][1], m[1][0], m[1][1], b[0], b[1])
            }
            MapKind::Composition { maps } => {
                for (i, m) in maps.iter().enumerate() {
                    if i > 0 {
                        write!(f, " . ")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}
