use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::map::MapSpec;
use crate::distance::{grushin_distance, DistanceOptions};
use crate::error::{Error, Result};
use crate::geometry::canonical_phi;
use crate::sphere::{grushin_sphere_sample, SphereOptions};
use crate::types::{Alpha, Metric, Point, Rect};

fn distance(metric: Metric, p: Point, q: Point, alpha: Alpha, opts: &DistanceOptions) -> Result<f64> {
    match metric {
        Metric::Euclidean => Ok(p.dist(q)),
        Metric::Grushin => Ok(grushin_distance(p, q, alpha, opts)?.distance),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DilatationOptions {
    pub n_dirs: usize,
    pub sphere: SphereOptions,
}

impl Default for DilatationOptions {
    fn default() -> Self {
        DilatationOptions { n_dirs: 16, sphere: SphereOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilatationEstimate {
    pub point: Point,
    pub radius: f64,
    /// `max / min` of the image distances over the sampled sphere.
    pub ratio: f64,
    pub max: f64,
    pub min: f64,
    pub samples: usize,
    pub failed_rays: usize,
}

/// Sphere-ratio estimates of the metric dilatation of `m` at `p`, one per radius.
/// Radii must be positive and strictly decreasing; the last estimate whose sphere
/// sampled cleanly stands in for the limit.
pub fn metric_dilatation(
    m: &MapSpec,
    p: Point,
    radii: &[f64],
    source: Metric,
    target: Metric,
    opts: &DilatationOptions,
) -> Result<Vec<DilatationEstimate>> {
    if opts.n_dirs < 16 {
        return Err(Error::InvalidArgument(format!("need at least 16 directions, got {}", opts.n_dirs)));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument("radii must be positive and strictly decreasing".into()));
    }
    let alpha = m.alpha;
    let fp = m.eval(p);
    let dopts = &opts.sphere.distance;
    radii
        .iter()
        .map(|&r| {
            let (points, failed) = match source {
                Metric::Grushin => {
                    let s = grushin_sphere_sample(p, r, opts.n_dirs, alpha, &opts.sphere)?;
                    let failed = s.failed_rays();
                    (s.boundary_points, failed)
                }
                Metric::Euclidean => {
                    let pts = (0..opts.n_dirs)
                        .map(|k| {
                            let t = std::f64::consts::TAU * k as f64 / opts.n_dirs as f64;
                            p + Point::new(t.cos(), t.sin()) * r
                        })
                        .collect();
                    (pts, 0)
                }
            };
            if points.is_empty() {
                return Err(Error::RayFailed { ray: 0, reason: "every ray failed".into() });
            }
            let images: Vec<f64> =
                points.par_iter().map(|&y| distance(target, fp, m.eval(y), alpha, dopts)).collect::<Result<_>>()?;
            let max = images.iter().copied().fold(0.0, f64::max);
            let min = images.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(DilatationEstimate {
                point: p,
                radius: r,
                ratio: max / min,
                max,
                min,
                samples: images.len(),
                failed_rays: failed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaBin {
    pub t_lo: f64,
    pub t_hi: f64,
    pub count: usize,
    /// Largest observed `d'(fx, fy) / d'(fx, fz)`; `None` for an empty bin.
    pub envelope: Option<f64>,
    pub t_at_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasisymmetryProfile {
    pub map: String,
    pub triples: usize,
    pub seed: u64,
    pub resampled: usize,
    pub bins: Vec<EtaBin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub triples: usize,
    pub seed: u64,
    pub distance: DistanceOptions,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { triples: 1000, seed: 0x5eed, distance: DistanceOptions::default() }
    }
}

/// Empirical lower envelope of the quasisymmetry control function: random triples
/// `(x, y, z)` in `region` are binned by `t = d(x,y)/d(x,z)` and the largest image
/// ratio per bin is kept. `t_edges` are increasing bin boundaries. Triple `k` draws
/// from its own stream of the root seed, so the result does not depend on scheduling.
pub fn quasisymmetry_profile(
    m: &MapSpec,
    t_edges: &[f64],
    source: Metric,
    target: Metric,
    region: Rect,
    opts: &ProfileOptions,
) -> Result<QuasisymmetryProfile> {
    if opts.triples < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 triples, got {}", opts.triples)));
    }
    if t_edges.len() < 2 || t_edges.windows(2).any(|w| !(w[1] > w[0])) || t_edges[0] < 0.0 {
        return Err(Error::InvalidArgument("bin edges must be nonnegative and increasing".into()));
    }
    let alpha = m.alpha;
    let samples: Vec<(f64, f64, usize)> = (0..opts.triples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let mut draw = || {
                Point::new(rng.random_range(region.x_min..=region.x_max), rng.random_range(region.y_min..=region.y_max))
            };
            let mut resampled = 0;
            loop {
                let (x, y, z) = (draw(), draw(), draw());
                if x == y || x == z {
                    resampled += 1;
                    continue;
                }
                let dxy = distance(source, x, y, alpha, &opts.distance)?;
                let dxz = distance(source, x, z, alpha, &opts.distance)?;
                let (fx, fy, fz) = (m.eval(x), m.eval(y), m.eval(z));
                let exy = distance(target, fx, fy, alpha, &opts.distance)?;
                let exz = distance(target, fx, fz, alpha, &opts.distance)?;
                if dxz == 0.0 || exz == 0.0 {
                    resampled += 1;
                    continue;
                }
                return Ok((dxy / dxz, exy / exz, resampled));
            }
        })
        .collect::<Result<_>>()?;
    let mut bins: Vec<EtaBin> = t_edges
        .windows(2)
        .map(|w| EtaBin { t_lo: w[0], t_hi: w[1], count: 0, envelope: None, t_at_max: None })
        .collect();
    for &(t, ratio, _) in &samples {
        if let Some(b) = bins.iter_mut().find(|b| t >= b.t_lo && t < b.t_hi) {
            b.count += 1;
            if b.envelope.is_none_or(|e| ratio > e) {
                b.envelope = Some(ratio);
                b.t_at_max = Some(t);
            }
        }
    }
    Ok(QuasisymmetryProfile {
        map: m.to_string(),
        triples: opts.triples,
        seed: opts.seed,
        resampled: samples.iter().map(|s| s.2).sum(),
        bins,
    })
}

/// Magnitude of the Beltrami quotient `D₊F / D₋F` of `F = phi ∘ f`, where
/// `D± = ∂/∂x ± i|x|^α ∂/∂y` act on `F` viewed as a complex function. `F` is
/// holomorphic in the chart exactly when the quotient vanishes.
///
/// The step defaults to `max(1e-5, 1e-3 |x|)`; the stencil must stay off the
/// singular line.
pub fn beltrami_coefficient(f: &MapSpec, p: Point, h: Option<f64>) -> Result<f64> {
    let alpha = f.alpha;
    let h = h.unwrap_or_else(|| f64::max(1e-5, 1e-3 * p.x.abs()));
    if !(h > 0.0) || p.x.abs() <= 2.0 * h {
        return Err(Error::InvalidArgument(format!("point ({}, {}) is within 2h of the singular line", p.x, p.y)));
    }
    let big_f = |q: Point| canonical_phi(f.eval(q), alpha);
    let dx = (big_f(p + Point::new(h, 0.0)) - big_f(p - Point::new(h, 0.0))) * (0.5 / h);
    let dy = (big_f(p + Point::new(0.0, h)) - big_f(p - Point::new(0.0, h))) * (0.5 / h);
    let w = p.x.abs().powf(alpha.value());
    let plus = Point::new(dx.x - w * dy.y, dx.y + w * dy.x).norm();
    let minus = Point::new(dx.x + w * dy.y, dx.y - w * dy.x).norm();
    if !(minus > 1e-12 * (plus + minus)) || !minus.is_finite() {
        return Err(Error::DegenerateBeltrami(p.x, p.y));
    }
    Ok(plus / minus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcData {
    pub k: f64,
    /// `C(K) = 4^(K-1) exp(6 (K+1)^2 sqrt(K-1))`; may overflow to infinity.
    pub c_k: f64,
    pub ln_c_k: f64,
    /// `(K-1)/(K+1)`.
    pub mu_norm: f64,
}

impl QcData {
    /// `eta_0(t) = C(K) max(t^K, t^(1/K))`.
    pub fn eta0(&self, t: f64) -> f64 {
        self.c_k * f64::max(t.powf(self.k), t.powf(1.0 / self.k))
    }
}

pub fn data_conversions(k: f64) -> Result<QcData> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("K must be finite and at least 1, got {k}")));
    }
    let ln_c_k = (k - 1.0) * 4f64.ln() + 6.0 * (k + 1.0).powi(2) * (k - 1.0).sqrt();
    Ok(QcData { k, c_k: ln_c_k.exp(), ln_c_k, mu_norm: (k - 1.0) / (k + 1.0) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub map: String,
    pub h_estimates: Vec<DilatationEstimate>,
    pub eta_samples: Vec<EtaBin>,
    pub k_geometric: Option<f64>,
    pub beltrami_sup: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qc::map::MapKind;

    fn al(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    #[test]
    fn affine_dilatation_is_two() {
        let m = MapSpec::parse("affine(2,0,0,1,0,0)", al(1.0)).unwrap();
        let est = metric_dilatation(
            &m,
            Point::default(),
            &[1.0, 0.5],
            Metric::Euclidean,
            Metric::Euclidean,
            &Default::default(),
        )
        .unwrap();
        for e in est {
            assert!((e.ratio - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dilatation_input_checks() {
        let m = MapSpec::identity(al(1.0));
        let o = DilatationOptions::default();
        assert!(metric_dilatation(&m, Point::default(), &[0.5, 1.0], Metric::Euclidean, Metric::Euclidean, &o).is_err());
        let few = DilatationOptions { n_dirs: 8, ..o };
        assert!(metric_dilatation(&m, Point::default(), &[1.0], Metric::Euclidean, Metric::Euclidean, &few).is_err());
    }

    #[test]
    fn similarity_profile_is_exact() {
        let m = MapSpec::parse("affine(1.2,-1.6,1.6,1.2,0.3,-2)", al(1.0)).unwrap();
        let region = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let edges = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 1e9];
        let prof = quasisymmetry_profile(&m, &edges, Metric::Euclidean, Metric::Euclidean, region, &Default::default())
            .unwrap();
        for b in &prof.bins {
            if let (Some(e), Some(t)) = (b.envelope, b.t_at_max) {
                assert!((e - t).abs() <= 1e-12 * t, "{e} vs {t}");
            }
        }
        let again =
            quasisymmetry_profile(&m, &edges, Metric::Euclidean, Metric::Euclidean, region, &Default::default())
                .unwrap();
        assert_eq!(prof, again);
    }

    #[test]
    fn beltrami_examples() {
        let a = al(1.0);
        let id = MapSpec::identity(a);
        assert!(beltrami_coefficient(&id, Point::new(0.7, 0.2), None).unwrap() < 1e-9);
        let g = MapSpec::new(a, MapKind::gconf(1.7, -0.4, false).unwrap()).unwrap();
        assert!(beltrami_coefficient(&g, Point::new(-0.5, 1.0), None).unwrap() < 1e-6);
        let s = MapSpec::parse("phi_inv . affine(2,0,0,1,0,0) . phi", a).unwrap();
        let mu = beltrami_coefficient(&s, Point::new(1.3, -0.2), None).unwrap();
        assert!((mu - 1.0 / 3.0).abs() < 1e-6, "{mu}");
        assert!(beltrami_coefficient(&id, Point::new(1e-6, 0.0), None).is_err());
    }

    #[test]
    fn conversions() {
        let d = data_conversions(1.0).unwrap();
        assert_eq!((d.c_k, d.mu_norm), (1.0, 0.0));
        assert_eq!(d.eta0(0.3), 0.3);
        let d = data_conversions(2.0).unwrap();
        assert!((d.mu_norm - 1.0 / 3.0).abs() < 1e-16);
        assert!((d.eta0(1.0) - d.c_k).abs() < 1e-12 * d.c_k);
        assert!(data_conversions(0.5).is_err());
    }
}
