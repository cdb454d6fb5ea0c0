//! Named verification suites. Each returns a report of measured values against
//! thresholds plus any data artifacts worth exporting; nothing here touches disk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cantor::{cantor_curve_from_geodesic, CantorCurveSpec, SeriesVerdict};
use crate::curves::{
    nonrectifiable_curve, nonrectifiable_image_curve, rectifiability_probe, sample_curve, CurveRecord, CurveSpec,
    Grading, ProbeOptions, Verdict,
};
use crate::distance::{grushin_distance, DistanceOptions};
use crate::error::{Error, Result};
use crate::geometry::{
    canonical_phi, canonical_phi_inverse, dilate, grushin_area, grushin_length, snowflake_distance_on_y,
};
use crate::modulus::{
    line_integral, nonrectifiable_family, nonrectifiable_modulus_bound, ring_curves_for_grid, ring_family,
    solve_modulus, DensityGrid, ModulusOptions, NonrectifiableOptions, RingCoords,
};
use crate::qc::{
    beltrami_coefficient, data_conversions, metric_dilatation, quasisymmetry_profile, DilatationOptions, MapKind,
    MapSpec, ProfileOptions,
};
use crate::snowflake::{box_counting_dimension, permutation_sweep};
use crate::sphere::SphereOptions;
use crate::transport::density_transport;
use crate::types::{Alpha, Metric, Point, Polyline, Rect};

pub const SCHEMA: u32 = 1;

pub const SUITES: &[&str] = &[
    "dilation",
    "snowflake",
    "phi-conformal",
    "section5",
    "cantor",
    "lemma31",
    "conformal-family",
    "h0-witness",
    "qc-data",
    "change-of-variables",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub alpha: Alpha,
    pub seed: u64,
    /// Density grid; suites fall back to their own default when unset.
    pub grid: Option<(usize, usize)>,
    /// Relative tolerance of the distance solver.
    pub tol: f64,
    pub triples: usize,
    pub n_dirs: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { alpha: Alpha::new(1.0).unwrap(), seed: 7, grid: None, tol: 1e-3, triples: 1000, n_dirs: 256 }
    }
}

impl SuiteConfig {
    fn distance(&self) -> DistanceOptions {
        DistanceOptions::with_tol(self.tol)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human readable acceptance condition, e.g. `<= 0.02`.
    pub condition: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check { name: name.into(), measured, condition: format!("<= {limit}"), pass: measured <= limit }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check { name: name.into(), measured, condition: format!(">= {limit}"), pass: measured >= limit }
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            condition: format!("in [{lo}, {hi}]"),
            pass: measured >= lo && measured <= hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub config: SuiteConfig,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub details: Value,
}

/// Exportable data produced by a suite; `name` is one of `density`, `curve`, `profile`.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
    pub artifacts: Vec<Artifact>,
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let (checks, details, artifacts) = match name {
        "dilation" => dilation(cfg)?,
        "snowflake" => snowflake(cfg)?,
        "phi-conformal" => phi_conformal(cfg)?,
        "section5" => nonrectifiable(cfg)?,
        "cantor" => cantor(cfg)?,
        "lemma31" => permutation_inequality(cfg)?,
        "conformal-family" => conformal_family(cfg)?,
        "h0-witness" => h0_witness(cfg)?,
        "qc-data" => qc_data(cfg)?,
        "change-of-variables" => change_of_variables(cfg)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite '{other}'; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteOutcome {
        report: SuiteReport { schema: SCHEMA, suite: name.to_string(), config: *cfg, pass, checks, details },
        artifacts,
    })
}

type SuiteResult = Result<(Vec<Check>, Value, Vec<Artifact>)>;

fn random_point(rng: &mut ChaCha8Rng, half: f64) -> Point {
    Point::new(rng.random_range(-half..=half), rng.random_range(-half..=half))
}

fn dilation(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    let opts = cfg.distance();
    let mut rng = cfg.rng();
    let pairs: Vec<(Point, Point)> =
        (0..100).map(|_| (random_point(&mut rng, 3.0), random_point(&mut rng, 3.0))).collect();
    let rows: Vec<(f64, f64, bool)> = pairs
        .par_iter()
        .map(|&(p, q)| -> Result<(f64, f64, bool)> {
            let base = grushin_distance(p, q, a, &opts)?;
            let mut worst: f64 = 0.0;
            let mut converged = base.converged;
            for lambda in [0.5, 2.0] {
                let r = grushin_distance(dilate(p, lambda, a)?, dilate(q, lambda, a)?, a, &opts)?;
                converged &= r.converged;
                worst = worst.max((r.distance - lambda * base.distance).abs() / (lambda * base.distance));
            }
            let back = grushin_distance(q, p, a, &opts)?.distance;
            Ok((worst, (back - base.distance).abs() / base.distance, converged))
        })
        .collect::<Result<_>>()?;
    let max_dil = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_sym = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let unconverged = rows.iter().filter(|r| !r.2).count();

    let triples: Vec<(Point, Point, Point)> = (0..20)
        .map(|_| (random_point(&mut rng, 3.0), random_point(&mut rng, 3.0), random_point(&mut rng, 3.0)))
        .collect();
    let excess = triples
        .par_iter()
        .map(|&(p, q, r)| -> Result<f64> {
            let d = |x, y| grushin_distance(x, y, a, &opts).map(|r| r.distance);
            let pr = d(p, r)?;
            Ok((pr - d(p, q)? - d(q, r)?) / pr)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        Check::at_most("dilation max relative error", max_dil, 0.02),
        Check::at_most("symmetry max relative difference", max_sym, cfg.tol),
        Check::at_most("triangle inequality max relative excess", excess, 3.0 * cfg.tol),
    ];
    Ok((checks, json!({ "pairs": 100, "lambdas": [0.5, 2.0], "unconverged_solves": unconverged }), vec![]))
}

fn snowflake(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    let opts = cfg.distance();
    let c = grushin_distance(Point::new(0.0, 0.0), Point::new(0.0, 1.0), a, &opts)?.distance;
    let mut checks = Vec::new();
    let mut ratios = Vec::new();
    for b in [0.25, 0.5, 2.0, 4.0] {
        let d = grushin_distance(Point::new(0.0, 0.0), Point::new(0.0, b), a, &opts)?.distance;
        let r = d / snowflake_distance_on_y(0.0, b, a, c);
        ratios.push(json!({ "b": b, "ratio": r }));
        checks.push(Check::within(format!("snowflake ratio b={b}"), r, 0.99, 1.01));
    }
    let dim = box_counting_dimension(a, c, 1.0, 2f64.powi(-10))?;
    checks.push(Check::at_most("box-counting dimension error", (dim - (1.0 + a.value())).abs(), 0.05));
    Ok((checks, json!({ "c": c, "ratios": ratios, "box_dimension": dim }), vec![]))
}

fn phi_conformal(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    let (nx, ny) = cfg.grid.unwrap_or((256, 256));
    let n = ring_curves_for_grid(nx);
    let mopts = ModulusOptions::default();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    for ratio in [2.0, 4.0] {
        let classical = std::f64::consts::TAU / f64::ln(ratio);
        let euc = ring_family(Point::default(), 1.0, ratio, n, RingCoords::Euclidean, a)?;
        let grid = DensityGrid::euclidean(euc.hull(0.1)?, nx, ny)?;
        let e = solve_modulus(&euc, &grid, Metric::Euclidean, a, &mopts)?;
        let pull = ring_family(Point::default(), 1.0, ratio, n, RingCoords::GrushinPullback, a)?;
        let ggrid = DensityGrid::grushin(pull.hull(0.1)?, nx, ny, a)?;
        let g = solve_modulus(&pull, &ggrid, Metric::Grushin, a, &mopts)?;
        checks.push(Check::at_most(
            format!("euclidean ring ratio {ratio} vs 2pi/ln r"),
            (e.value - classical).abs() / classical,
            0.05,
        ));
        checks.push(Check::at_most(
            format!("pullback vs euclidean ring ratio {ratio}"),
            (g.value - e.value).abs() / e.value,
            0.07,
        ));
        checks.push(Check::at_most(
            format!("unconverged solves ratio {ratio}"),
            (!e.converged as u8 + !g.converged as u8) as f64,
            0.0,
        ));
        rows.push(json!({
            "ratio": ratio, "classical": classical, "curves": n,
            "euclidean": e.summary(), "pullback": g.summary(),
        }));
        if artifacts.is_empty() {
            artifacts.push(Artifact { name: "density", value: serde_json::to_value(e.density.to_record()).unwrap() });
        }
    }
    Ok((checks, json!({ "rings": rows }), artifacts))
}

/// Sampled first curve of the nonrectifiable family, as exported by the section5 suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveExport {
    pub curve: CurveRecord,
    pub samples: usize,
    pub grading: Grading,
    pub polyline: Polyline,
}

fn nonrectifiable(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    if a.value() < 1.0 {
        return Err(Error::AlphaBelowOne(a.value()));
    }
    let opts = NonrectifiableOptions { grid: cfg.grid, ..Default::default() };
    let bound = nonrectifiable_modulus_bound(a, &opts)?;
    let fine = nonrectifiable_modulus_bound(a, &NonrectifiableOptions { grid: Some((512, 512)), ..opts })?;

    let probe = ProbeOptions::default();
    let verdicts: Vec<(bool, bool)> = (0..opts.curves)
        .into_par_iter()
        .map(|j| -> Result<(bool, bool)> {
            let shift = j as f64 / (opts.curves - 1) as f64;
            let g = rectifiability_probe(&nonrectifiable_curve(shift, a)?, a, Metric::Grushin, &probe)?;
            let h = rectifiability_probe(&nonrectifiable_image_curve(shift, a)?, a, Metric::Euclidean, &probe)?;
            Ok((g.verdict == Verdict::Divergent, matches!(h.verdict, Verdict::Convergent(_))))
        })
        .collect::<Result<_>>()?;
    let not_divergent = verdicts.iter().filter(|v| !v.0).count();
    let not_convergent = verdicts.iter().filter(|v| !v.1).count();

    let checks = vec![
        Check::at_most("integral grids relative difference", bound.integral_rel_diff, 1e-4),
        Check::at_least("family modulus times I", bound.family_modulus_estimate * bound.upper_integral, 0.9),
        Check::at_most("curves not Grushin-divergent", not_divergent as f64, 0.0),
        Check::at_most("images not Euclidean-convergent", not_convergent as f64, 0.0),
    ];
    let family = nonrectifiable_family(a, opts.curves, opts.samples)?;
    let (nx, ny) = (bound.modulus.grid.nx, bound.modulus.grid.ny);
    let grid = DensityGrid::euclidean(family.hull(0.1)?, nx, ny)?;
    let density = solve_modulus(&family, &grid, Metric::Euclidean, a, &opts.modulus)?.density;
    let record =
        CurveRecord { label: "gamma_tilde_0".into(), spec: CurveSpec::NonrectifiableImage { a: 0.0, alpha: a } };
    let polyline = sample_curve(&record.build()?, opts.samples, Grading::geometric())?;
    let curve = CurveExport { curve: record, samples: opts.samples, grading: Grading::geometric(), polyline };
    let details = json!({
        "bound": bound,
        "grid_512_estimate": fine.family_modulus_estimate,
        "grid_512_times_I": fine.family_modulus_estimate * fine.upper_integral,
    });
    let artifacts = vec![
        Artifact { name: "density", value: serde_json::to_value(density.to_record()).unwrap() },
        Artifact { name: "curve", value: serde_json::to_value(curve).unwrap() },
    ];
    Ok((checks, details, artifacts))
}

fn cantor(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    let unit = grushin_distance(Point::new(0.0, 0.0), Point::new(0.0, 1.0), a, &cfg.distance())?;
    let threshold = 0.5f64.powf(1.0 + a.value());
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for l in [0.2, 0.3] {
        let spec = CantorCurveSpec::new(l, 10, a)?;
        let c = cantor_curve_from_geodesic(&spec, &unit)?;
        // ratios[i] compares level i + 2 with level i + 1.
        let worst = c.ratios[1..].iter().map(|r| (r / c.predicted_ratio - 1.0).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("L={l} level ratios vs 2L^beta, levels 3-10"), worst, 0.01));
        let expected = if l < threshold { SeriesVerdict::Convergent } else { SeriesVerdict::Divergent };
        checks.push(Check::at_least(
            format!("L={l} verdict is {expected:?}"),
            (c.verdict == expected) as u8 as f64,
            1.0,
        ));
        rows.push(json!({
            "L": l, "s": c.dimension, "predicted_ratio": c.predicted_ratio, "ratios": c.ratios,
            "verdict": c.verdict, "partial_length": c.partial_length,
        }));
    }
    Ok((checks, json!({ "unit_length": unit.distance, "threshold_L": threshold, "cases": rows }), vec![]))
}

fn permutation_inequality(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    let c = grushin_distance(Point::new(0.0, 0.0), Point::new(0.0, 1.0), a, &cfg.distance())?.distance;
    let mut rng = cfg.rng();
    let mut min_ratio = f64::INFINITY;
    let mut checked = 0;
    let mut violations = 0;
    for _ in 0..7 {
        let mut pts: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
        pts.sort_by(f64::total_cmp);
        let s = permutation_sweep(&pts, a, c, 0, 0)?;
        min_ratio = min_ratio.min(s.min_ratio);
        checked += s.permutations;
        violations += (!s.all_hold) as usize;
    }
    let mut pts: Vec<f64> = (0..12).map(|_| rng.random_range(-5.0..5.0)).collect();
    pts.sort_by(f64::total_cmp);
    let sampled = permutation_sweep(&pts, a, c, 20_000, cfg.seed)?;
    let checks = vec![
        Check::at_most("exhaustive tuples with a violating permutation", violations as f64, 0.0),
        Check::at_least("sampled 12-point check holds", sampled.all_hold as u8 as f64, 1.0),
    ];
    let details = json!({ "c": c, "permutations_checked": checked, "min_rhs_over_lhs": min_ratio, "sampled": sampled });
    Ok((checks, details, vec![]))
}

fn conformal_family(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    let mut rng = cfg.rng();
    let radii = [1e-1, 1e-2, 1e-3];
    let opts = DilatationOptions {
        n_dirs: 16,
        sphere: SphereOptions { distance: cfg.distance(), rel_tol: cfg.tol, ..Default::default() },
    };
    let cases: Vec<(Point, MapKind)> = (0..20)
        .map(|_| {
            let p = random_point(&mut rng, 3.0);
            let kind =
                MapKind::gconf(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0), rng.random_bool(0.5)).unwrap();
            (p, kind)
        })
        .collect();
    let mut worst: f64 = 1.0;
    let mut lowest = f64::INFINITY;
    let mut failed = 0;
    let mut estimates = Vec::new();
    for (p, kind) in cases {
        let m = MapSpec::new(a, kind)?;
        for e in metric_dilatation(&m, p, &radii, Metric::Grushin, Metric::Grushin, &opts)? {
            worst = worst.max(e.ratio);
            lowest = lowest.min(e.ratio);
            failed += e.failed_rays;
            estimates.push(e);
        }
    }
    let mut closure: f64 = 0.0;
    for _ in 0..50 {
        let mut g =
            || MapKind::gconf(rng.random_range(0.2..5.0), rng.random_range(-3.0..3.0), rng.random_bool(0.5)).unwrap();
        let m = MapSpec::new(a, MapKind::Composition { maps: vec![g(), g()] })?;
        let s = m.simplify();
        if !matches!(s.kind, MapKind::GrushinConformal { .. }) {
            closure = f64::INFINITY;
        }
        let p = random_point(&mut rng, 3.0);
        let (u, v) = (m.eval(p), s.eval(p));
        closure = closure.max((u - v).norm() / u.norm().max(1.0));
    }
    let checks = vec![
        Check::within("largest dilatation estimate", worst, 1.0, 1.02),
        Check::at_least("smallest dilatation estimate", lowest, 1.0),
        Check::at_most("failed sphere rays", failed as f64, 0.0),
        Check::at_most("composition closure error", closure, 1e-12),
    ];
    Ok((checks, json!({ "radii": radii, "estimates": estimates }), vec![]))
}

fn h0_witness(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    let phi = MapSpec::new(a, MapKind::CanonicalPhi)?;
    let opts = DilatationOptions {
        n_dirs: cfg.n_dirs,
        sphere: SphereOptions { distance: cfg.distance(), rel_tol: cfg.tol, ..Default::default() },
    };
    let est = metric_dilatation(&phi, Point::default(), &[1.0, 0.5, 0.25], Metric::Grushin, Metric::Euclidean, &opts)?;
    let lo = est.iter().map(|e| e.ratio).fold(f64::INFINITY, f64::min);
    let hi = est.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let failed: usize = est.iter().map(|e| e.failed_rays).sum();
    let edges = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let region = Rect::new(-1.0, 1.0, -1.0, 1.0)?;
    let popts = ProfileOptions { triples: cfg.triples, seed: cfg.seed, distance: cfg.distance() };
    let profile = quasisymmetry_profile(&phi, &edges, Metric::Grushin, Metric::Euclidean, region, &popts)?;
    let envelope_max = profile.bins.iter().filter_map(|b| b.envelope).fold(0.0, f64::max);
    let empty_bins = profile.bins.iter().filter(|b| b.envelope.is_none()).count();
    let checks = vec![
        Check::at_least("smallest dilatation of phi at the origin", lo, 1.05),
        Check::at_most("radius spread of the dilatation", hi / lo - 1.0, 0.02),
        Check::at_most("failed sphere rays", failed as f64, 0.0),
        Check::at_most("quasisymmetry envelope maximum (finite)", envelope_max, 1e6),
    ];
    let details = json!({ "estimates": est, "empty_bins": empty_bins });
    let artifacts = vec![Artifact { name: "profile", value: serde_json::to_value(profile).unwrap() }];
    Ok((checks, details, artifacts))
}

fn qc_data(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    let mut checks = Vec::new();
    for k in [1.0f64, 2.0, 4.0] {
        let d = data_conversions(k)?;
        let c = 4f64.powf(k - 1.0) * (6.0 * (k + 1.0).powi(2) * (k - 1.0).sqrt()).exp();
        checks.push(Check::at_most(format!("C(K) relative error K={k}"), (d.c_k - c).abs() / c, 1e-12));
        checks.push(Check::at_most(format!("mu norm error K={k}"), (d.mu_norm - (k - 1.0) / (k + 1.0)).abs(), 0.0));
    }
    let stretch = MapSpec::parse("phi_inv . affine(2,0,0,1,0,0) . phi", a)?;
    let rotation = MapSpec::parse("phi_inv . affine(0.6,-0.8,0.8,0.6,0.3,-1) . phi", a)?;
    let mut rng = cfg.rng();
    let mut stretch_err: f64 = 0.0;
    let mut conformal_max: f64 = 0.0;
    for _ in 0..20 {
        let p = Point::new(
            rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            rng.random_range(-2.0..2.0),
        );
        stretch_err = stretch_err.max((beltrami_coefficient(&stretch, p, None)? * 3.0 - 1.0).abs());
        let g = MapSpec::new(
            a,
            MapKind::gconf(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0), rng.random_bool(0.5))?,
        )?;
        conformal_max = conformal_max.max(beltrami_coefficient(&g, p, None)?);
        conformal_max = conformal_max.max(beltrami_coefficient(&rotation, p, None)?);
    }
    checks.push(Check::at_most("Beltrami of conjugated diag(2,1), relative error vs 1/3", stretch_err, 0.01));
    checks.push(Check::at_most("Beltrami of conformal maps", conformal_max, 1e-4));
    Ok((checks, json!({}), vec![]))
}

fn change_of_variables(cfg: &SuiteConfig) -> SuiteResult {
    let a = cfg.alpha;
    let region = Rect::new(1.0, 2.0, 0.0, 1.0)?;
    let mut rho = DensityGrid::grushin(region, 128, 32, a)?;
    rho.fill(1.0)?;
    let moved = density_transport(&rho, a)?;
    let exact = grushin_area(&region, a);
    let mut checks =
        vec![Check::at_most("energy identity relative error", (moved.energy() - exact).abs() / exact, 0.02)];
    for (p, q) in [(Point::new(1.0, 0.0), Point::new(2.0, 0.0)), (Point::new(1.1, 0.1), Point::new(1.9, 0.9))] {
        let seg = Polyline::from_vertices(vec![p, q])?;
        let img = sample_image(p, q, a, 512)?;
        let lhs = line_integral(&rho, &seg, Metric::Grushin, a)?;
        let rhs = line_integral(&moved, &img, Metric::Euclidean, a)?;
        checks.push(Check::at_most(
            format!("line integral identity ({}, {}) -> ({}, {})", p.x, p.y, q.x, q.y),
            (lhs - rhs).abs() / lhs,
            0.02,
        ));
    }
    // Length pushforward: ∫ ds_alpha over c equals ∫ |x(u)|^(-alpha) ds_E over phi∘c.
    let mut worst: f64 = 0.0;
    for (p, q) in [(Point::new(0.5, -1.0), Point::new(2.0, 1.0)), (Point::new(-2.0, 0.0), Point::new(-0.3, 3.0))] {
        let seg = Polyline::from_vertices(vec![p, q])?;
        let lg = grushin_length(&seg, a)?;
        let img = sample_image(p, q, a, 4096)?;
        let le: f64 = img
            .segments()
            .map(|(u, w)| {
                let mid = canonical_phi_inverse(u.lerp(w, 0.5), a);
                u.dist(w) * mid.x.abs().powf(-a.value())
            })
            .sum();
        worst = worst.max((lg - le).abs() / lg);
    }
    checks.push(Check::at_most("pushforward length identity relative error", worst, 0.01));
    Ok((checks, json!({ "energy_exact": exact, "energy_transported": moved.energy() }), vec![]))
}

fn sample_image(p: Point, q: Point, alpha: Alpha, n: usize) -> Result<Polyline> {
    Polyline::from_vertices_dedup((0..=n).map(|i| canonical_phi(p.lerp(q, i as f64 / n as f64), alpha)).collect())
}
