use std::path::Path;
use std::process::{Command, Output};

use grushin_core::curves::{nonrectifiable_image_curve, sample_curve, Grading};
use grushin_core::Alpha;
use serde_json::Value;

fn grushin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grushin")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn horizontal_distance_is_euclidean() {
    let out = grushin(&["distance", "--alpha", "1", "--from", "1,0", "--to", "3,0"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert!((v["distance"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(v["polyline"].as_array().unwrap().len() >= 2);
    assert!(v["refinements"].is_array());
}

#[test]
fn zero_distance() {
    let out = grushin(&["distance", "--alpha", "1", "--from", "0,0", "--to", "0,0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["distance"].as_f64().unwrap(), 0.0);
}

#[test]
fn unit_vertical_distance_matches_sqrt_two_pi() {
    let out = grushin(&["distance", "--alpha", "1", "--from", "0,0", "--to", "0,1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let d = v["distance"].as_f64().unwrap();
    let exact = (2.0 * std::f64::consts::PI).sqrt();
    assert!(d >= exact - 1e-9 && d <= exact * 1.001, "{d}");
    let hist = v["refinements"].as_array().unwrap();
    assert!(hist.len() >= 3);
    assert!(hist.windows(2).all(|w| w[1]["length"].as_f64() <= w[0]["length"].as_f64()));
}

#[test]
fn unreachable_tolerance_is_flagged_with_exit_two() {
    let out = grushin(&["distance", "--alpha", "1", "--from", "0,0", "--to", "0,1", "--tol", "1e-9"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["converged"], false);
}

#[test]
fn malformed_input_exits_one() {
    for args in [
        &["distance", "--from", "0;0", "--to", "1,1"][..],
        &["distance", "--from", "0,0"][..],
        &["distance", "--alpha", "-1", "--from", "0,0", "--to", "1,1"][..],
        &["verify", "no-such-suite"][..],
        &["verify", "dilation", "--grid", "8x8"][..],
        &["verify", "section5", "--alpha", "0.5"][..],
        &["frobnicate"][..],
    ] {
        let out = grushin(args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn failing_check_exits_two() {
    // A 16x16 grid is far too coarse for the ring targets.
    let out = grushin(&["verify", "phi-conformal", "--grid", "16x16"]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
}

#[test]
fn verify_report_shape() {
    let out = grushin(&["verify", "cantor", "--alpha", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["suite"], "cantor");
    assert_eq!(v["pass"], true);
    for c in v["checks"].as_array().unwrap() {
        assert!(c["name"].is_string() && c["measured"].is_number() && c["condition"].is_string());
    }
}

#[test]
fn export_without_prior_result_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = grushin(&["export", "density", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let out = grushin(&["export", "curve"]);
    assert_eq!(code(&out), 1);
}

fn run_and_export(dir: &Path) {
    let d = dir.to_str().unwrap();
    assert_eq!(code(&grushin(&["verify", "section5", "--alpha", "1", "--out", d])), 0);
    for what in ["density", "curve"] {
        assert_eq!(code(&grushin(&["export", what, "--out", d])), 0);
    }
}

#[test]
fn exports_are_byte_identical_and_well_formed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_and_export(a.path());
    run_and_export(b.path());
    for f in ["section5.json", "density.csv", "curve.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
        assert!(!x.contains(&b'\r'));
    }

    let density = std::fs::read_to_string(a.path().join("density.csv")).unwrap();
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("section5.json")).unwrap()).unwrap();
    let grid = &report["details"]["bound"]["modulus"]["grid"];
    let (nx, ny) = (grid["nx"].as_u64().unwrap() as usize, grid["ny"].as_u64().unwrap() as usize);
    let mut lines = density.lines();
    assert_eq!(lines.next(), Some("i,j,x1,x2,value"));
    assert_eq!(lines.count(), nx * ny);

    let curve = std::fs::read_to_string(a.path().join("curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("param,x1,x2"));
    let expected =
        sample_curve(&nonrectifiable_image_curve(0.0, Alpha::new(1.0).unwrap()).unwrap(), 257, Grading::geometric())
            .unwrap();
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), expected.len());
    for ((row, v), t) in rows.iter().zip(expected.vertices()).zip(expected.params()) {
        assert_eq!(row, &vec![*t, v.x, v.y]);
    }
}

#[test]
fn profile_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&grushin(&["verify", "h0-witness", "--n-dirs", "16", "--out", d])), 0);
    assert_eq!(code(&grushin(&["export", "profile", "--out", d])), 0);
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,envelope"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, e) = l.split_once(',').unwrap();
            (t.parse().unwrap(), e.parse().unwrap())
        })
        .collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|(t, e)| *t > 0.0 && e.is_finite() && *e > 0.0));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "alpha = 2.0\ntol = 1e-3\n").unwrap();
    let c = cfg.to_str().unwrap();
    let base = ["distance", "--from", "0,0", "--to", "0,1", "--config", c];

    let from_file = json(&grushin(&base))["distance"].as_f64().unwrap();
    let mut flagged = base.to_vec();
    flagged.extend(["--alpha", "1"]);
    let from_flag = json(&grushin(&flagged))["distance"].as_f64().unwrap();
    assert!((from_file - 2.742428).abs() < 3e-3, "{from_file}");
    assert!((from_flag - 2.506628).abs() < 3e-3, "{from_flag}");

    std::fs::write(&cfg, "alpha = 1.0\nbogus = 3\n").unwrap();
    assert_eq!(code(&grushin(&base)), 1);
}

#[test]
fn identical_config_gives_identical_json() {
    let args = ["verify", "lemma31", "--alpha", "2", "--seed", "99"];
    assert_eq!(grushin(&args).stdout, grushin(&args).stdout);
}
