//! `grushin`: distances, verification suites and CSV export.

mod config;
mod csv;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use grushin_core::verify::{run_suite, CurveExport, SCHEMA, SUITES};
use grushin_core::{grushin_distance, Alpha, DistanceOptions, Error};
use serde_json::json;

use config::{parse_point, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "grushin", version, about = "Numerical experiments in the Grushin plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate the Grushin distance between two points.
    Distance {
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named verification suite and print its JSON report.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Convert a result left in --out by `verify` to CSV.
    Export {
        what: Artifact,
        #[command(flatten)]
        common: Common,
    },
    /// List the verification suites.
    Suites,
}

#[derive(Args, Default)]
struct Common {
    /// TOML file with any of: alpha, seed, grid, tol, triples, n_dirs, out.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Density grid as NXxNY.
    #[arg(long)]
    grid: Option<String>,
    /// Relative tolerance of the distance solver.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    triples: Option<usize>,
    #[arg(long)]
    n_dirs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(self) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(p) => Overrides::load(p)?,
            None => Overrides::default(),
        };
        let flags = Overrides {
            alpha: self.alpha,
            seed: self.seed,
            grid: self.grid,
            tol: self.tol,
            triples: self.triples,
            n_dirs: self.n_dirs,
            out: self.out,
        };
        RunConfig::resolve(flags.over(file))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Artifact {
    Density,
    Curve,
    Profile,
}

impl Artifact {
    fn name(self) -> &'static str {
        match self {
            Artifact::Density => "density",
            Artifact::Curve => "curve",
            Artifact::Profile => "profile",
        }
    }
}

/// Non-error outcomes: `Flagged` maps to exit code 2.
enum Outcome {
    Ok,
    Flagged,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn print_json(v: &serde_json::Value) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn run(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Distance { from, to, common } => distance(&from, &to, common.resolve()?),
        Command::Verify { suite, common } => verify(&suite, common.resolve()?),
        Command::Export { what, common } => export(what, common.resolve()?),
        Command::Suites => {
            print_json(&json!({ "schema": SCHEMA, "suites": SUITES }))?;
            Ok(Outcome::Ok)
        }
    }
}

fn distance(from: &str, to: &str, cfg: RunConfig) -> anyhow::Result<Outcome> {
    let (p, q) = (parse_point(from)?, parse_point(to)?);
    let alpha = Alpha::new(cfg.alpha)?;
    let r = grushin_distance(p, q, alpha, &DistanceOptions::with_tol(cfg.tol))?;
    let polyline: Vec<[f64; 2]> = if r.distance == 0.0 {
        vec![[p.x, p.y]]
    } else {
        let w = r.witness()?;
        w.vertices().iter().map(|v| [v.x, v.y]).collect()
    };
    print_json(&json!({
        "schema": SCHEMA,
        "alpha": alpha,
        "from": [p.x, p.y],
        "to": [q.x, q.y],
        "distance": r.distance,
        "converged": r.converged,
        "start": r.start,
        "polyline": polyline,
        "refinements": r.history,
    }))?;
    Ok(if r.converged { Outcome::Ok } else { Outcome::Flagged })
}

fn verify(suite: &str, cfg: RunConfig) -> anyhow::Result<Outcome> {
    let outcome = match run_suite(suite, &cfg.suite()?) {
        Ok(o) => o,
        Err(e @ (Error::InvalidArgument(_) | Error::AlphaBelowOne(_))) => bail!(e),
        Err(e) => return Err(e).context(format!("suite '{suite}' failed to run")),
    };
    let report = serde_json::to_value(&outcome.report)?;
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write(&dir.join(format!("{suite}.json")), &serde_json::to_string_pretty(&report)?)?;
        for a in &outcome.artifacts {
            write(&dir.join(format!("{}.json", a.name)), &serde_json::to_string_pretty(&a.value)?)?;
        }
    }
    print_json(&report)?;
    Ok(if outcome.report.pass { Outcome::Ok } else { Outcome::Flagged })
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    let mut body = text.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn export(what: Artifact, cfg: RunConfig) -> anyhow::Result<Outcome> {
    let Some(dir) = cfg.out else {
        bail!("export needs --out DIR holding a prior verify result");
    };
    let src = dir.join(format!("{}.json", what.name()));
    if !src.is_file() {
        bail!("no {} result in {}; run a verify suite with --out first", what.name(), dir.display());
    }
    let text = std::fs::read_to_string(&src).with_context(|| format!("reading {}", src.display()))?;
    let body = match what {
        Artifact::Density => csv::density(&serde_json::from_str(&text).context("malformed density result")?)?,
        Artifact::Curve => csv::curve(&serde_json::from_str::<CurveExport>(&text).context("malformed curve result")?)?,
        Artifact::Profile => csv::profile(&serde_json::from_str(&text).context("malformed profile result")?)?,
    };
    let dst = dir.join(format!("{}.csv", what.name()));
    write(&dst, &body)?;
    print_json(&json!({
        "schema": SCHEMA,
        "export": what.name(),
        "path": dst,
        "rows": body.lines().count() - 1,
    }))?;
    Ok(Outcome::Ok)
}
