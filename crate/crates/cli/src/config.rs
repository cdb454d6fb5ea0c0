use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use grushin_core::verify::SuiteConfig;
use grushin_core::Alpha;
use serde::Deserialize;

/// Settings shared by every command. Resolved as flags, then config file, then defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub seed: u64,
    pub grid: Option<(usize, usize)>,
    pub tol: f64,
    pub triples: usize,
    pub n_dirs: usize,
    pub out: Option<PathBuf>,
}

/// Every field optional so a file may set only what it cares about.
#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub grid: Option<String>,
    pub tol: Option<f64>,
    pub triples: Option<usize>,
    pub n_dirs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: Overrides) -> Overrides {
        Overrides {
            alpha: self.alpha.or(lower.alpha),
            seed: self.seed.or(lower.seed),
            grid: self.grid.or(lower.grid),
            tol: self.tol.or(lower.tol),
            triples: self.triples.or(lower.triples),
            n_dirs: self.n_dirs.or(lower.n_dirs),
            out: self.out.or(lower.out),
        }
    }
}

pub fn parse_grid(text: &str) -> anyhow::Result<(usize, usize)> {
    let Some((a, b)) = text.trim().split_once(['x', 'X']) else {
        bail!("grid must look like NXxNY, got '{text}'");
    };
    let nx = a.trim().parse().with_context(|| format!("bad grid width '{a}'"))?;
    let ny = b.trim().parse().with_context(|| format!("bad grid height '{b}'"))?;
    Ok((nx, ny))
}

pub fn parse_point(text: &str) -> anyhow::Result<grushin_core::Point> {
    let Some((a, b)) = text.split_once(',') else {
        bail!("point must look like X,Y, got '{text}'");
    };
    let x: f64 = a.trim().parse().with_context(|| format!("bad coordinate '{a}'"))?;
    let y: f64 = b.trim().parse().with_context(|| format!("bad coordinate '{b}'"))?;
    Ok(grushin_core::Point::checked(x, y)?)
}

impl RunConfig {
    pub fn resolve(o: Overrides) -> anyhow::Result<Self> {
        let d = SuiteConfig::default();
        let grid = o.grid.as_deref().map(parse_grid).transpose()?;
        let cfg = RunConfig {
            alpha: o.alpha.unwrap_or(d.alpha.value()),
            seed: o.seed.unwrap_or(d.seed),
            grid,
            tol: o.tol.unwrap_or(d.tol),
            triples: o.triples.unwrap_or(d.triples),
            n_dirs: o.n_dirs.unwrap_or(d.n_dirs),
            out: o.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            bail!("alpha must be finite and >= 0, got {}", self.alpha);
        }
        if let Some((nx, ny)) = self.grid {
            if nx < 16 || ny < 16 {
                bail!("grid must be at least 16x16, got {nx}x{ny}");
            }
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            bail!("tolerance must lie in (0, 1), got {}", self.tol);
        }
        if self.triples == 0 {
            bail!("triples must be positive");
        }
        if self.n_dirs < 16 {
            bail!("need at least 16 directions, got {}", self.n_dirs);
        }
        Ok(())
    }

    pub fn suite(&self) -> anyhow::Result<SuiteConfig> {
        Ok(SuiteConfig {
            alpha: Alpha::new(self.alpha)?,
            seed: self.seed,
            grid: self.grid,
            tol: self.tol,
            triples: self.triples,
            n_dirs: self.n_dirs,
        })
    }
}
