use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alpha must be finite and nonnegative, got {0}")]
    InvalidAlpha(f64),

    #[error("non-finite coordinate in point ({0}, {1})")]
    NonFinitePoint(f64, f64),

    #[error("invalid polyline: {0}")]
    InvalidPolyline(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge on [{lo}, {hi}] (error estimate {estimate:e})")]
    QuadratureFailed { lo: f64, hi: f64, estimate: f64 },

    #[error("point ({0}, {1}) lies outside the density grid")]
    OutsideGrid(f64, f64),

    #[error("density is nonzero on column {0}, which meets the singular line")]
    DensityOnSingularLine(usize),

    #[error("alpha = {0} < 1: the non-rectifiable family bound requires alpha >= 1")]
    AlphaBelowOne(f64),

    #[error("sphere sampling failed on ray {ray}: {reason}")]
    RayFailed { ray: usize, reason: String },

    #[error("cantor depth {0} is outside 1..=12")]
    DepthOutOfRange(usize),

    #[error("cannot parse map spec: {0}")]
    Parse(String),

    #[error("degenerate Beltrami quotient at ({0}, {1})")]
    DegenerateBeltrami(f64, f64),

    #[error("curve {0} has zero or infinite length in the chosen metric")]
    DegenerateCurve(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
