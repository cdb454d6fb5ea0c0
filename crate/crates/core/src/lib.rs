//! Numerical toolkit for the α-Grushin plane `sqrt(dx^2 + |x|^(-2α) dy^2)`:
//! distances, curve lengths, Grushin area, discrete curve-family modulus and
//! quasiconformal distortion estimates.

pub mod cantor;
pub mod curves;
pub mod distance;
pub mod error;
pub mod geometry;
pub mod modulus;
pub mod qc;
pub mod quadrature;
pub mod snowflake;
pub mod sphere;
pub mod transport;
pub mod types;
pub mod verify;

pub use distance::{grushin_distance, DistanceOptions, DistanceReport};
pub use error::{Error, Result};
pub use types::{Alpha, Metric, Point, Polyline, Rect};
