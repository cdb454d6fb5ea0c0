//! Distortion estimators for planar maps of the Grushin plane.

mod estimators;
mod map;

pub use estimators::{
    beltrami_coefficient, data_conversions, metric_dilatation, quasisymmetry_profile, DilatationEstimate,
    DilatationOptions, DistortionReport, EtaBin, ProfileOptions, QcData, QuasisymmetryProfile,
};
pub use map::{MapKind, MapSpec};
