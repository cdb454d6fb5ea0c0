//! Discrete 2-modulus of sampled curve families.

mod families;
mod grid;
mod nonrectifiable;
mod solve;

pub use families::{pullback_segment, ring_curves_for_grid, ring_family, RingCoords, PULLBACK_SAMPLES};
pub use grid::{DensityGrid, DensityRecord};
pub use nonrectifiable::{
    matched_grid, nonrectifiable_family, nonrectifiable_integral, nonrectifiable_integrand,
    nonrectifiable_modulus_bound, IntegralGrid, NonrectifiableBound, NonrectifiableOptions,
};
pub use solve::{
    constraint_row, line_integral, solve_modulus, solve_modulus_refined, CurveFamily, GridInfo, ModulusOptions,
    ModulusResult, ModulusSummary, RefinementReport, Row,
};
