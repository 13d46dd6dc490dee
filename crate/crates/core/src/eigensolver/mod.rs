//! Bound states of layers over surfaces of revolution: separation in the
//! angle, bilinear elements on the meridian strip, and a banded Lanczos.

pub mod band;
pub mod count;
pub mod lanczos;
pub mod problem;

pub use count::{
    count_below_threshold, default_schedule, CountOptions, CountReport, ModeCount, TableRow,
};
pub use lanczos::{solve_lowest, solve_lowest_with, EigenPair, LanczosOptions, Spectrum};
pub use problem::{
    assemble, reduce, Coefficients, DiscreteForm, ModeCoefficients, Refinement,
    SymmetricLayerProblem,
};

use crate::error::Result;
use crate::surface::profile::SmoothedConeProfile;
use crate::surface::RevolutionProfile;

/// Meridian of a cone of half-angle `theta` with its tip rounded at radius `sigma`.
pub fn smoothed_cone(theta: f64, sigma: f64) -> Result<RevolutionProfile> {
    Ok(RevolutionProfile::new(SmoothedConeProfile::new(
        theta, sigma,
    )?))
}
