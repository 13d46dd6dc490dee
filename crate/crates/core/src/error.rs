use thiserror::Error;

use crate::quadrature::QuadratureError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure classes used by the command-line front end to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Hypothesis,
    Numerical,
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("degenerate immersion at ({}, {}): |x_1 x x_2| = {cross:.3e}", .at[0], .at[1])]
    DegenerateImmersion { at: [f64; 2], cross: f64 },

    #[error("parameter ({}, {}) lies outside the chart domain", .at[0], .at[1])]
    OutsideDomain { at: [f64; 2] },

    #[error("tail of the Gauss curvature cannot be bounded below {tol:.3e}: {reason}")]
    TailUnbounded { tol: f64, reason: String },

    #[error("quadrature stalled: {0}")]
    QuadratureStall(#[from] QuadratureError),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("principal curvatures grow without bound towards the domain edge (|k| = {max_abs_k:.3e} at radius {radius:.3e})")]
    UnboundedCurvature { max_abs_k: f64, radius: f64 },

    #[error("layer hypothesis violated: {reason}")]
    HypothesisViolated {
        reason: String,
        at: Option<[f64; 3]>,
    },

    #[error(
        "mollifier support radius {needed:.3e} exceeds the chart domain (radius {available:.3e})"
    )]
    SupportEscape { needed: f64, available: f64 },

    #[error("deformation bump is degenerate: (j, M phi)_g = {cross:.3e}")]
    DegenerateBump { cross: f64 },

    #[error("mean-curvature gradient unavailable: {0}")]
    GradientUnavailable(String),

    #[error("surface of revolution meets the axis at s = {s}; handled by the assembler")]
    AxisSingularity { s: f64 },

    #[error("grid {n_s}x{n_u} is too coarse (both sizes must be at least 8)")]
    GridTooCoarse { n_s: usize, n_u: usize },

    #[error("eigensolver stalled: {0}")]
    SolverStall(String),

    #[error("eigenvalue count did not stabilise within the refinement schedule: {0}")]
    NotStabilized(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidInput(_) | Error::OutsideDomain { .. } => ErrorClass::Config,
            Error::HypothesisViolated { .. }
            | Error::UnboundedCurvature { .. }
            | Error::DegenerateImmersion { .. } => ErrorClass::Hypothesis,
            _ => ErrorClass::Numerical,
        }
    }
}
