//! Trial functions for the shifted quadratic form and bound-state certificates.

pub mod certify;
pub mod forms;
pub mod mollifier;
pub mod transverse;
pub mod trial;

pub use certify::{
    certify, deformed_family, search_half_width, Certificate, CertificateVerdict, LadderStep,
    Strategy,
};
pub use forms::{
    extrapolate_basic_limit, optimal_epsilon, q1_basic_reduced, q1_deformed, q1_quadrature,
    q1_weighted, q1_weighted_bound, reduced_ladder, EpsilonFit, WeightedBound,
};
pub use mollifier::{MollifierFamily, MollifierLadder};
pub use transverse::TransverseMode;
pub use trial::{select_bump, Bump, BumpShape, TrialFunction, TrialKind};
