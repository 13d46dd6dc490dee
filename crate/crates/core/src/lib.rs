//! Geometry of constant-width layers around non-compact surfaces, with
//! variational certificates and a direct eigensolver for spectrum below
//! the planar threshold `kappa_1^2 = (pi / 2a)^2`.

pub mod eigensolver;
pub mod error;
pub mod layer;
#[cfg(test)]
mod properties;
pub mod quadrature;
pub mod surface;
pub mod variational;

pub use error::{Error, ErrorClass, Result};
pub use quadrature::Estimate;
