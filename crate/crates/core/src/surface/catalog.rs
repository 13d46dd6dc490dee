//! Named surfaces used by the command-line front end and the tests.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use super::chart::{
    Chart, Domain, GaussianBumpImmersion, PlaneImmersion, RadialFrame, SphereImmersion,
};
use super::profile::{
    CatenoidProfile, CylinderProfile, ParaboloidProfile, PlaneProfile, RevolutionProfile,
    SmoothedConeProfile, TabulatedProfile,
};
use super::Surface;
use crate::error::{Error, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// The plane, as the profile `r = s` so that it can also be solved.
pub fn plane() -> Surface {
    Surface::from_profile(RevolutionProfile::new(PlaneProfile))
}

/// The plane in Cartesian coordinates.
pub fn plane_chart() -> Surface {
    Surface::from_chart(
        Chart::new(
            "plane(cartesian)",
            Domain::whole_plane(),
            Arc::new(PlaneImmersion),
            RadialFrame::Polar { center: [0.0; 2] },
        )
        .with_decay_hint(Arc::new(|_| 0.0)),
    )
}

/// Graph of `h exp(-rho^2 / w^2)` in Cartesian coordinates.
pub fn gaussian_bump(h: f64, w: f64) -> Result<Surface> {
    if !(h.is_finite() && h != 0.0) {
        return Err(Error::InvalidInput(format!(
            "bump height must be finite and nonzero, got {h}"
        )));
    }
    positive("bump width", w)?;
    let w2 = w * w;
    // |K| sqrt(det g) <= |det Hess z| for a graph; integrated in closed form
    let hint =
        move |r: f64| PI * h * h * (-2.0 * r * r / w2).exp() * (4.0 * r * r / (w2 * w2) + 4.0 / w2);
    Ok(Surface::from_chart(
        Chart::new(
            format!("gaussian_bump(h={h}, w={w})"),
            Domain::whole_plane(),
            Arc::new(GaussianBumpImmersion {
                height: h,
                width: w,
            }),
            RadialFrame::Polar { center: [0.0; 2] },
        )
        .with_decay_hint(Arc::new(hint))
        .with_scale(w),
    ))
}

pub fn catenoid(c: f64) -> Result<Surface> {
    positive("catenoid waist", c)?;
    Ok(Surface::from_profile(RevolutionProfile::new(
        CatenoidProfile { c },
    )))
}

pub fn paraboloid(p: f64) -> Result<Surface> {
    positive("paraboloid parameter", p)?;
    Ok(Surface::from_profile(RevolutionProfile::new(
        ParaboloidProfile { p },
    )))
}

pub fn smoothed_cone(theta: f64, sigma: f64) -> Result<Surface> {
    Ok(Surface::from_profile(RevolutionProfile::new(
        SmoothedConeProfile::new(theta, sigma)?,
    )))
}

pub fn cylinder(radius: f64) -> Result<Surface> {
    positive("cylinder radius", radius)?;
    Ok(Surface::from_profile(RevolutionProfile::new(
        CylinderProfile { radius },
    )))
}

/// Profile through tabulated samples `(t, r, z)`.
pub fn tabulated(name: &str, t: &[f64], r: &[f64], z: &[f64]) -> Result<Surface> {
    Ok(Surface::from_profile(RevolutionProfile::new(
        TabulatedProfile::new(name, t, r, z)?,
    )))
}

/// Round sphere in polar/azimuthal angles over the whole parameter rectangle.
pub fn sphere(radius: f64) -> Result<Surface> {
    positive("sphere radius", radius)?;
    Ok(Surface::from_chart(
        Chart::new(
            format!("sphere(R={radius})"),
            Domain::new([0.0, 0.0], [PI, TAU]),
            Arc::new(SphereImmersion { radius }),
            RadialFrame::Rect,
        )
        .with_scale(radius),
    ))
}
