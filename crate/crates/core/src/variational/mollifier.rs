//! Logarithmic radial cutoffs `phi_n` with measured Dirichlet energy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{Estimate, QuadOptions};
use crate::surface::{integrate_radial, RadialFrame, Surface, SurfacePoint};

/// `phi_n = 1` for `rho <= R_n`, `2 - ln rho / ln R_n` up to `R_n^2`, then `0`,
/// with `R_n = R_0 2^n` and `rho` the radial coordinate of the chart frame.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MollifierFamily {
    pub r0: f64,
}

impl MollifierFamily {
    pub fn new(r0: f64) -> Result<Self> {
        if !(r0 > 1.0 && r0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mollifier base radius must exceed 1, got {r0}"
            )));
        }
        Ok(Self { r0 })
    }

    /// Base radius clearing the curved core: twice the chart scale and
    /// half again the outermost chart breakpoint.
    pub fn for_surface(surface: &Surface) -> Self {
        let breaks = surface
            .chart
            .radial_breaks
            .iter()
            .copied()
            .fold(0.0, f64::max);
        Self {
            r0: (2.0 * surface.scale()).max(1.5 * breaks).max(2.0),
        }
    }

    /// Parameter point the radius is measured from.
    pub fn center(surface: &Surface) -> [f64; 2] {
        match surface.frame() {
            RadialFrame::Polar { center } => center,
            RadialFrame::Meridian { center, .. } => [center, 0.0],
            RadialFrame::Rect => [f64::NAN; 2],
        }
    }

    pub fn inner_radius(&self, n: u32) -> f64 {
        self.r0 * 2f64.powi(n as i32)
    }

    pub fn outer_radius(&self, n: u32) -> f64 {
        self.inner_radius(n).powi(2)
    }

    /// `(phi_n(rho), phi_n'(rho))`.
    pub fn value(&self, n: u32, rho: f64) -> (f64, f64) {
        let r = self.inner_radius(n);
        if rho <= r {
            (1.0, 0.0)
        } else if rho >= r * r {
            (0.0, 0.0)
        } else {
            let lr = r.ln();
            ((2.0 - rho.ln() / lr).clamp(0.0, 1.0), -1.0 / (rho * lr))
        }
    }

    pub fn breaks(&self, n: u32) -> [f64; 2] {
        [self.inner_radius(n), self.outer_radius(n)]
    }

    /// `|grad_g phi_n|_g^2` at a surface point.
    pub fn energy_density(&self, n: u32, sp: &SurfacePoint) -> f64 {
        let (_, d) = self.value(n, sp.rho);
        let v = sp.drho * d;
        let [a, b] = [v.dot(&sp.sample.frame[0]), v.dot(&sp.sample.frame[1])];
        a * a + b * b
    }

    /// Measured `||grad_g phi_n||_g^2`.
    pub fn energy(&self, surface: &Surface, n: u32, tol: f64) -> Result<Estimate> {
        let [r, r2] = self.breaks(n);
        let [e] = integrate_radial(
            surface,
            r2,
            &[r],
            false,
            QuadOptions::absolute(tol).with_rel(1e-10),
            |sp| {
                if sp.rho <= r {
                    [0.0]
                } else {
                    [self.energy_density(n, sp)]
                }
            },
        )?;
        Ok(e)
    }

    /// Energies for `n = 0..=n_max` and the verdict on their decay.
    pub fn ladder(&self, surface: &Surface, n_max: u32, tol: f64) -> Result<MollifierLadder> {
        let mut energies = Vec::new();
        for n in 0..=n_max {
            match self.energy(surface, n, tol) {
                Ok(e) => energies.push(e),
                Err(Error::SupportEscape { .. }) if !energies.is_empty() => break,
                Err(e) => return Err(e),
            }
        }
        Ok(MollifierLadder::from_energies(self.r0, energies))
    }
}

/// Below this energy a mollifier counts as having vanishing Dirichlet energy.
pub const ENERGY_TARGET: f64 = 1e-2;

#[derive(Debug, Clone, Serialize)]
pub struct MollifierLadder {
    pub r0: f64,
    pub energies: Vec<Estimate>,
    pub strictly_decreasing: bool,
    /// Smallest `n` with energy below [`ENERGY_TARGET`].
    pub below_target_at: Option<u32>,
}

impl MollifierLadder {
    fn from_energies(r0: f64, energies: Vec<Estimate>) -> Self {
        let strictly_decreasing = energies.windows(2).all(|w| w[1].upper() < w[0].lower());
        let below_target_at = energies
            .iter()
            .position(|e| e.upper() < ENERGY_TARGET)
            .map(|n| n as u32);
        Self {
            r0,
            energies,
            strictly_decreasing,
            below_target_at,
        }
    }

    /// Strictly decreasing and below target by `n = by`.
    pub fn vanishes_by(&self, by: u32) -> bool {
        self.strictly_decreasing && self.below_target_at.is_some_and(|n| n <= by)
    }
}
