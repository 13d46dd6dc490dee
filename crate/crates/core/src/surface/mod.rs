//! Surfaces: charts, meridian profiles, curvature samples and integrated
//! curvature quantities.

pub mod catalog;
pub mod chart;
pub mod conditions;
pub mod integrate;
pub mod profile;
pub mod spline;
pub mod totals;

use std::f64::consts::TAU;

use nalgebra::Vector2;

pub use chart::{
    principal_curvatures, Chart, CurvatureSample, DecayHint, Domain, FundamentalForms, Immersion,
    Jet, RadialFrame,
};
pub use conditions::{check_conditions, ConditionReport, Verdict};
pub use integrate::{integrate_annulus, integrate_radial, integrate_rect, SurfacePoint};
pub use profile::{ProfileCurve, ProfilePoint, RevolutionProfile};
pub use totals::{
    cohn_vossen_bound, rho_m, total_gauss_curvature, total_mean_sq, MeanSquare, RhoEstimate,
    TotalCurvatures,
};

use crate::error::{Error, Result};

/// A chart, optionally known to come from a surface of revolution.
///
/// When the profile is present curvature samples are computed from the
/// meridian directly, which is exact on the axis and much cheaper than the
/// generic pipeline; the two agree elsewhere (see the tests).
#[derive(Debug, Clone)]
pub struct Surface {
    pub chart: Chart,
    pub profile: Option<RevolutionProfile>,
}

impl Surface {
    pub fn from_chart(chart: Chart) -> Self {
        Self {
            chart,
            profile: None,
        }
    }

    pub fn from_profile(profile: RevolutionProfile) -> Self {
        Self {
            chart: profile.chart(),
            profile: Some(profile),
        }
    }

    pub fn label(&self) -> &str {
        &self.chart.label
    }

    pub fn frame(&self) -> RadialFrame {
        self.chart.frame
    }

    pub fn is_axisymmetric(&self) -> bool {
        self.profile.is_some()
    }

    /// Largest radius reachable in the radial frame.
    pub fn max_radius(&self) -> f64 {
        self.chart.frame.max_radius(&self.chart.domain)
    }

    pub fn scale(&self) -> f64 {
        self.chart.scale
    }

    pub fn tail_bound(&self, radius: f64) -> Option<f64> {
        if radius >= self.max_radius() {
            return Some(0.0);
        }
        self.chart.decay_hint.as_ref().map(|h| h(radius))
    }

    pub fn sample(&self, p: [f64; 2], with_gradient: bool) -> Result<CurvatureSample> {
        let Some(profile) = &self.profile else {
            return self.chart.curvature_sample(p, with_gradient);
        };
        if !self.chart.domain.contains(p) {
            return Err(Error::OutsideDomain { at: p });
        }
        let s = p[0];
        let (ks, kt) = profile.curvatures(s);
        let r = profile.eval(s).r;
        let sample = CurvatureSample::diagonal(ks, kt, r);
        if !with_gradient {
            return Ok(sample);
        }
        let (lo, hi) = profile.s_range();
        let step = chart::fd_step_scale() * s.abs().max(self.scale());
        let dm = chart::fd_derivative(
            |x| {
                let (a, b) = profile.curvatures(x);
                Ok(0.5 * (a + b))
            },
            s,
            step,
            lo,
            hi,
        )?;
        Ok(sample.with_gradient(Vector2::new(dm, 0.0)))
    }

    /// Mean curvature only.
    pub fn mean(&self, p: [f64; 2]) -> Result<f64> {
        match &self.profile {
            Some(profile) => {
                let (a, b) = profile.curvatures(p[0]);
                Ok(0.5 * (a + b))
            }
            None => self.chart.mean_curvature(p),
        }
    }

    /// Deterministic audit points spread over the curved region and
    /// reaching `reach` characteristic lengths out.
    pub fn audit_points(&self, count: usize, reach: f64) -> Vec<[f64; 2]> {
        let count = count.max(4);
        let dom = self.chart.domain;
        let scale = self.scale();
        match self.frame() {
            RadialFrame::Rect => {
                let side = (count as f64).sqrt().ceil() as usize;
                let mut out = Vec::with_capacity(side * side);
                for i in 0..side {
                    for j in 0..side {
                        let a = (i as f64 + 0.5) / side as f64;
                        let b = (j as f64 + 0.37) / side as f64;
                        out.push([
                            dom.lo[0] + a * (dom.hi[0] - dom.lo[0]),
                            dom.lo[1] + b * (dom.hi[1] - dom.lo[1]),
                        ]);
                    }
                }
                out
            }
            frame => {
                let rmax = self.max_radius().min(reach * scale);
                let two_sided = matches!(
                    frame,
                    RadialFrame::Meridian {
                        two_sided: true,
                        ..
                    }
                );
                (0..count)
                    .map(|i| {
                        // quasi-random radius and golden-angle direction
                        let t = (i as f64 + 0.5) / count as f64;
                        let rho = rmax * t * t;
                        let angle = (i as f64 * 2.399_963_229_728_653) % TAU;
                        let side = if two_sided && i % 2 == 1 { 1 } else { 0 };
                        frame.points(rho.max(1e-3 * scale), angle).0[side].p
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn profile_fast_path_agrees_with_generic_chart() {
        for surface in [
            catalog::paraboloid(0.8).unwrap(),
            catalog::catenoid(1.0).unwrap(),
            catalog::smoothed_cone(std::f64::consts::FRAC_PI_4, 1.2).unwrap(),
            catalog::cylinder(1.5).unwrap(),
        ] {
            for p in surface.audit_points(60, 15.0) {
                let fast = surface.sample(p, false).unwrap();
                let slow = surface.chart.curvature_sample(p, false).unwrap();
                assert_relative_eq!(fast.k_plus, slow.k_plus, epsilon = 1e-8);
                assert_relative_eq!(fast.k_minus, slow.k_minus, epsilon = 1e-8);
                assert_relative_eq!(fast.mean, slow.mean, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn profile_gradient_matches_generic_difference() {
        let surface = catalog::paraboloid(1.0).unwrap();
        let p = [1.3, 0.4];
        let fast = surface.sample(p, true).unwrap();
        let slow = surface.chart.curvature_sample(p, true).unwrap();
        assert_relative_eq!(
            fast.grad_mean_norm.unwrap(),
            slow.grad_mean_norm.unwrap(),
            max_relative = 1e-6
        );
    }
}
