//! Trial functions `(A + B u) chi_1` and the bump used in the critical case.

use nalgebra::Vector2;
use serde::Serialize;

use super::mollifier::MollifierFamily;
use super::transverse::TrialJet;
use crate::error::{Error, Result};
use crate::layer::LocalLayer;
use crate::surface::{RadialFrame, Surface, SurfacePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpShape {
    /// `j = (1 - |p - c|^2 / delta^2)^4` in the parameter plane.
    Disk,
    /// `j = (1 - (s - c)^2 / delta^2)^4`, constant along parallels.
    Ring,
}

/// Smooth compactly supported bump `(1 - t^2)^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
    pub shape: BumpShape,
}

impl Bump {
    /// `j(p)` and its parameter-space differential.
    pub fn value(&self, p: [f64; 2]) -> (f64, Vector2<f64>) {
        let d = match self.shape {
            BumpShape::Disk => Vector2::new(p[0] - self.center[0], p[1] - self.center[1]),
            BumpShape::Ring => Vector2::new(p[0] - self.center[0], 0.0),
        };
        let t2 = d.norm_squared() / (self.radius * self.radius);
        if t2 >= 1.0 {
            return (0.0, Vector2::zeros());
        }
        let q = 1.0 - t2;
        (
            q.powi(4),
            d * (-8.0 * q.powi(3) / (self.radius * self.radius)),
        )
    }

    /// Radii of the frame at which `j` has kinks in the radial direction.
    pub fn radial_breaks(&self, frame: RadialFrame) -> Vec<f64> {
        match (frame, self.shape) {
            (RadialFrame::Meridian { center, .. }, BumpShape::Ring) => {
                let c = (self.center[0] - center).abs();
                vec![(c - self.radius).abs(), c, c + self.radius]
            }
            (RadialFrame::Polar { center }, BumpShape::Disk) => {
                let off = ((self.center[0] - center[0]).powi(2)
                    + (self.center[1] - center[1]).powi(2))
                .sqrt();
                vec![off, off + self.radius]
            }
            _ => Vec::new(),
        }
    }

    /// Largest frame radius on the support.
    pub fn reach(&self, frame: RadialFrame) -> f64 {
        self.radial_breaks(frame)
            .into_iter()
            .fold(self.radius, f64::max)
    }
}

const SCAN_STEPS: usize = 4000;

/// Place a bump at the sampled maximiser of `|M|`, on the largest support
/// over which `M` keeps its sign (shrunk by 2%).
pub fn select_bump(surface: &Surface) -> Result<Bump> {
    let scale = surface.scale();
    let pts = surface.audit_points(1024, 20.0);
    let mut best = (0.0, [0.0; 2]);
    for p in pts {
        if let Ok(m) = surface.mean(p) {
            if m.abs() > best.0 {
                best = (m.abs(), p);
            }
        }
    }
    let (peak, p_star) = best;
    if !(peak > 1e-12 / scale) {
        return Err(Error::DegenerateBump { cross: 0.0 });
    }
    let sign = surface.mean(p_star)?.signum();
    let same_sign = |p: [f64; 2]| surface.mean(p).map(|m| m * sign > 0.0).unwrap_or(false);
    let cap = 8.0 * scale;
    let step = cap / SCAN_STEPS as f64;
    // distance along `dir` to the first sign change or chart edge, capped
    let extent = |from: [f64; 2], dir: [f64; 2]| {
        for k in 1..=SCAN_STEPS {
            let t = k as f64 * step;
            if !same_sign([from[0] + t * dir[0], from[1] + t * dir[1]]) {
                return (k - 1) as f64 * step;
            }
        }
        cap
    };
    match surface.frame() {
        RadialFrame::Meridian { center, two_sided } => {
            let on_axis = surface.profile.as_ref().is_some_and(|p| p.on_axis());
            let s = p_star[0];
            let up = extent([s, 0.0], [1.0, 0.0]);
            let down = extent([s, 0.0], [-1.0, 0.0]);
            let axis_room = if on_axis && !two_sided {
                s - center
            } else {
                f64::INFINITY
            };
            let delta = 0.98 * up.min(down);
            if delta < axis_room {
                return Ok(Bump {
                    center: [s, 0.0],
                    radius: delta,
                    shape: BumpShape::Ring,
                });
            }
            // support would reach the axis: centre the bump on it instead
            if !same_sign([center, 0.0]) {
                return Err(Error::DegenerateBump { cross: 0.0 });
            }
            let reach = extent([center, 0.0], [1.0, 0.0]);
            Ok(Bump {
                center: [center, 0.0],
                radius: 0.98 * reach,
                shape: BumpShape::Ring,
            })
        }
        RadialFrame::Polar { center } => {
            let off = ((p_star[0] - center[0]).powi(2) + (p_star[1] - center[1]).powi(2)).sqrt();
            let c = if off < 0.05 * scale && same_sign(center) {
                center
            } else {
                p_star
            };
            let mut reach = cap;
            for k in 0..16 {
                let (sn, cs) = (k as f64 * std::f64::consts::TAU / 16.0).sin_cos();
                reach = reach.min(extent(c, [cs, sn]));
            }
            Ok(Bump {
                center: c,
                radius: 0.98 * reach,
                shape: BumpShape::Disk,
            })
        }
        RadialFrame::Rect => Err(Error::InvalidInput(
            "bump selection needs a radial frame".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialKind {
    /// `phi_n chi_1`.
    Basic,
    /// `phi_n chi_1 + eps j u chi_1`.
    Deformed { epsilon: f64, bump: Bump },
    /// `(1 + M u) phi_n chi_1`.
    Weighted,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialFunction {
    pub family: MollifierFamily,
    pub n: u32,
    #[serde(flatten)]
    pub kind: TrialKind,
}

impl TrialFunction {
    pub fn basic(family: MollifierFamily, n: u32) -> Self {
        Self {
            family,
            n,
            kind: TrialKind::Basic,
        }
    }

    pub fn deformed(family: MollifierFamily, n: u32, epsilon: f64, bump: Bump) -> Self {
        Self {
            family,
            n,
            kind: TrialKind::Deformed { epsilon, bump },
        }
    }

    pub fn weighted(family: MollifierFamily, n: u32) -> Self {
        Self {
            family,
            n,
            kind: TrialKind::Weighted,
        }
    }

    pub fn needs_gradient(&self) -> bool {
        matches!(self.kind, TrialKind::Weighted)
    }

    pub fn breaks(&self, frame: RadialFrame) -> Vec<f64> {
        let mut b = self.family.breaks(self.n).to_vec();
        if let TrialKind::Deformed { bump, .. } = self.kind {
            b.extend(bump.radial_breaks(frame));
        }
        b
    }

    /// Radius of the support in the chart frame.
    pub fn support_radius(&self, frame: RadialFrame) -> f64 {
        let r = self.family.outer_radius(self.n);
        match self.kind {
            TrialKind::Deformed { bump, .. } => r.max(bump.reach(frame)),
            _ => r,
        }
    }

    /// `A`, `B` and their differentials in the principal frame at `sp`.
    pub fn jet(&self, sp: &SurfacePoint, loc: &LocalLayer) -> TrialJet {
        let (phi, dphi) = self.family.value(self.n, sp.rho);
        let dphi = sp.drho * dphi;
        let da = loc.components(&dphi);
        match self.kind {
            TrialKind::Basic => TrialJet {
                a: phi,
                da,
                ..Default::default()
            },
            TrialKind::Deformed { epsilon, bump } => {
                let (j, dj) = bump.value(sp.p);
                TrialJet {
                    a: phi,
                    da,
                    b: epsilon * j,
                    db: loc.components(&(dj * epsilon)),
                }
            }
            TrialKind::Weighted => {
                let m = sp.sample.mean;
                let dm = sp
                    .sample
                    .grad_mean
                    .unwrap_or_else(|| Vector2::repeat(f64::NAN));
                TrialJet {
                    a: phi,
                    da,
                    b: m * phi,
                    db: loc.components(&(dphi * m + dm * phi)),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::catalog;
    use approx::assert_relative_eq;

    #[test]
    fn bump_gradient_matches_differences() {
        let b = Bump {
            center: [0.3, -0.2],
            radius: 1.5,
            shape: BumpShape::Disk,
        };
        let p = [0.9, 0.4];
        let (_, d) = b.value(p);
        let h = 1e-6;
        for i in 0..2 {
            let mut a = p;
            let mut c = p;
            a[i] -= h;
            c[i] += h;
            assert_relative_eq!(
                (b.value(c).0 - b.value(a).0) / (2.0 * h),
                d[i],
                max_relative = 1e-7
            );
        }
        assert_eq!(b.value([5.0, 5.0]).0, 0.0);
    }

    #[test]
    fn bump_on_gaussian_bump_stays_inside_sign_region() {
        let s = catalog::gaussian_bump(1.0, 2.0).unwrap();
        let b = select_bump(&s).unwrap();
        assert_eq!(b.shape, BumpShape::Disk);
        assert_eq!(b.center, [0.0, 0.0]);
        // M changes sign where the profile's inflection terms balance, near rho = 2.06
        assert!(b.radius > 1.8 && b.radius < 2.06, "{b:?}");
    }

    #[test]
    fn plane_has_no_bump() {
        assert!(matches!(
            select_bump(&catalog::plane()),
            Err(Error::DegenerateBump { .. })
        ));
        assert!(matches!(
            select_bump(&catalog::catenoid(1.0).unwrap()),
            Err(Error::DegenerateBump { .. })
        ));
    }

    #[test]
    fn cone_bump_sits_on_the_axis() {
        let s = catalog::smoothed_cone(std::f64::consts::FRAC_PI_4, 1.2).unwrap();
        let b = select_bump(&s).unwrap();
        assert_eq!(b.center[0], 0.0);
        assert!(b.radius > 1.0);
    }
}
