//! Parameterised surface patches and their local differential geometry.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::error::{Error, Result};

/// Value, first and second derivatives of an immersion at a parameter point.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub x: Vector3<f64>,
    pub d: [Vector3<f64>; 2],
    pub dd: [[Vector3<f64>; 2]; 2],
}

/// A map `(u1, u2) -> R^3` with exact first and second derivatives.
pub trait Immersion: Send + Sync {
    fn jet(&self, p: [f64; 2]) -> Jet;

    fn point(&self, p: [f64; 2]) -> Vector3<f64> {
        self.jet(p).x
    }
}

/// Upper bound on the tail integral of `|K| dSigma` beyond a radius.
pub type DecayHint = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Parameter rectangle; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Domain {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Self { lo, hi }
    }

    pub fn whole_plane() -> Self {
        Self::new([f64::NEG_INFINITY; 2], [f64::INFINITY; 2])
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }

    pub fn is_bounded(&self) -> bool {
        (0..2).all(|i| self.lo[i].is_finite() && self.hi[i].is_finite())
    }
}

/// How a chart is swept by a radial coordinate `rho` and an angle.
///
/// `Polar` charts are Cartesian patches swept by circles in parameter
/// space; `Meridian` charts are surfaces of revolution in `(s, angle)`
/// coordinates whose radial coordinate is meridian arclength from a
/// centre (on both sides of it when `two_sided`). `Rect` charts carry no
/// radial structure and are integrated over their (bounded) rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialFrame {
    Polar { center: [f64; 2] },
    Meridian { center: f64, two_sided: bool },
    Rect,
}

/// A parameter point reached from `(rho, angle)` together with the
/// parameter-space gradient of `rho` and the Jacobian `d(p1,p2)/d(rho,angle)`.
#[derive(Debug, Clone, Copy)]
pub struct FramePoint {
    pub p: [f64; 2],
    pub drho: Vector2<f64>,
    pub jac: f64,
}

impl RadialFrame {
    pub fn points(&self, rho: f64, angle: f64) -> ([FramePoint; 2], usize) {
        match *self {
            RadialFrame::Polar { center } => {
                let (s, c) = angle.sin_cos();
                let fp = FramePoint {
                    p: [center[0] + rho * c, center[1] + rho * s],
                    drho: Vector2::new(c, s),
                    jac: rho,
                };
                ([fp, fp], 1)
            }
            RadialFrame::Meridian { center, two_sided } => {
                let up = FramePoint {
                    p: [center + rho, angle],
                    drho: Vector2::new(1.0, 0.0),
                    jac: 1.0,
                };
                let down = FramePoint {
                    p: [center - rho, angle],
                    drho: Vector2::new(-1.0, 0.0),
                    jac: 1.0,
                };
                if two_sided {
                    ([up, down], 2)
                } else {
                    ([up, up], 1)
                }
            }
            RadialFrame::Rect => panic!("rectangular charts have no radial frame"),
        }
    }

    /// Radial coordinate of a parameter point.
    pub fn rho(&self, p: [f64; 2]) -> f64 {
        match *self {
            RadialFrame::Polar { center } => {
                ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt()
            }
            RadialFrame::Meridian { center, .. } => (p[0] - center).abs(),
            RadialFrame::Rect => f64::NAN,
        }
    }

    /// Largest radius whose sweep stays inside `domain`.
    pub fn max_radius(&self, domain: &Domain) -> f64 {
        match *self {
            RadialFrame::Polar { center } => (0..2)
                .flat_map(|i| [center[i] - domain.lo[i], domain.hi[i] - center[i]])
                .fold(f64::INFINITY, f64::min),
            RadialFrame::Meridian { center, two_sided } => {
                if two_sided {
                    (domain.hi[0] - center).min(center - domain.lo[0])
                } else {
                    domain.hi[0] - center
                }
            }
            RadialFrame::Rect => 0.0,
        }
    }
}

/// A parameterised surface patch.
#[derive(Clone)]
pub struct Chart {
    pub label: String,
    pub domain: Domain,
    pub immersion: Arc<dyn Immersion>,
    pub decay_hint: Option<DecayHint>,
    pub frame: RadialFrame,
    /// Radii at which the geometry is known to lose smoothness.
    pub radial_breaks: Vec<f64>,
    /// Characteristic length of the curved part of the surface.
    pub scale: f64,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("frame", &self.frame)
            .field("has_decay_hint", &self.decay_hint.is_some())
            .finish()
    }
}

/// First and second fundamental forms and the unit normal.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalForms {
    pub g: Matrix2<f64>,
    pub h: Matrix2<f64>,
    pub normal: Vector3<f64>,
}

/// Pointwise curvature data in chart coordinates.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureSample {
    pub g: Matrix2<f64>,
    pub h: Matrix2<f64>,
    pub k_plus: f64,
    pub k_minus: f64,
    pub gauss: f64,
    pub mean: f64,
    pub sqrt_det_g: f64,
    /// Parameter-space differential of the mean curvature.
    pub grad_mean: Option<Vector2<f64>>,
    /// `|grad_g M|_g`.
    pub grad_mean_norm: Option<f64>,
    /// `g`-orthonormal principal directions for `k_plus` and `k_minus`.
    pub frame: [Vector2<f64>; 2],
}

impl CurvatureSample {
    /// Assemble a sample from the two fundamental forms.
    pub fn from_forms(g: Matrix2<f64>, h: Matrix2<f64>) -> Self {
        let ((k_plus, k_minus), frame) = principal_frame(&g, &h);
        Self {
            g,
            h,
            k_plus,
            k_minus,
            gauss: k_plus * k_minus,
            mean: 0.5 * (k_plus + k_minus),
            sqrt_det_g: g.determinant().max(0.0).sqrt(),
            grad_mean: None,
            grad_mean_norm: None,
            frame,
        }
    }

    /// Sample with diagonal forms in an orthogonal principal chart, as
    /// for surfaces of revolution: `g = diag(1, r^2)`.
    pub fn diagonal(k_first: f64, k_second: f64, r: f64) -> Self {
        let g = Matrix2::new(1.0, 0.0, 0.0, r * r);
        let h = Matrix2::new(k_first, 0.0, 0.0, r * r * k_second);
        let e1 = Vector2::new(1.0, 0.0);
        let e2 = Vector2::new(0.0, if r > 0.0 { 1.0 / r } else { 0.0 });
        let (k_plus, k_minus, frame) = if k_first >= k_second {
            (k_first, k_second, [e1, e2])
        } else {
            (k_second, k_first, [e2, e1])
        };
        Self {
            g,
            h,
            k_plus,
            k_minus,
            gauss: k_plus * k_minus,
            mean: 0.5 * (k_plus + k_minus),
            sqrt_det_g: r,
            grad_mean: None,
            grad_mean_norm: None,
            frame,
        }
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.k_plus.abs().max(self.k_minus.abs())
    }

    /// The Weingarten map `g^{-1} h` in chart coordinates.
    pub fn shape_operator(&self) -> Option<Matrix2<f64>> {
        self.g.try_inverse().map(|gi| gi * self.h)
    }

    pub(crate) fn with_gradient(mut self, dm: Vector2<f64>) -> Self {
        let norm = match self.g.try_inverse() {
            Some(gi) => (dm.dot(&(gi * dm))).max(0.0).sqrt(),
            None => dm.norm(),
        };
        self.grad_mean = Some(dm);
        self.grad_mean_norm = Some(norm);
        self
    }
}

/// Eigenvalues of `g^{-1} h`, ordered `k+ >= k-`.
pub fn principal_curvatures(g: &Matrix2<f64>, h: &Matrix2<f64>) -> (f64, f64) {
    principal_frame(g, h).0
}

/// Principal curvatures `(k+, k-)` with `g`-orthonormal eigenvectors.
///
/// Works in a `g`-orthonormal frame (Cholesky `g = L L^T`) so that the
/// problem is a symmetric 2x2 eigenproblem; the smaller-magnitude root is
/// recovered from the product to avoid cancellation.
pub fn principal_frame(g: &Matrix2<f64>, h: &Matrix2<f64>) -> ((f64, f64), [Vector2<f64>; 2]) {
    let l11 = g[(0, 0)].sqrt();
    let l21 = g[(1, 0)] / l11;
    let l22 = (g[(1, 1)] - l21 * l21).max(0.0).sqrt();
    // S = L^{-1} h L^{-T}
    let a = h[(0, 0)] / (l11 * l11);
    let b = (h[(1, 0)] - l21 * a * l11) / (l11 * l22);
    let c = (h[(1, 1)] - 2.0 * l21 * (h[(1, 0)] / l11) + l21 * l21 * a) / (l22 * l22);
    let mean = 0.5 * (a + c);
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let big = if mean >= 0.0 {
        mean + disc
    } else {
        mean - disc
    };
    let small = if big != 0.0 {
        (a * c - b * b) / big
    } else {
        0.0
    };
    let (kp, km) = if big >= small {
        (big, small)
    } else {
        (small, big)
    };
    // eigenvector of [[a, b], [b, c]] for kp, then the orthogonal one
    // eigenvector directions are scale-free; rescale so subnormal entries
    // far out on decaying surfaces do not underflow the normalisation
    let sc = a.abs().max(b.abs()).max(c.abs());
    let y = if b.abs() <= 1e-15 * sc || sc == 0.0 {
        if a >= c {
            Vector2::new(1.0, 0.0)
        } else {
            Vector2::new(0.0, 1.0)
        }
    } else {
        let (a, b, c, kp) = (a / sc, b / sc, c / sc, kp / sc);
        let v1 = Vector2::new(b, kp - a);
        let v2 = Vector2::new(kp - c, b);
        if v1.norm() >= v2.norm() {
            v1.normalize()
        } else {
            v2.normalize()
        }
    };
    let y_perp = Vector2::new(-y[1], y[0]);
    let lift = |v: Vector2<f64>| {
        let e2 = v[1] / l22;
        Vector2::new((v[0] - l21 * e2) / l11, e2)
    };
    ((kp, km), [lift(y), lift(y_perp)])
}

impl Chart {
    pub fn new(
        label: impl Into<String>,
        domain: Domain,
        immersion: Arc<dyn Immersion>,
        frame: RadialFrame,
    ) -> Self {
        Self {
            label: label.into(),
            domain,
            immersion,
            decay_hint: None,
            frame,
            radial_breaks: Vec::new(),
            scale: 1.0,
        }
    }

    pub fn with_decay_hint(mut self, hint: DecayHint) -> Self {
        self.decay_hint = Some(hint);
        self
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.radial_breaks = breaks;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn fundamental_forms(&self, p: [f64; 2]) -> Result<FundamentalForms> {
        if !self.domain.contains(p) {
            return Err(Error::OutsideDomain { at: p });
        }
        let jet = self.immersion.jet(p);
        let cross = jet.d[0].cross(&jet.d[1]);
        let cn = cross.norm();
        if cn < 1e-12 * jet.d[0].norm() * jet.d[1].norm() || cn == 0.0 {
            return Err(Error::DegenerateImmersion { at: p, cross: cn });
        }
        let normal = cross / cn;
        let mut g = Matrix2::zeros();
        let mut h = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                g[(i, j)] = jet.d[i].dot(&jet.d[j]);
                h[(i, j)] = normal.dot(&jet.dd[i][j]);
            }
        }
        // symmetrise against rounding in user-supplied second derivatives
        let h01 = 0.5 * (h[(0, 1)] + h[(1, 0)]);
        h[(0, 1)] = h01;
        h[(1, 0)] = h01;
        Ok(FundamentalForms { g, h, normal })
    }

    pub fn curvature_sample(&self, p: [f64; 2], with_gradient: bool) -> Result<CurvatureSample> {
        let ff = self.fundamental_forms(p)?;
        let sample = CurvatureSample::from_forms(ff.g, ff.h);
        if !with_gradient {
            return Ok(sample);
        }
        let dm = self.mean_gradient(p, fd_step_scale())?;
        Ok(sample.with_gradient(dm))
    }

    pub fn mean_curvature(&self, p: [f64; 2]) -> Result<f64> {
        let ff = self.fundamental_forms(p)?;
        let (kp, km) = principal_curvatures(&ff.g, &ff.h);
        Ok(0.5 * (kp + km))
    }

    /// Finite-difference parameter gradient of `M` with relative step `rel`.
    pub fn mean_gradient(&self, p: [f64; 2], rel: f64) -> Result<Vector2<f64>> {
        let mut out = Vector2::zeros();
        for i in 0..2 {
            let step = rel * p[i].abs().max(self.scale);
            out[i] = fd_derivative(
                |x| {
                    let mut q = p;
                    q[i] = x;
                    self.mean_curvature(q)
                },
                p[i],
                step,
                self.domain.lo[i],
                self.domain.hi[i],
            )?;
        }
        Ok(out)
    }

    /// Largest relative mismatch between the supplied first derivatives and
    /// central differences of the immersion value at `samples`.
    pub fn derivative_mismatch(&self, samples: &[[f64; 2]]) -> f64 {
        let mut worst: f64 = 0.0;
        for &p in samples {
            let jet = self.immersion.jet(p);
            for i in 0..2 {
                let step = 1e-5 * p[i].abs().max(self.scale);
                let mut a = p;
                let mut b = p;
                a[i] -= step;
                b[i] += step;
                let fd = (self.immersion.point(b) - self.immersion.point(a)) / (2.0 * step);
                let denom = jet.d[i].norm().max(1e-300);
                worst = worst.max((fd - jet.d[i]).norm() / denom);
            }
        }
        worst
    }

    /// Returns the first sample where the immersion is not regular.
    pub fn first_irregular(&self, samples: &[[f64; 2]]) -> Option<[f64; 2]> {
        samples.iter().copied().find(|&p| {
            matches!(
                self.fundamental_forms(p),
                Err(Error::DegenerateImmersion { .. })
            )
        })
    }
}

/// `eps^{1/3}`: the balanced step for central differences.
pub(crate) fn fd_step_scale() -> f64 {
    f64::EPSILON.cbrt()
}

/// Central difference, falling back to a second-order one-sided formula
/// next to a domain bound.
pub(crate) fn fd_derivative<F>(mut f: F, x: f64, step: f64, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if x - step >= lo && x + step <= hi {
        Ok((f(x + step)? - f(x - step)?) / (2.0 * step))
    } else if x + 2.0 * step <= hi {
        Ok((-3.0 * f(x)? + 4.0 * f(x + step)? - f(x + 2.0 * step)?) / (2.0 * step))
    } else {
        Ok((3.0 * f(x)? - 4.0 * f(x - step)? + f(x - 2.0 * step)?) / (2.0 * step))
    }
}

/// Flat chart `(u1, u2) -> (u1, u2, 0)`.
pub struct PlaneImmersion;

impl Immersion for PlaneImmersion {
    fn jet(&self, p: [f64; 2]) -> Jet {
        Jet {
            x: Vector3::new(p[0], p[1], 0.0),
            d: [Vector3::x(), Vector3::y()],
            dd: [[Vector3::zeros(); 2]; 2],
        }
    }
}

/// Round sphere in polar/azimuthal angles `(theta, phi)`.
pub struct SphereImmersion {
    pub radius: f64,
}

impl Immersion for SphereImmersion {
    fn jet(&self, p: [f64; 2]) -> Jet {
        let r = self.radius;
        let (st, ct) = p[0].sin_cos();
        let (sp, cp) = p[1].sin_cos();
        Jet {
            x: Vector3::new(r * st * cp, r * st * sp, r * ct),
            d: [
                Vector3::new(r * ct * cp, r * ct * sp, -r * st),
                Vector3::new(-r * st * sp, r * st * cp, 0.0),
            ],
            dd: [
                [
                    Vector3::new(-r * st * cp, -r * st * sp, -r * ct),
                    Vector3::new(-r * ct * sp, r * ct * cp, 0.0),
                ],
                [
                    Vector3::new(-r * ct * sp, r * ct * cp, 0.0),
                    Vector3::new(-r * st * cp, -r * st * sp, 0.0),
                ],
            ],
        }
    }
}

/// Graph of `z = h exp(-(u1^2 + u2^2) / w^2)` over the plane.
pub struct GaussianBumpImmersion {
    pub height: f64,
    pub width: f64,
}

impl Immersion for GaussianBumpImmersion {
    fn jet(&self, p: [f64; 2]) -> Jet {
        let w2 = self.width * self.width;
        let e = self.height * (-(p[0] * p[0] + p[1] * p[1]) / w2).exp();
        let zi = [-2.0 * p[0] / w2 * e, -2.0 * p[1] / w2 * e];
        let mut dd = [[Vector3::zeros(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let delta = if i == j { 1.0 } else { 0.0 };
                dd[i][j] = Vector3::new(
                    0.0,
                    0.0,
                    e * (4.0 * p[i] * p[j] / (w2 * w2) - 2.0 * delta / w2),
                );
            }
        }
        Jet {
            x: Vector3::new(p[0], p[1], e),
            d: [Vector3::new(1.0, 0.0, zi[0]), Vector3::new(0.0, 1.0, zi[1])],
            dd,
        }
    }
}

/// Swaps the two parameters of another immersion; flips the normal.
pub struct SwappedImmersion(pub Arc<dyn Immersion>);

impl Immersion for SwappedImmersion {
    fn jet(&self, p: [f64; 2]) -> Jet {
        let j = self.0.jet([p[1], p[0]]);
        Jet {
            x: j.x,
            d: [j.d[1], j.d[0]],
            dd: [[j.dd[1][1], j.dd[1][0]], [j.dd[0][1], j.dd[0][0]]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plane_has_identity_metric_and_zero_second_form() {
        let chart = Chart::new(
            "plane",
            Domain::whole_plane(),
            Arc::new(PlaneImmersion),
            RadialFrame::Polar { center: [0.0; 2] },
        );
        let ff = chart.fundamental_forms([3.0, -1.5]).unwrap();
        assert_eq!(ff.g, Matrix2::identity());
        assert_eq!(ff.h, Matrix2::zeros());
        assert_eq!(ff.normal, Vector3::z());
    }

    #[test]
    fn sphere_principal_curvatures_match_radius() {
        let chart = Chart::new(
            "sphere",
            Domain::new([0.0, 0.0], [std::f64::consts::PI, std::f64::consts::TAU]),
            Arc::new(SphereImmersion { radius: 2.0 }),
            RadialFrame::Rect,
        );
        for &p in &[[0.3, 0.1], [1.2, 2.0], [2.5, 5.0]] {
            let s = chart.curvature_sample(p, false).unwrap();
            // the normal d_theta x d_phi points outwards, so h = -g / R
            assert_relative_eq!(s.k_plus, -0.5, epsilon = 1e-12);
            assert_relative_eq!(s.k_minus, -0.5, epsilon = 1e-12);
            assert_relative_eq!(s.gauss, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn swapping_parameters_flips_signed_curvatures() {
        let bump: Arc<dyn Immersion> = Arc::new(GaussianBumpImmersion {
            height: 1.0,
            width: 2.0,
        });
        let a = Chart::new(
            "bump",
            Domain::whole_plane(),
            bump.clone(),
            RadialFrame::Polar { center: [0.0; 2] },
        );
        let b = Chart::new(
            "bump-swapped",
            Domain::whole_plane(),
            Arc::new(SwappedImmersion(bump)),
            RadialFrame::Polar { center: [0.0; 2] },
        );
        let p = [0.7, -1.1];
        let sa = a.curvature_sample(p, false).unwrap();
        let sb = b.curvature_sample([p[1], p[0]], false).unwrap();
        assert_relative_eq!(sa.mean, -sb.mean, epsilon = 1e-14);
        assert_relative_eq!(sa.gauss, sb.gauss, epsilon = 1e-14);
        assert_relative_eq!(sa.k_plus, -sb.k_minus, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_immersion_is_rejected() {
        let chart = Chart::new(
            "sphere",
            Domain::new([0.0, 0.0], [std::f64::consts::PI, std::f64::consts::TAU]),
            Arc::new(SphereImmersion { radius: 1.0 }),
            RadialFrame::Rect,
        );
        assert!(matches!(
            chart.fundamental_forms([0.0, 1.0]),
            Err(Error::DegenerateImmersion { .. })
        ));
        assert!(chart.first_irregular(&[[1.0, 1.0], [0.0, 0.5]]).is_some());
    }

    #[test]
    fn supplied_derivatives_agree_with_differences() {
        let chart = Chart::new(
            "bump",
            Domain::whole_plane(),
            Arc::new(GaussianBumpImmersion {
                height: 1.0,
                width: 2.0,
            }),
            RadialFrame::Polar { center: [0.0; 2] },
        )
        .with_scale(2.0);
        let samples = [[0.0, 0.0], [1.0, 0.5], [-2.0, 3.0]];
        assert!(chart.derivative_mismatch(&samples) < 1e-6);
    }
}
