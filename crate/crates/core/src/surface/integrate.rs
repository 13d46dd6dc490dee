//! Integration of pointwise surface quantities over geodesic-like disks.
//!
//! Radial charts are integrated as an adaptive 1D problem in the radius;
//! each radius carries either one evaluation times `2 pi` (surfaces of
//! revolution, where every integrand used in this crate is axisymmetric)
//! or a spectrally convergent periodic trapezoid rule in the angle. Long
//! radial segments are mapped through `t = ln rho`, which keeps algebraic
//! tails and logarithmic cutoffs smooth in the integration variable.

use std::cell::RefCell;
use std::f64::consts::TAU;

use nalgebra::Vector2;

use super::chart::{CurvatureSample, RadialFrame};
use super::Surface;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, periodic_trapezoid, Estimate, QuadOptions, QuadratureError};

/// Everything an integrand may need at one surface point.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub p: [f64; 2],
    pub rho: f64,
    /// Parameter-space differential of the radial coordinate.
    pub drho: Vector2<f64>,
    pub sample: CurvatureSample,
}

const ANGULAR_REL_TOL: f64 = 1e-9;
const ANGULAR_MAX_NODES: usize = 1 << 12;

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    v0: f64,
    log: bool,
}

fn segments(points: &[f64]) -> (Vec<Segment>, Vec<f64>) {
    let mut segs = Vec::new();
    let mut v = 0.0;
    let mut vpoints = vec![0.0];
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let log = a > 0.0 && b / a > 1.5;
        let len = if log { (b / a).ln() } else { b - a };
        segs.push(Segment { a, b, v0: v, log });
        v += len;
        vpoints.push(v);
    }
    (segs, vpoints)
}

fn map(segs: &[Segment], v: f64) -> (f64, f64) {
    let k = segs.partition_point(|s| s.v0 <= v).saturating_sub(1);
    let s = segs[k];
    if s.log {
        let rho = (s.a * (v - s.v0).exp()).min(s.b);
        (rho, rho)
    } else {
        ((s.a + (v - s.v0)).min(s.b), 1.0)
    }
}

/// Radial breakpoints: the chart's own, the caller's, and the chart scale.
fn radial_points(surface: &Surface, rho_min: f64, rho_max: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![rho_min, rho_max];
    pts.push(surface.scale());
    pts.extend(surface.chart.radial_breaks.iter().copied());
    pts.extend(extra.iter().copied());
    pts.retain(|&x| x.is_finite() && x >= rho_min && x <= rho_max);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    pts
}

/// Integrate `f * dSigma` over `{rho <= rho_max}`.
///
/// `extra_breaks` are radii where the integrand (not the geometry) has
/// kinks. Samples carry the mean-curvature gradient when `gradient` is set.
pub fn integrate_radial<const N: usize, F>(
    surface: &Surface,
    rho_max: f64,
    extra_breaks: &[f64],
    gradient: bool,
    opts: QuadOptions,
    f: F,
) -> Result<[Estimate; N]>
where
    F: Fn(&SurfacePoint) -> [f64; N],
{
    integrate_annulus(surface, 0.0, rho_max, extra_breaks, gradient, opts, f)
}

/// Integrate `f * dSigma` over `{rho_min <= rho <= rho_max}`.
pub fn integrate_annulus<const N: usize, F>(
    surface: &Surface,
    rho_min: f64,
    rho_max: f64,
    extra_breaks: &[f64],
    gradient: bool,
    opts: QuadOptions,
    f: F,
) -> Result<[Estimate; N]>
where
    F: Fn(&SurfacePoint) -> [f64; N],
{
    let frame = surface.frame();
    if matches!(frame, RadialFrame::Rect) {
        return Err(Error::InvalidInput("chart has no radial frame".into()));
    }
    let available = surface.max_radius();
    if rho_max > available * (1.0 + 1e-12) {
        return Err(Error::SupportEscape {
            needed: rho_max,
            available,
        });
    }
    if !(rho_max > rho_min) {
        return Ok([Estimate::default(); N]);
    }
    let pts = radial_points(surface, rho_min.max(0.0), rho_max, extra_breaks);
    let (segs, vpoints) = segments(&pts);
    let v_total = vpoints.last().copied().unwrap_or(1.0).max(1e-300);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let axisymmetric = surface.is_axisymmetric();

    let at = |rho: f64, angle: f64| -> [f64; N] {
        let (fps, count) = frame.points(rho, angle);
        let mut out = [0.0; N];
        for fp in fps.iter().take(count) {
            match surface.sample(fp.p, gradient) {
                Ok(sample) => {
                    let sp = SurfacePoint {
                        p: fp.p,
                        rho,
                        drho: fp.drho,
                        sample,
                    };
                    let w = sample.sqrt_det_g * fp.jac;
                    let v = f(&sp);
                    for k in 0..N {
                        out[k] += v[k] * w;
                    }
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    return [f64::NAN; N];
                }
            }
        }
        out
    };

    let integrand = |v: f64| -> [f64; N] {
        let (rho, jac) = map(&segs, v);
        let ring = if axisymmetric {
            at(rho, 0.0).map(|x| x * TAU)
        } else {
            // a ring error below this shifts the radial integral by under 1% of its tolerance
            let floor = 1e-2 * opts.abs_tol / (v_total * jac);
            let (val, _, converged) =
                periodic_trapezoid(|a| at(rho, a), ANGULAR_REL_TOL, floor, ANGULAR_MAX_NODES);
            if !converged {
                failure.borrow_mut().get_or_insert(Error::QuadratureStall(
                    QuadratureError::Stall {
                        intervals: ANGULAR_MAX_NODES,
                        error: f64::NAN,
                        tolerance: ANGULAR_REL_TOL,
                    },
                ));
            }
            val
        };
        ring.map(|x| x * jac)
    };

    let result = integrate(integrand, &vpoints, opts);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(result?)
}

/// Nested adaptive integration of `f * dSigma` over a bounded chart.
pub fn integrate_rect<F>(surface: &Surface, opts: QuadOptions, f: F) -> Result<Estimate>
where
    F: Fn(&SurfacePoint) -> f64,
{
    let dom = surface.chart.domain;
    if !dom.is_bounded() {
        return Err(Error::InvalidInput(
            "rectangular integration needs a bounded domain".into(),
        ));
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let width = dom.hi[0] - dom.lo[0];
    let inner_opts = QuadOptions {
        abs_tol: opts.abs_tol / (4.0 * width),
        ..opts
    };
    let outer = |x: f64| -> [f64; 2] {
        let inner = integrate(
            |y: f64| -> [f64; 1] {
                let p = [x, y];
                match surface.sample(p, false) {
                    Ok(sample) => {
                        let sp = SurfacePoint {
                            p,
                            rho: f64::NAN,
                            drho: Vector2::zeros(),
                            sample,
                        };
                        [f(&sp) * sample.sqrt_det_g]
                    }
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        [f64::NAN]
                    }
                }
            },
            &[dom.lo[1], dom.hi[1]],
            inner_opts,
        );
        match inner {
            Ok([e]) => [e.value, e.error],
            Err(e) => {
                failure.borrow_mut().get_or_insert(e.into());
                [f64::NAN; 2]
            }
        }
    };
    let res = integrate(
        outer,
        &[dom.lo[0], dom.hi[0]],
        QuadOptions {
            abs_tol: opts.abs_tol / 2.0,
            ..opts
        },
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let [v, e] = res?;
    Ok(Estimate::new(v.value, v.error + e.value.abs() + e.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::catalog;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn disk_areas() {
        let opts = QuadOptions::absolute(1e-10);
        let plane = catalog::plane();
        let [a] = integrate_radial(&plane, 3.0, &[], false, opts, |_| [1.0]).unwrap();
        assert_relative_eq!(a.value, 9.0 * PI, max_relative = 1e-12);
        let flat = catalog::plane_chart();
        let [a] = integrate_radial(&flat, 3.0, &[], false, opts, |_| [1.0]).unwrap();
        assert_relative_eq!(a.value, 9.0 * PI, max_relative = 1e-12);
        // catenoid strip |s| <= 2 has area 2 pi (s r + c^2 asinh(s/c)) evaluated at 2
        let cat = catalog::catenoid(1.0).unwrap();
        let [a] = integrate_radial(&cat, 2.0, &[], false, opts, |_| [1.0]).unwrap();
        let exact = TAU * (2.0 * 5f64.sqrt() + 2f64.asinh());
        assert_relative_eq!(a.value, exact, max_relative = 1e-10);
    }

    #[test]
    fn log_mapped_segments_handle_wide_ranges() {
        let plane = catalog::plane();
        // int_{rho <= R} 1/(1+rho^2)^2 dA = pi R^2/(1+R^2)
        let r = 1e6;
        let [a] = integrate_radial(&plane, r, &[], false, QuadOptions::absolute(1e-10), |sp| {
            [1.0 / (1.0 + sp.rho * sp.rho).powi(2)]
        })
        .unwrap();
        assert_relative_eq!(a.value, PI * r * r / (1.0 + r * r), max_relative = 1e-10);
        assert!(a.error < 1e-9);
    }

    #[test]
    fn support_escape_is_reported() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let r: Vec<f64> = t.clone();
        let z = vec![0.0; 10];
        let tab = catalog::tabulated("flat", &t, &r, &z).unwrap();
        let err = integrate_radial(&tab, 20.0, &[], false, QuadOptions::absolute(1e-8), |_| {
            [1.0]
        })
        .unwrap_err();
        assert!(matches!(err, Error::SupportEscape { .. }));
    }

    #[test]
    fn sphere_rectangle_area() {
        let s = catalog::sphere(2.0).unwrap();
        let a = integrate_rect(&s, QuadOptions::absolute(1e-9), |_| 1.0).unwrap();
        assert_relative_eq!(a.value, 16.0 * PI, max_relative = 1e-10);
    }
}
