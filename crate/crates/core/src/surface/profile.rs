//! Meridian curves of surfaces of revolution, parameterised by arclength.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;

use super::chart::{Chart, Domain, Immersion, Jet, RadialFrame};
use super::spline::CubicSpline;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// `(r, z)` and their first two arclength derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub r: f64,
    pub dr: f64,
    pub ddr: f64,
    pub z: f64,
    pub dz: f64,
    pub ddz: f64,
}

/// A meridian `s -> (r(s), z(s))` with `r'^2 + z'^2 = 1`.
pub trait ProfileCurve: Send + Sync {
    fn eval(&self, s: f64) -> ProfilePoint;

    /// Arclength range; `lo` is `0` for profiles starting on the axis or at a
    /// boundary circle, and `-inf` for two-sided profiles.
    fn s_range(&self) -> (f64, f64);

    fn label(&self) -> String;

    /// Characteristic length of the curved part.
    fn scale(&self) -> f64 {
        1.0
    }

    /// Arclengths where the curvature loses smoothness.
    fn breaks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Upper bound on `int |K| dSigma` over `{|s| > R}`, if known.
    fn tail_bound(&self, _radius: f64) -> Option<f64> {
        None
    }

    /// Meridian curvature `r'z'' - z'r''`.
    fn k_meridian(&self, s: f64) -> f64 {
        let p = self.eval(s);
        p.dr * p.ddz - p.dz * p.ddr
    }

    /// Parallel curvature `z'/r`; on the axis the smooth limit `k_meridian`.
    fn k_parallel(&self, s: f64) -> f64 {
        let p = self.eval(s);
        if p.r > 0.0 {
            p.dz / p.r
        } else {
            self.k_meridian(s)
        }
    }
}

/// Shared handle to a meridian curve.
#[derive(Clone)]
pub struct RevolutionProfile {
    pub curve: Arc<dyn ProfileCurve>,
}

impl fmt::Debug for RevolutionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RevolutionProfile({})", self.curve.label())
    }
}

impl RevolutionProfile {
    pub fn new(curve: impl ProfileCurve + 'static) -> Self {
        Self {
            curve: Arc::new(curve),
        }
    }

    pub fn label(&self) -> String {
        self.curve.label()
    }

    pub fn eval(&self, s: f64) -> ProfilePoint {
        self.curve.eval(s)
    }

    pub fn s_range(&self) -> (f64, f64) {
        self.curve.s_range()
    }

    /// `(k_s, k_theta)`.
    pub fn curvatures(&self, s: f64) -> (f64, f64) {
        (self.curve.k_meridian(s), self.curve.k_parallel(s))
    }

    pub fn two_sided(&self) -> bool {
        self.s_range().0 < 0.0
    }

    /// True when the profile starts on the rotation axis.
    pub fn on_axis(&self) -> bool {
        let (lo, _) = self.s_range();
        lo == 0.0 && self.eval(0.0).r.abs() < 1e-12
    }

    /// Largest `|r'^2 + z'^2 - 1|` over the samples.
    pub fn arclength_defect(&self, samples: &[f64]) -> f64 {
        samples
            .iter()
            .map(|&s| {
                let p = self.eval(s);
                (p.dr * p.dr + p.dz * p.dz - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// First sample with `r <= 0` away from the start of the range.
    pub fn first_nonpositive_radius(&self, samples: &[f64]) -> Option<f64> {
        let (lo, _) = self.s_range();
        samples
            .iter()
            .copied()
            .find(|&s| s > lo.max(0.0) && self.eval(s).r <= 0.0)
    }

    /// The `(s, angle)` chart of the surface swept by the profile.
    pub fn chart(&self) -> Chart {
        let (lo, hi) = self.s_range();
        let curve = self.curve.clone();
        let mut chart = Chart::new(
            self.label(),
            Domain::new([lo, 0.0], [hi, TAU]),
            Arc::new(RevolutionImmersion(self.curve.clone())),
            RadialFrame::Meridian {
                center: 0.0,
                two_sided: self.two_sided(),
            },
        )
        .with_scale(self.curve.scale())
        .with_breaks(self.curve.breaks().into_iter().map(f64::abs).collect());
        if hi.is_infinite() {
            let probe = curve.clone();
            if probe.tail_bound(1.0).is_some() {
                chart = chart.with_decay_hint(Arc::new(move |r| {
                    curve.tail_bound(r).unwrap_or(f64::INFINITY)
                }));
            }
        }
        chart
    }
}

/// `(s, angle) -> (r(s) cos angle, r(s) sin angle, z(s))`.
pub struct RevolutionImmersion(pub Arc<dyn ProfileCurve>);

impl Immersion for RevolutionImmersion {
    fn jet(&self, p: [f64; 2]) -> Jet {
        let q = self.0.eval(p[0]);
        let (sn, cs) = p[1].sin_cos();
        Jet {
            x: Vector3::new(q.r * cs, q.r * sn, q.z),
            d: [
                Vector3::new(q.dr * cs, q.dr * sn, q.dz),
                Vector3::new(-q.r * sn, q.r * cs, 0.0),
            ],
            dd: [
                [
                    Vector3::new(q.ddr * cs, q.ddr * sn, q.ddz),
                    Vector3::new(-q.dr * sn, q.dr * cs, 0.0),
                ],
                [
                    Vector3::new(-q.dr * sn, q.dr * cs, 0.0),
                    Vector3::new(-q.r * cs, -q.r * sn, 0.0),
                ],
            ],
        }
    }
}

/// The plane as the profile `r = s`.
#[derive(Debug, Clone, Copy)]
pub struct PlaneProfile;

impl ProfileCurve for PlaneProfile {
    fn eval(&self, s: f64) -> ProfilePoint {
        ProfilePoint {
            r: s,
            dr: 1.0,
            ddr: 0.0,
            z: 0.0,
            dz: 0.0,
            ddz: 0.0,
        }
    }
    fn s_range(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn label(&self) -> String {
        "plane".into()
    }
    fn tail_bound(&self, _radius: f64) -> Option<f64> {
        Some(0.0)
    }
    fn k_meridian(&self, _s: f64) -> f64 {
        0.0
    }
    fn k_parallel(&self, _s: f64) -> f64 {
        0.0
    }
}

/// Half-infinite circular cylinder of radius `R` starting at a boundary circle.
#[derive(Debug, Clone, Copy)]
pub struct CylinderProfile {
    pub radius: f64,
}

impl ProfileCurve for CylinderProfile {
    fn eval(&self, s: f64) -> ProfilePoint {
        ProfilePoint {
            r: self.radius,
            dr: 0.0,
            ddr: 0.0,
            z: s,
            dz: 1.0,
            ddz: 0.0,
        }
    }
    fn s_range(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn label(&self) -> String {
        format!("cylinder(R={})", self.radius)
    }
    fn scale(&self) -> f64 {
        self.radius
    }
    fn tail_bound(&self, _radius: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// Catenoid `r = sqrt(c^2 + s^2)`, `z = c asinh(s/c)`, both ends.
#[derive(Debug, Clone, Copy)]
pub struct CatenoidProfile {
    pub c: f64,
}

impl ProfileCurve for CatenoidProfile {
    fn eval(&self, s: f64) -> ProfilePoint {
        let c = self.c;
        let r = c.hypot(s);
        let r3 = r * r * r;
        ProfilePoint {
            r,
            dr: s / r,
            ddr: c * c / r3,
            z: c * (s / c).asinh(),
            dz: c / r,
            ddz: -c * s / r3,
        }
    }
    fn s_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn label(&self) -> String {
        format!("catenoid(c={})", self.c)
    }
    fn scale(&self) -> f64 {
        self.c
    }
    fn tail_bound(&self, radius: f64) -> Option<f64> {
        let q = self.c.hypot(radius);
        // 1 - R/q without cancellation
        Some(2.0 * TAU * self.c * self.c / (q * (q + radius)))
    }
    fn k_meridian(&self, s: f64) -> f64 {
        -self.c / (self.c * self.c + s * s)
    }
    fn k_parallel(&self, s: f64) -> f64 {
        self.c / (self.c * self.c + s * s)
    }
}

/// Paraboloid `z = r^2 / (2p)` in arclength from the vertex.
#[derive(Debug, Clone, Copy)]
pub struct ParaboloidProfile {
    pub p: f64,
}

impl ParaboloidProfile {
    fn arclength(&self, r: f64) -> f64 {
        let q = r / self.p;
        0.5 * r * (1.0 + q * q).sqrt() + 0.5 * self.p * q.asinh()
    }

    /// Radius at meridian arclength `s`.
    pub fn radius_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        // s(r) is convex and increasing, so Newton from an upper bound
        // decreases monotonically onto the root.
        let mut r = s.min((2.0 * self.p * s).sqrt());
        for _ in 0..100 {
            let q = r / self.p;
            let step = (self.arclength(r) - s) / (1.0 + q * q).sqrt();
            r -= step;
            if step.abs() <= 4.0 * f64::EPSILON * r {
                break;
            }
        }
        r.max(0.0)
    }
}

impl ProfileCurve for ParaboloidProfile {
    fn eval(&self, s: f64) -> ProfilePoint {
        let p = self.p;
        let r = self.radius_at(s);
        let q = r / p;
        let v = (1.0 + q * q).sqrt();
        let v4 = (1.0 + q * q) * (1.0 + q * q);
        ProfilePoint {
            r,
            dr: 1.0 / v,
            ddr: -q / (p * v4),
            z: 0.5 * r * q,
            dz: q / v,
            ddz: 1.0 / (p * v4),
        }
    }
    fn s_range(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn label(&self) -> String {
        format!("paraboloid(p={})", self.p)
    }
    fn scale(&self) -> f64 {
        self.p
    }
    fn tail_bound(&self, radius: f64) -> Option<f64> {
        // K r = -r'' so the tail is 2 pi r'(R)
        Some(TAU * self.eval(radius).dr)
    }
    fn k_meridian(&self, s: f64) -> f64 {
        let q = self.radius_at(s) / self.p;
        1.0 / (self.p * (1.0 + q * q).powf(1.5))
    }
    fn k_parallel(&self, s: f64) -> f64 {
        let q = self.radius_at(s) / self.p;
        1.0 / (self.p * (1.0 + q * q).sqrt())
    }
}

const CONE_PANELS: usize = 64;

/// A cone of half-angle `theta` whose tip is replaced by a spherical cap of
/// radius `sigma`, blended into the generator by a transition in which the
/// meridian curvature decays smoothly from `1/sigma` to zero.
///
/// The tangent angle `beta` runs from `0` to `pi/2 - theta`. On the cap
/// `beta = s/sigma` up to `s1 = sigma beta_inf / 2`; on `[s1, s2]` with
/// `s2 - s1 = sigma beta_inf` the curvature is `(1 - S(t)) / sigma` with
/// `S` the quintic smoothstep; beyond `s2` the profile is straight.
#[derive(Debug, Clone)]
pub struct SmoothedConeProfile {
    pub theta: f64,
    pub sigma: f64,
    beta_inf: f64,
    s1: f64,
    s2: f64,
    // (r, z) at the start of each transition panel, plus the end point
    table: Vec<(f64, f64)>,
    gl: GaussLegendre,
}

impl SmoothedConeProfile {
    pub fn new(theta: f64, sigma: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(Error::InvalidInput(format!(
                "cone half-angle must lie in (0, pi/2), got {theta}"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "smoothing radius must be positive, got {sigma}"
            )));
        }
        let beta_inf = FRAC_PI_2 - theta;
        let s1 = 0.5 * sigma * beta_inf;
        let s2 = s1 + sigma * beta_inf;
        let mut cone = Self {
            theta,
            sigma,
            beta_inf,
            s1,
            s2,
            table: Vec::with_capacity(CONE_PANELS + 1),
            gl: GaussLegendre::new(16),
        };
        let b1 = s1 / sigma;
        let mut rz = (sigma * b1.sin(), sigma * (1.0 - b1.cos()));
        cone.table.push(rz);
        let h = (s2 - s1) / CONE_PANELS as f64;
        for k in 0..CONE_PANELS {
            let a = s1 + k as f64 * h;
            let (dr, dz) = cone.integrate_tangent(a, a + h);
            rz = (rz.0 + dr, rz.1 + dz);
            cone.table.push(rz);
        }
        Ok(cone)
    }

    /// Arclengths `(s1, s2)` bounding the transition.
    pub fn transition(&self) -> (f64, f64) {
        (self.s1, self.s2)
    }

    /// Tangent angle and its first two derivatives.
    pub fn beta(&self, s: f64) -> (f64, f64, f64) {
        let sigma = self.sigma;
        if s <= self.s1 {
            (s / sigma, 1.0 / sigma, 0.0)
        } else if s >= self.s2 {
            (self.beta_inf, 0.0, 0.0)
        } else {
            let l = self.s2 - self.s1;
            let t = (s - self.s1) / l;
            let t2 = t * t;
            let smooth = t2 * t * (10.0 - 15.0 * t + 6.0 * t2);
            let int_smooth = t2 * t2 * (2.5 - 3.0 * t + t2);
            let beta = self.s1 / sigma + l / sigma * (t - int_smooth);
            let d2 = -30.0 * t2 * (1.0 - t) * (1.0 - t) / (sigma * l);
            (beta, (1.0 - smooth) / sigma, d2)
        }
    }

    fn integrate_tangent(&self, a: f64, b: f64) -> (f64, f64) {
        let mut dr = 0.0;
        let mut dz = 0.0;
        for (x, w) in self.gl.on_interval(a, b) {
            let (s, c) = self.beta(x).0.sin_cos();
            dr += w * c;
            dz += w * s;
        }
        (dr, dz)
    }
}

impl ProfileCurve for SmoothedConeProfile {
    fn eval(&self, s: f64) -> ProfilePoint {
        let (beta, db, _) = self.beta(s);
        let (sb, cb) = beta.sin_cos();
        let (r, z) = if s <= self.s1 {
            let x = s / self.sigma;
            (self.sigma * x.sin(), self.sigma * (1.0 - x.cos()))
        } else if s >= self.s2 {
            let (r2, z2) = self.table[CONE_PANELS];
            (r2 + (s - self.s2) * cb, z2 + (s - self.s2) * sb)
        } else {
            let h = (self.s2 - self.s1) / CONE_PANELS as f64;
            let k = (((s - self.s1) / h) as usize).min(CONE_PANELS - 1);
            let a = self.s1 + k as f64 * h;
            let (r0, z0) = self.table[k];
            let (dr, dz) = self.integrate_tangent(a, s);
            (r0 + dr, z0 + dz)
        };
        ProfilePoint {
            r,
            dr: cb,
            ddr: -sb * db,
            z,
            dz: sb,
            ddz: cb * db,
        }
    }
    fn s_range(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn label(&self) -> String {
        format!("smoothed_cone(theta={}, sigma={})", self.theta, self.sigma)
    }
    fn scale(&self) -> f64 {
        self.sigma
    }
    fn breaks(&self) -> Vec<f64> {
        vec![self.s1, self.s2]
    }
    fn tail_bound(&self, radius: f64) -> Option<f64> {
        // K >= 0 and K r = -r'', so the tail is 2 pi (r'(R) - r'(inf))
        if radius >= self.s2 {
            Some(0.0)
        } else {
            Some(TAU * (self.beta(radius.max(0.0)).0.cos() - self.beta_inf.cos()).max(0.0))
        }
    }
    fn k_meridian(&self, s: f64) -> f64 {
        self.beta(s).1
    }
    fn k_parallel(&self, s: f64) -> f64 {
        if s <= self.s1 {
            1.0 / self.sigma
        } else {
            let p = self.eval(s);
            p.dz / p.r
        }
    }
}

/// Profile interpolated from samples `(t, r, z)` by natural cubic splines
/// and reparameterised by the exact arclength of the spline curve.
#[derive(Debug, Clone)]
pub struct TabulatedProfile {
    name: String,
    r: CubicSpline,
    z: CubicSpline,
    // arclength at each knot
    cumulative: Vec<f64>,
    gl: GaussLegendre,
    scale: f64,
}

impl TabulatedProfile {
    pub fn new(name: impl Into<String>, t: &[f64], r: &[f64], z: &[f64]) -> Result<Self> {
        if r.len() != t.len() || z.len() != t.len() {
            return Err(Error::InvalidInput(
                "tabulated profile columns differ in length".into(),
            ));
        }
        if r.iter().any(|&v| !(v >= 0.0)) || r[1..].iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidInput(
                "tabulated radii must be positive after the first sample".into(),
            ));
        }
        let rs = CubicSpline::natural(t, r)?;
        let zs = CubicSpline::natural(t, z)?;
        let mut prof = Self {
            name: name.into(),
            r: rs,
            z: zs,
            cumulative: vec![0.0; t.len()],
            gl: GaussLegendre::new(16),
            scale: 1.0,
        };
        for i in 1..t.len() {
            let piece = prof.length_between(t[i - 1], t[i]);
            if !(piece > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "tabulated profile is degenerate near t = {}",
                    t[i]
                )));
            }
            prof.cumulative[i] = prof.cumulative[i - 1] + piece;
        }
        prof.scale = (prof.cumulative[t.len() - 1] / 10.0).max(f64::MIN_POSITIVE);
        Ok(prof)
    }

    fn speed(&self, t: f64) -> f64 {
        self.r.eval(t).1.hypot(self.z.eval(t).1)
    }

    fn length_between(&self, a: f64, b: f64) -> f64 {
        // split so that each Gauss rule sees a single polynomial piece
        let knots = self.r.knots();
        let mut pts = vec![a];
        pts.extend(knots.iter().copied().filter(|&k| k > a && k < b));
        pts.push(b);
        pts.windows(2)
            .map(|w| {
                self.gl
                    .on_interval(w[0], w[1])
                    .map(|(x, wt)| wt * self.speed(x))
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Spline parameter at arclength `s`.
    fn parameter_at(&self, s: f64) -> f64 {
        let knots = self.r.knots();
        let s = s.clamp(0.0, self.total_length());
        let i = self
            .cumulative
            .partition_point(|&c| c <= s)
            .clamp(1, knots.len() - 1)
            - 1;
        let (t0, t1) = (knots[i], knots[i + 1]);
        let (c0, c1) = (self.cumulative[i], self.cumulative[i + 1]);
        let mut t = t0 + (s - c0) / (c1 - c0) * (t1 - t0);
        for _ in 0..50 {
            let step = (c0 + self.length_between(t0, t) - s) / self.speed(t);
            t = (t - step).clamp(t0, t1);
            if step.abs() <= 1e-15 * (t1 - t0).max(t.abs()) {
                break;
            }
        }
        t
    }
}

impl ProfileCurve for TabulatedProfile {
    fn eval(&self, s: f64) -> ProfilePoint {
        let t = self.parameter_at(s);
        let (r, r1, r2) = self.r.eval(t);
        let (z, z1, z2) = self.z.eval(t);
        let v = r1.hypot(z1);
        let (tr, tz) = (r1 / v, z1 / v);
        let along = tr * r2 + tz * z2;
        ProfilePoint {
            r,
            dr: tr,
            ddr: (r2 - tr * along) / (v * v),
            z,
            dz: tz,
            ddz: (z2 - tz * along) / (v * v),
        }
    }
    fn s_range(&self) -> (f64, f64) {
        (0.0, self.total_length())
    }
    fn label(&self) -> String {
        self.name.clone()
    }
    fn scale(&self) -> f64 {
        self.scale
    }
}

/// Closed-form total Gauss curvature of a smoothed cone.
pub fn cone_total_curvature(theta: f64) -> f64 {
    TAU * (1.0 - theta.sin())
}
