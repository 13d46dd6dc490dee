//! The layer `Sigma x (-a, a)` with metric `G = g (I - u L)^2 + du^2`.
//!
//! Everything is evaluated pointwise from chart data; no mesh of the layer
//! is ever built. Global injectivity of `(x, u) -> x + u n(x)` is not
//! checked: the layer is treated as the abstract Riemannian product.

use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::surface::chart::{Chart, Immersion, Jet};
use crate::surface::{rho_m, CurvatureSample, RhoEstimate, Surface};

/// Safety factor applied to the sampled curvature radius.
pub const RHO_SAFETY: f64 = 0.95;

#[derive(Debug, Clone)]
pub struct LayerGeometry {
    pub surface: Surface,
    pub a: f64,
    pub rho: RhoEstimate,
}

impl LayerGeometry {
    /// Builds the layer and samples `rho_m`; does not validate.
    pub fn new(surface: Surface, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "half-width must be positive, got {a}"
            )));
        }
        let rho = rho_m(&surface, 512)?;
        Ok(Self { surface, a, rho })
    }

    pub fn kappa1(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 / self.a
    }

    /// Essential-spectrum threshold `kappa_1^2`.
    pub fn threshold(&self) -> f64 {
        self.kappa1().powi(2)
    }

    /// Sandwich constants `(C-, C+) = ((1 - a/rho_m)^2, (1 + a/rho_m)^2)`.
    pub fn sandwich(&self) -> (f64, f64) {
        let q = self.rho.rho_m.map_or(0.0, |r| self.a / r);
        ((1.0 - q).powi(2), (1.0 + q).powi(2))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub a: f64,
    /// Sampled supremum estimate; `None` when flat.
    pub rho_m: Option<f64>,
    pub safety_factor: f64,
    pub min_volume_factor: f64,
    pub samples: usize,
    pub overlap_checked: bool,
    pub note: &'static str,
}

/// Checks `a < 0.95 rho_m` and `f > 0` on a sample grid.
pub fn validate(layer: &LayerGeometry) -> Result<HypothesisReport> {
    let a = layer.a;
    if let Some(rm) = layer.rho.rho_m {
        if !(a < RHO_SAFETY * rm) {
            let p = layer.rho.at;
            return Err(Error::HypothesisViolated {
                reason: format!("a = {a} is not below {RHO_SAFETY} x sampled rho_m = {rm:.6}"),
                at: Some([p[0], p[1], a]),
            });
        }
    }
    let pts = layer.surface.audit_points(400, 40.0);
    let mut min_f = f64::INFINITY;
    let mut worst = None;
    let mut n = 0;
    for p in pts {
        let Ok(s) = layer.surface.sample(p, false) else {
            continue;
        };
        for u in [-a, -0.5 * a, 0.5 * a, a] {
            n += 1;
            let f = volume_factor(&s, u);
            if f < min_f {
                min_f = f;
                worst = Some([p[0], p[1], u]);
            }
        }
    }
    if !(min_f > 0.0) {
        return Err(Error::HypothesisViolated {
            reason: format!("volume factor {min_f:.3e} <= 0"),
            at: worst,
        });
    }
    Ok(HypothesisReport {
        a,
        rho_m: layer.rho.rho_m,
        safety_factor: RHO_SAFETY,
        min_volume_factor: min_f,
        samples: n,
        overlap_checked: false,
        note: "rho_m is a sampled supremum; overlap of the layer is not checked (abstract product metric is used)",
    })
}

pub fn volume_factor(s: &CurvatureSample, u: f64) -> f64 {
    (1.0 - u * s.k_plus) * (1.0 - u * s.k_minus)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricAtPoint {
    /// `g (I - uL)^2` in chart coordinates.
    pub g_surface: [[f64; 2]; 2],
    pub f: f64,
    pub mean_u: f64,
    pub gauss_u: f64,
    pub c_minus: f64,
    pub c_plus: f64,
}

impl MetricAtPoint {
    pub fn g_surface_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(
            self.g_surface[0][0],
            self.g_surface[0][1],
            self.g_surface[1][0],
            self.g_surface[1][1],
        )
    }
}

/// `G_surface = g - 2u h + u^2 h g^{-1} h`, which is `(I - uL)^T g (I - uL)`.
pub fn surface_block(s: &CurvatureSample, u: f64) -> Matrix2<f64> {
    let gi = s.g.try_inverse().unwrap_or_else(Matrix2::zeros);
    let m = s.g - 2.0 * u * s.h + u * u * s.h * gi * s.h;
    0.5 * (m + m.transpose())
}

pub fn metric_at(layer: &LayerGeometry, p: [f64; 2], u: f64) -> Result<MetricAtPoint> {
    if !(u.abs() < layer.a) {
        return Err(Error::InvalidInput(format!(
            "|u| = {} must be below a = {}",
            u.abs(),
            layer.a
        )));
    }
    let s = layer.surface.sample(p, false)?;
    let f = volume_factor(&s, u);
    if !(f > 0.0) {
        return Err(Error::HypothesisViolated {
            reason: format!("volume factor {f:.3e} <= 0"),
            at: Some([p[0], p[1], u]),
        });
    }
    let gs = surface_block(&s, u);
    let (c_minus, c_plus) = layer.sandwich();
    Ok(MetricAtPoint {
        g_surface: [[gs[(0, 0)], gs[(0, 1)]], [gs[(1, 0)], gs[(1, 1)]]],
        f,
        mean_u: (s.mean - s.gauss * u) / f,
        gauss_u: s.gauss / f,
        c_minus,
        c_plus,
    })
}

/// `|grad Psi|_G^2` for the differential `(d1 Psi, d2 Psi, du Psi)`.
pub fn inverse_metric_gradient(
    layer: &LayerGeometry,
    p: [f64; 2],
    u: f64,
    d: [f64; 3],
) -> Result<f64> {
    let m = metric_at(layer, p, u)?;
    let v = Vector2::new(d[0], d[1]);
    let gi = m
        .g_surface_matrix()
        .try_inverse()
        .ok_or_else(|| Error::HypothesisViolated {
            reason: "singular layer metric".into(),
            at: Some([p[0], p[1], u]),
        })?;
    Ok(v.dot(&(gi * v)) + d[2] * d[2])
}

/// The full 3x3 layer metric, for cross-checks.
pub fn full_metric(m: &MetricAtPoint) -> Matrix3<f64> {
    let g = m.g_surface_matrix();
    Matrix3::new(
        g[(0, 0)],
        g[(0, 1)],
        0.0,
        g[(1, 0)],
        g[(1, 1)],
        0.0,
        0.0,
        0.0,
        1.0,
    )
}

/// Pointwise layer quantities at one surface sample, in the principal frame.
///
/// With `e+-` the `g`-orthonormal principal directions, `G` is diagonal
/// with entries `(1 - u k+-)^2`, so `|v|^2_{G^-1} = sum (v e+-)^2 / (1 - u k+-)^2`.
#[derive(Debug, Clone, Copy)]
pub struct LocalLayer {
    pub k: [f64; 2],
    pub frame: [Vector2<f64>; 2],
}

impl LocalLayer {
    pub fn new(s: &CurvatureSample) -> Self {
        Self {
            k: [s.k_plus, s.k_minus],
            frame: s.frame,
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        (1.0 - u * self.k[0]) * (1.0 - u * self.k[1])
    }

    /// Components of a parameter-space differential in the principal frame.
    pub fn components(&self, v: &Vector2<f64>) -> [f64; 2] {
        [v.dot(&self.frame[0]), v.dot(&self.frame[1])]
    }

    /// Weights `f / (1 - u k+-)^2` multiplying squared frame components.
    pub fn gradient_weights(&self, u: f64) -> [f64; 2] {
        let a = 1.0 - u * self.k[0];
        let b = 1.0 - u * self.k[1];
        [b / a, a / b]
    }
}

/// The parallel surface `x + u n(x)` of a chart. First derivatives follow
/// from the Weingarten equations; second derivatives are central
/// differences of those, which is enough for an independent check of `M_u`.
pub struct OffsetImmersion {
    pub chart: Chart,
    pub u: f64,
}

impl OffsetImmersion {
    fn first(&self, p: [f64; 2]) -> (Vector3<f64>, [Vector3<f64>; 2]) {
        let jet = self.chart.immersion.jet(p);
        let ff = self
            .chart
            .fundamental_forms(p)
            .expect("offset of a regular chart");
        let gi = ff.g.try_inverse().expect("regular metric");
        let l = gi * ff.h; // L^nu_mu acting on coordinates
        let mut d = [Vector3::zeros(); 2];
        for (mu, dm) in d.iter_mut().enumerate() {
            // d_mu n = -L^nu_mu d_nu x
            let dn = -(l[(0, mu)] * jet.d[0] + l[(1, mu)] * jet.d[1]);
            *dm = jet.d[mu] + self.u * dn;
        }
        (jet.x + self.u * ff.normal, d)
    }
}

impl Immersion for OffsetImmersion {
    fn jet(&self, p: [f64; 2]) -> Jet {
        let (x, d) = self.first(p);
        let mut dd = [[Vector3::zeros(); 2]; 2];
        for nu in 0..2 {
            let dom = &self.chart.domain;
            let room = (p[nu] - dom.lo[nu]).min(dom.hi[nu] - p[nu]);
            let h = (1e-5 * p[nu].abs().max(self.chart.scale)).min(0.5 * room);
            let mut a = p;
            let mut b = p;
            a[nu] -= h;
            b[nu] += h;
            let (_, da) = self.first(a);
            let (_, db) = self.first(b);
            for mu in 0..2 {
                dd[mu][nu] = (db[mu] - da[mu]) / (2.0 * h);
            }
        }
        // symmetrise
        let off = 0.5 * (dd[0][1] + dd[1][0]);
        dd[0][1] = off;
        dd[1][0] = off;
        Jet { x, d, dd }
    }
}

/// Mean curvature of the parallel surface at distance `u`, computed on the
/// explicitly offset immersion.
pub fn offset_mean_curvature(surface: &Surface, p: [f64; 2], u: f64) -> Result<f64> {
    let chart = Chart::new(
        "offset",
        surface.chart.domain,
        Arc::new(OffsetImmersion {
            chart: surface.chart.clone(),
            u,
        }),
        surface.chart.frame,
    )
    .with_scale(surface.chart.scale);
    chart.mean_curvature(p)
}
