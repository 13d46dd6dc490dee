//! Quadrature of the shifted form `Q_1[Psi] = Q[Psi] - kappa_1^2 ||Psi||^2`.
//!
//! The `u`-integration is done pointwise with a fixed Gauss rule (the
//! integrands are entire in `u`); the surface integration is the adaptive
//! radial driver. `int (chi'^2 - kappa^2 chi^2) du` vanishes identically,
//! and that term is dropped before integrating instead of being recovered
//! from cancellation, which over supports of area `e^100` would swamp the
//! signal.

use serde::Serialize;

use super::mollifier::MollifierFamily;
use super::transverse::TransverseMode;
use super::trial::{Bump, TrialFunction};
use crate::error::{Error, Result};
use crate::layer::{LayerGeometry, LocalLayer};
use crate::quadrature::{Estimate, QuadOptions};
use crate::surface::totals::sampled_sup_mean;
use crate::surface::{integrate_radial, Surface};

fn options(tol: f64) -> QuadOptions {
    QuadOptions::absolute(tol).with_max_intervals(20_000)
}

fn combine(value: Estimate, u_err: Estimate) -> Estimate {
    Estimate::new(value.value, value.error + u_err.value.abs() + u_err.error)
}

/// `Q_1` of a trial function by full quadrature over its support.
pub fn q1_quadrature(layer: &LayerGeometry, trial: &TrialFunction, tol: f64) -> Result<Estimate> {
    let surface = &layer.surface;
    let mode = TransverseMode::new(layer.a);
    let frame = surface.frame();
    let [v, e] = integrate_radial(
        surface,
        trial.support_radius(frame),
        &trial.breaks(frame),
        trial.needs_gradient(),
        options(tol),
        |sp| {
            let loc = LocalLayer::new(&sp.sample);
            let jet = trial.jet(sp, &loc);
            let (v, e) = mode.moments(&loc).q1(&jet);
            [v, e]
        },
    )?;
    Ok(combine(v, e))
}

/// `||grad phi_n chi_1||^2 + (phi_n, K phi_n)_g`, the reduced form of
/// `Q_1[phi_n chi_1]`.
pub fn q1_basic_reduced(
    layer: &LayerGeometry,
    family: &MollifierFamily,
    n: u32,
    tol: f64,
) -> Result<Estimate> {
    let mode = TransverseMode::new(layer.a);
    let [r, r2] = family.breaks(n);
    let [grad, curv, e] = integrate_radial(&layer.surface, r2, &[r], false, options(tol), |sp| {
        let (phi, dphi) = family.value(n, sp.rho);
        let loc = LocalLayer::new(&sp.sample);
        let (g, e) = if dphi == 0.0 {
            (0.0, 0.0)
        } else {
            mode.moments(&loc)
                .gradient_sq(loc.components(&(sp.drho * dphi)))
        };
        [g, sp.sample.gauss * phi * phi, e]
    })?;
    Ok(combine(grad + curv, e))
}

/// `Q_1[phi_n chi_1 + eps j u chi_1]`.
pub fn q1_deformed(
    layer: &LayerGeometry,
    family: &MollifierFamily,
    n: u32,
    epsilon: f64,
    bump: &Bump,
    tol: f64,
) -> Result<Estimate> {
    q1_quadrature(
        layer,
        &TrialFunction::deformed(*family, n, epsilon, *bump),
        tol,
    )
}

/// The quadratic `c0 + c1 eps + c2 eps^2` and its minimiser.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpsilonFit {
    pub coefficients: [Estimate; 3],
    pub epsilon: f64,
    pub predicted: Estimate,
    /// `-2 (j, M phi_n)_g`, the limit of `c1` when `phi_n = 1` on the bump.
    pub cross_oracle: Estimate,
}

impl EpsilonFit {
    pub fn at(&self, epsilon: f64) -> Estimate {
        let [c0, c1, c2] = self.coefficients;
        c0 + c1.scale(epsilon) + c2.scale(epsilon * epsilon)
    }

    /// `(j, M)^2 / c2`-type gain `c1^2 / 4 c2`.
    pub fn gain(&self) -> f64 {
        let [_, c1, c2] = self.coefficients;
        c1.value * c1.value / (4.0 * c2.value)
    }
}

/// Polarisation coefficients of the deformed trial and the optimal `eps`.
pub fn optimal_epsilon(
    layer: &LayerGeometry,
    family: &MollifierFamily,
    n: u32,
    bump: &Bump,
    tol: f64,
) -> Result<EpsilonFit> {
    let mode = TransverseMode::new(layer.a);
    let frame = layer.surface.frame();
    let trial = TrialFunction::deformed(*family, n, 1.0, *bump);
    let out = integrate_radial(
        &layer.surface,
        trial.support_radius(frame),
        &trial.breaks(frame),
        false,
        options(tol),
        |sp| {
            let loc = LocalLayer::new(&sp.sample);
            let jet = trial.jet(sp, &loc);
            let [c0, c1, c2] = mode.moments(&loc).q1_split(&jet);
            let (phi, _) = family.value(n, sp.rho);
            [
                c0.0,
                c1.0,
                c2.0,
                c0.1,
                c1.1,
                c2.1,
                -2.0 * jet.b * sp.sample.mean * phi,
            ]
        },
    )?;
    let coefficients = [
        combine(out[0], out[3]),
        combine(out[1], out[4]),
        combine(out[2], out[5]),
    ];
    let cross_oracle = out[6];
    let [c0, c1, c2] = coefficients;
    if cross_oracle.value.abs() <= (100.0 * cross_oracle.error).max(1e-12)
        || c1.value.abs() <= c1.error
    {
        return Err(Error::DegenerateBump {
            cross: cross_oracle.value,
        });
    }
    if !(c2.value > 0.0) {
        return Err(Error::DegenerateBump {
            cross: cross_oracle.value,
        });
    }
    let epsilon = -c1.value / (2.0 * c2.value);
    let predicted = Estimate::new(
        c0.value - c1.value * c1.value / (4.0 * c2.value),
        c0.error + epsilon.abs() * c1.error + epsilon * epsilon * c2.error,
    );
    Ok(EpsilonFit {
        coefficients,
        epsilon,
        predicted,
        cross_oracle,
    })
}

/// Check that finite differences of `M` are consistent at two step sizes.
pub fn check_mean_gradient(surface: &Surface) -> Result<()> {
    let scale = surface.scale();
    let kmax = surface
        .audit_points(64, 20.0)
        .into_iter()
        .filter_map(|p| surface.sample(p, false).ok())
        .map(|s| s.max_abs_curvature())
        .fold(0.0, f64::max);
    let floor = 1e-6 * kmax / scale;
    for p in surface.audit_points(48, 20.0) {
        let mut d = [[0.0; 2]; 2];
        for (k, h) in [1e-4, 4e-4].into_iter().enumerate() {
            for i in 0..2 {
                let h = h * p[i].abs().max(scale);
                let mut a = p;
                let mut b = p;
                a[i] -= h;
                b[i] += h;
                let (ma, mb) = match (surface.mean(a), surface.mean(b)) {
                    (Ok(x), Ok(y)) => (x, y),
                    _ => continue,
                };
                d[k][i] = (mb - ma) / (2.0 * h);
            }
        }
        for i in 0..2 {
            let (x, y) = (d[0][i], d[1][i]);
            if !x.is_finite()
                || !y.is_finite()
                || (x - y).abs() > 1e-2 * x.abs().max(y.abs()).max(floor)
            {
                return Err(Error::GradientUnavailable(format!(
                    "mean-curvature differences disagree at {p:?}: {x:.6e} vs {y:.6e}"
                )));
            }
        }
    }
    Ok(())
}

/// `Q_1[(1 + M u) phi_n chi_1]`.
pub fn q1_weighted(
    layer: &LayerGeometry,
    family: &MollifierFamily,
    n: u32,
    tol: f64,
) -> Result<Estimate> {
    check_mean_gradient(&layer.surface)?;
    q1_quadrature(layer, &TrialFunction::weighted(*family, n), tol)
}

/// Terms of the upper bound on `Q_1[(1 + M u) phi_n chi_1]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightedBound {
    pub total: Estimate,
    /// `int |grad phi_n|_G^2 chi^2 f`.
    pub mollifier_term: Estimate,
    /// `int |grad M|_G^2 phi_n^2 chi^2 f`.
    pub mean_gradient_term: Estimate,
    /// `(phi_n, (K - M^2) phi_n)_g`.
    pub curvature_term: Estimate,
    /// `(phi_n, K M^2 phi_n)_g`.
    pub km2_term: Estimate,
    pub sup_mean: f64,
    /// Coefficient of `km2_term`.
    pub second_moment: f64,
}

pub fn q1_weighted_bound(
    layer: &LayerGeometry,
    family: &MollifierFamily,
    n: u32,
    tol: f64,
) -> Result<WeightedBound> {
    check_mean_gradient(&layer.surface)?;
    let a = layer.a;
    let mode = TransverseMode::new(a);
    let [r, r2] = family.breaks(n);
    let out = integrate_radial(&layer.surface, r2, &[r], true, options(tol), |sp| {
        let (phi, dphi) = family.value(n, sp.rho);
        let loc = LocalLayer::new(&sp.sample);
        let mo = mode.moments(&loc);
        let s = &sp.sample;
        let dm = s
            .grad_mean
            .map(|v| v * phi)
            .unwrap_or_else(|| nalgebra::Vector2::repeat(f64::NAN));
        let (g1, e1) = mo.gradient_sq(loc.components(&(sp.drho * dphi)));
        let (g2, e2) = mo.gradient_sq(loc.components(&dm));
        let p2 = phi * phi;
        [
            g1,
            g2,
            (s.gauss - s.mean * s.mean) * p2,
            s.gauss * s.mean * s.mean * p2,
            e1,
            e2,
        ]
    })?;
    let mollifier_term = combine(out[0], out[4]);
    let mean_gradient_term = combine(out[1], out[5]);
    let (curvature_term, km2_term) = (out[2], out[3]);
    let sup_mean = sampled_sup_mean(&layer.surface, 2048);
    let m2 = mode.second_moment();
    let total = (mollifier_term.scale((1.0 + a * sup_mean).powi(2))
        + mean_gradient_term.scale(a * a))
    .scale(2.0)
        + curvature_term
        + km2_term.scale(m2);
    Ok(WeightedBound {
        total,
        mollifier_term,
        mean_gradient_term,
        curvature_term,
        km2_term,
        sup_mean,
        second_moment: m2,
    })
}

/// Evaluate `c0`-ladder helpers with one family for `n = 0..=n_max`.
pub fn reduced_ladder(
    layer: &LayerGeometry,
    family: &MollifierFamily,
    n_max: u32,
    tol: f64,
) -> Result<Vec<Estimate>> {
    (0..=n_max)
        .map(|n| q1_basic_reduced(layer, family, n, tol))
        .collect()
}

/// The total-curvature limit of a BASIC ladder, by least squares in
/// `x = 1 / ln R_n` (the flat-end energy is exactly linear in `x`).
pub fn extrapolate_basic_limit(family: &MollifierFamily, values: &[Estimate]) -> Option<f64> {
    if values.len() < 3 {
        return None;
    }
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(n, v)| (1.0 / family.inner_radius(n as u32).ln(), v.value))
        .collect();
    let tail = &pts[pts.len().saturating_sub(5)..];
    // quadratic fit c + b x + d x^2 through the last points
    let m = nalgebra::DMatrix::from_fn(tail.len(), 3, |i, j| tail[i].0.powi(j as i32));
    let y = nalgebra::DVector::from_iterator(tail.len(), tail.iter().map(|p| p.1));
    let sol = m.clone().svd(true, true).solve(&y, 1e-14).ok()?;
    Some(sol[0])
}
