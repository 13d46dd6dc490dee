//! Total curvatures, the curvature radius and the Cohn-Vossen bound.

use std::f64::consts::TAU;

use serde::Serialize;

use super::chart::RadialFrame;
use super::integrate::{integrate_annulus, integrate_radial, integrate_rect};
use super::Surface;
use crate::error::{Error, Result};
use crate::quadrature::{Estimate, QuadOptions};

/// Growth per radius doubling above which a truncated integral counts as
/// growing.
pub const DIVERGENCE_GROWTH: f64 = 0.10;
/// Consecutive growing doublings needed to call an integral divergent.
pub const DIVERGENCE_STREAK: usize = 3;
/// Largest ratio of successive increments accepted as a geometric tail.
pub const GEOMETRIC_RATIO: f64 = 0.5;

const MAX_TAIL_DOUBLINGS: usize = 1100;

/// Truncated integral of a nonnegative density, indexed by radius.
#[derive(Debug, Clone, Serialize)]
pub struct Truncation {
    pub radius: f64,
    pub value: Estimate,
}

/// Outcome of the growth analysis of a truncated integral.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MeanSquare {
    Converged {
        value: Estimate,
        truncated: Vec<Truncation>,
    },
    Divergent {
        truncated: Vec<Truncation>,
    },
}

impl MeanSquare {
    pub fn is_divergent(&self) -> bool {
        matches!(self, MeanSquare::Divergent { .. })
    }

    pub fn truncated(&self) -> &[Truncation] {
        match self {
            MeanSquare::Converged { truncated, .. } | MeanSquare::Divergent { truncated } => {
                truncated
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TotalCurvatures {
    pub total_gauss: Estimate,
    pub total_mean_sq: MeanSquare,
}

/// Smallest radius `R = scale * 2^k` whose decay-hint tail is at most `budget`.
pub fn tail_radius(surface: &Surface, budget: f64) -> Result<f64> {
    let max = surface.max_radius();
    if max.is_finite() {
        return Ok(max);
    }
    if surface.chart.decay_hint.is_none() {
        return Err(Error::TailUnbounded {
            tol: budget,
            reason: "unbounded chart without a decay hint".into(),
        });
    }
    let mut r = surface.scale();
    for _ in 0..MAX_TAIL_DOUBLINGS {
        let tail = surface.tail_bound(r).unwrap_or(f64::INFINITY);
        if tail <= budget {
            return Ok(r);
        }
        r *= 2.0;
        if !r.is_finite() {
            break;
        }
    }
    Err(Error::TailUnbounded {
        tol: budget,
        reason: "decay hint never falls below the tail budget".into(),
    })
}

/// `int_Sigma K dSigma` with total error (quadrature plus tail) at most `tol`.
pub fn total_gauss_curvature(surface: &Surface, tol: f64) -> Result<Estimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if matches!(surface.frame(), RadialFrame::Rect) {
        return integrate_rect(surface, QuadOptions::absolute(tol), |sp| sp.sample.gauss);
    }
    let r = tail_radius(surface, 0.5 * tol)?;
    let tail = surface.tail_bound(r).unwrap_or(0.0);
    let [k] = integrate_radial(
        surface,
        r,
        &[],
        false,
        QuadOptions::absolute(0.5 * tol).with_max_intervals(20000),
        |sp| [sp.sample.gauss],
    )?;
    Ok(Estimate::new(k.value, k.error + tail))
}

/// Total Gauss curvature of each end of a two-sided surface of revolution,
/// split at the waist `s = 0`.
pub fn end_gauss_curvatures(surface: &Surface, tol: f64) -> Result<Vec<Estimate>> {
    let Some(profile) = &surface.profile else {
        return Err(Error::InvalidInput(
            "ends are only resolved for surfaces of revolution".into(),
        ));
    };
    if !profile.two_sided() {
        return Ok(vec![total_gauss_curvature(surface, tol)?]);
    }
    let r = tail_radius(surface, 0.5 * tol)?;
    let tail = 0.5 * surface.tail_bound(r).unwrap_or(0.0);
    let [up, down] = integrate_radial(
        surface,
        r,
        &[],
        false,
        QuadOptions::absolute(0.25 * tol),
        |sp| {
            if sp.p[0] >= 0.0 {
                [sp.sample.gauss, 0.0]
            } else {
                [0.0, sp.sample.gauss]
            }
        },
    )?;
    Ok(vec![
        Estimate::new(up.value, up.error + tail),
        Estimate::new(down.value, down.error + tail),
    ])
}

/// Default truncation radii: `scale * 2^k`, `k = 0..count`, within the chart.
pub fn default_radii(surface: &Surface, count: usize) -> Vec<f64> {
    let max = surface.max_radius();
    let mut out: Vec<f64> = (0..count)
        .map(|k| surface.scale() * 2f64.powi(k as i32))
        .filter(|&r| r <= max)
        .collect();
    if out.is_empty() && max.is_finite() {
        out.push(max);
    }
    out
}

/// Truncated integrals `int_{rho <= R_i} density dSigma`, accumulated ring by ring.
pub fn truncated_integrals<F>(
    surface: &Surface,
    radii: &[f64],
    tol: f64,
    gradient: bool,
    density: F,
) -> Result<Vec<Truncation>>
where
    F: Fn(&super::SurfacePoint) -> f64,
{
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.first().is_some_and(|&r| !(r > 0.0)) {
        return Err(Error::InvalidInput(
            "truncation radii must be positive and increasing".into(),
        ));
    }
    let opts = QuadOptions::absolute(tol / (radii.len().max(1) as f64))
        .with_rel(1e-10)
        .with_max_intervals(20000);
    let mut acc = Estimate::default();
    let mut lo = 0.0;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let [ring] = integrate_annulus(surface, lo, r, &[], gradient, opts, |sp| [density(sp)])?;
        acc = acc + ring;
        out.push(Truncation {
            radius: r,
            value: acc,
        });
        lo = r;
    }
    Ok(out)
}

/// Classify a sequence of truncated integrals of a nonnegative density.
///
/// Divergent: the relative increase normalised per radius doubling exceeds
/// [`DIVERGENCE_GROWTH`] over the last [`DIVERGENCE_STREAK`] steps.
/// Converged: the last increment is within `tol` and not larger than the
/// one before, or the last three increments shrink by at least
/// [`GEOMETRIC_RATIO`] each and the geometric tail is added to the error.
/// Anything else is inconclusive.
pub fn classify_growth(truncated: Vec<Truncation>, tol: f64) -> Result<MeanSquare> {
    let n = truncated.len();
    if n < 2 {
        return Err(Error::Inconclusive(
            "need at least two truncation radii".into(),
        ));
    }
    let growth = |i: usize| -> f64 {
        let (a, b) = (&truncated[i - 1], &truncated[i]);
        if a.value.value <= 0.0 {
            return if b.value.value > tol {
                f64::INFINITY
            } else {
                0.0
            };
        }
        let doublings = (b.radius / a.radius).log2();
        (b.value.value / a.value.value).powf(1.0 / doublings) - 1.0
    };
    if n > DIVERGENCE_STREAK && (n - DIVERGENCE_STREAK..n).all(|i| growth(i) > DIVERGENCE_GROWTH) {
        return Ok(MeanSquare::Divergent { truncated });
    }
    let last = truncated[n - 1].value.value - truncated[n - 2].value.value;
    let before = if n >= 3 {
        truncated[n - 2].value.value - truncated[n - 3].value.value
    } else {
        f64::INFINITY
    };
    if last.abs() <= tol && last.abs() <= before.abs() + tol * 1e-3 {
        let v = truncated[n - 1].value;
        return Ok(MeanSquare::Converged {
            value: Estimate::new(v.value, v.error + last.abs()),
            truncated,
        });
    }
    // increments shrinking at least geometrically: bound the tail by the series
    if n >= 4 {
        let inc = |i: usize| truncated[i].value.value - truncated[i - 1].value.value;
        let (d1, d2, d3) = (inc(n - 3), inc(n - 2), inc(n - 1));
        if d1 > 0.0 && d2 > 0.0 && d3 >= 0.0 {
            let q = (d2 / d1).max(d3 / d2);
            if q <= GEOMETRIC_RATIO {
                let tail = d3 * q / (1.0 - q);
                let v = truncated[n - 1].value;
                return Ok(MeanSquare::Converged {
                    value: Estimate::new(v.value + tail, v.error + tail),
                    truncated,
                });
            }
        }
    }
    Err(Error::Inconclusive(format!(
        "truncated integral neither settles nor grows steadily: last increment {last:.3e}, last growth per doubling {:.3}",
        growth(n - 1)
    )))
}

/// `int_Sigma M^2 dSigma` over increasing truncation radii.
pub fn total_mean_sq(surface: &Surface, tol: f64, radii: &[f64]) -> Result<MeanSquare> {
    let table = truncated_integrals(surface, radii, 0.1 * tol, false, |sp| {
        sp.sample.mean * sp.sample.mean
    })?;
    classify_growth(table, tol)
}

/// Sampled estimate of the curvature radius `rho_m = 1 / sup |k|`.
#[derive(Debug, Clone, Serialize)]
pub struct RhoEstimate {
    /// `None` when no curvature was found (the plane).
    pub rho_m: Option<f64>,
    pub max_abs_k: f64,
    pub at: [f64; 2],
    pub samples: usize,
    pub qualifier: &'static str,
}

/// Curvature cap above which curvatures are considered unbounded.
const CURVATURE_CAP: f64 = 1e8;

/// Estimate `rho_m` from `budget` samples followed by a local pattern
/// search around the worst one. This is an upper estimate of the true
/// `rho_m` (a sampled supremum).
pub fn rho_m(surface: &Surface, budget: usize) -> Result<RhoEstimate> {
    let budget = budget.max(16);
    let mut pts = surface.audit_points(budget / 2, 40.0);
    let frame = surface.frame();
    let max = surface.max_radius();
    // log-spaced radii along a few rays reach far into the ends
    let outer: Vec<f64> = if matches!(frame, RadialFrame::Rect) {
        Vec::new()
    } else {
        let hi = max.min(1e6 * surface.scale());
        let lo = 1e-3 * surface.scale();
        let n = budget / 2;
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    };
    let rays = if surface.is_axisymmetric() { 1 } else { 4 };
    let mut ray_values: Vec<Vec<f64>> = vec![Vec::new(); rays];
    for (j, vals) in ray_values.iter_mut().enumerate() {
        let angle = 0.7 + j as f64 * TAU / rays as f64;
        for &rho in &outer {
            let (fps, count) = frame.points(rho.min(max), angle);
            for fp in fps.iter().take(count) {
                pts.push(fp.p);
            }
            if let Ok(s) = surface.sample(fps[0].p, false) {
                vals.push(s.max_abs_curvature());
            }
        }
    }
    let mut best = (0.0f64, pts[0]);
    let mut count = 0;
    for &p in &pts {
        let s = match surface.sample(p, false) {
            Ok(s) => s,
            Err(Error::DegenerateImmersion { .. }) => continue,
            Err(e) => return Err(e),
        };
        count += 1;
        let k = s.max_abs_curvature();
        if !k.is_finite() || k > CURVATURE_CAP {
            return Err(Error::UnboundedCurvature {
                max_abs_k: k,
                radius: frame.rho(p),
            });
        }
        if k > best.0 {
            best = (k, p);
        }
    }
    // monotone growth towards the edge along a ray
    for vals in &ray_values {
        let n = vals.len();
        if n >= 6
            && vals[n - 6..].windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-9))
            && vals[n - 1] >= best.0
        {
            return Err(Error::UnboundedCurvature {
                max_abs_k: vals[n - 1],
                radius: outer[n - 1],
            });
        }
    }
    if best.0 == 0.0 {
        return Ok(RhoEstimate {
            rho_m: None,
            max_abs_k: 0.0,
            at: best.1,
            samples: count,
            qualifier: "sampled supremum",
        });
    }
    // pattern search refinement
    let dom = surface.chart.domain;
    let mut step = 0.05 * surface.scale();
    let (mut k_best, mut p_best) = best;
    while step > 1e-7 * surface.scale() {
        let mut improved = false;
        for dir in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            let q = [p_best[0] + step * dir[0], p_best[1] + step * dir[1]];
            if !dom.contains(q) {
                continue;
            }
            if let Ok(s) = surface.sample(q, false) {
                count += 1;
                if s.max_abs_curvature() > k_best {
                    k_best = s.max_abs_curvature();
                    p_best = q;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(RhoEstimate {
        rho_m: Some(1.0 / k_best),
        max_abs_k: k_best,
        at: p_best,
        samples: count,
        qualifier: "sampled supremum",
    })
}

/// Cohn-Vossen bound `2 pi (2 - 2h - e)` for genus `h` and `e` ends.
pub fn cohn_vossen_bound(genus: u32, ends: u32) -> Result<f64> {
    if ends < 1 {
        return Err(Error::InvalidInput(
            "a non-compact surface has at least one end".into(),
        ));
    }
    Ok(TAU * (2.0 - 2.0 * genus as f64 - ends as f64))
}

/// Largest sampled `|M|` over the audit points of a surface.
pub fn sampled_sup_mean(surface: &Surface, budget: usize) -> f64 {
    surface
        .audit_points(budget, 40.0)
        .into_iter()
        .filter_map(|p| surface.sample(p, false).ok())
        .map(|s| s.mean.abs())
        .fold(0.0, f64::max)
}
