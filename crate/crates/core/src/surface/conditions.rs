//! Audit of the sufficient conditions for spectrum below the threshold.

use serde::Serialize;

use super::chart::RadialFrame;
use super::totals::{
    classify_growth, default_radii, end_gauss_curvatures, rho_m, total_gauss_curvature,
    total_mean_sq, truncated_integrals, MeanSquare, RhoEstimate,
};
use super::Surface;
use crate::error::Error;
use crate::quadrature::Estimate;

/// Result of a computation kept for reporting, with failures as text.
pub type Outcome<T> = std::result::Result<T, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
    /// Holds for small enough half-width; decided by a numerical search.
    SearchOverA,
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub verdict: Verdict,
    pub note: String,
}

impl Condition {
    fn new(verdict: Verdict, note: impl Into<String>) -> Self {
        Self {
            verdict,
            note: note.into(),
        }
    }
}

/// Everything `check_conditions` consumes, computed once per surface.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceAudit {
    pub total_gauss: Outcome<Estimate>,
    pub end_gauss: Outcome<Vec<Estimate>>,
    pub total_mean_sq: Outcome<MeanSquare>,
    /// Growth analysis of `int |grad_g M|^2 dSigma`.
    pub grad_mean_sq: Outcome<MeanSquare>,
    pub rho: Outcome<RhoEstimate>,
    pub far_curvature: Option<FarCurvature>,
    pub planar: bool,
}

/// Run the surface computations needed by [`check_conditions`].
pub fn audit_surface(surface: &Surface, tol: f64, radii_count: usize) -> SurfaceAudit {
    let radii = default_radii(surface, radii_count);
    let text = |e: Error| e.to_string();
    let rho = rho_m(surface, 256).map_err(text);
    let planar = matches!(&rho, Ok(r) if r.max_abs_k == 0.0);
    let far_curvature = far_curvature(surface);
    let total_gauss = total_gauss_curvature(surface, tol).map_err(text);
    let end_gauss = if surface.is_axisymmetric() {
        end_gauss_curvatures(surface, tol).map_err(text)
    } else {
        Err("ends are resolved only for surfaces of revolution".into())
    };
    let total_mean_sq = total_mean_sq(surface, tol, &radii).map_err(text);
    let grad_mean_sq = truncated_integrals(surface, &radii, 0.1 * tol, true, |sp| {
        sp.sample.grad_mean_norm.unwrap_or(f64::NAN).powi(2)
    })
    .and_then(|t| classify_growth(t, tol))
    .map_err(text);
    SurfaceAudit {
        total_gauss,
        end_gauss,
        total_mean_sq,
        grad_mean_sq,
        rho,
        far_curvature,
        planar,
    }
}

fn far_curvature(surface: &Surface) -> Option<FarCurvature> {
    let max = surface.max_radius();
    if max.is_finite() || matches!(surface.frame(), RadialFrame::Rect) {
        return None;
    }
    let near = surface
        .audit_points(128, 10.0)
        .into_iter()
        .filter_map(|p| surface.sample(p, false).ok())
        .map(|s| s.max_abs_curvature())
        .fold(0.0, f64::max);
    let ring = |radius: f64| {
        (0..8)
            .flat_map(|j| {
                let (fps, n) = surface.frame().points(radius, j as f64 * 0.785);
                fps.into_iter().take(n).collect::<Vec<_>>()
            })
            .filter_map(|fp| surface.sample(fp.p, false).ok())
            .map(|s| s.max_abs_curvature())
            .fold(0.0, f64::max)
    };
    let mid = ring(1e4 * surface.scale());
    let far = ring(1e6 * surface.scale());
    Some(FarCurvature { near, mid, far })
}

/// Sampled `max |k|` over the curved region and on circles at `1e4` and
/// `1e6` characteristic lengths.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FarCurvature {
    pub near: f64,
    pub mid: f64,
    pub far: f64,
}

impl FarCurvature {
    /// Small compared with the curved region and still decaying outwards.
    pub fn vanishes(&self) -> bool {
        self.far == 0.0 || (self.far <= 0.5 * self.mid && self.far <= 1e-2 * self.near)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub half_width: f64,
    pub planar: bool,
    pub h1: Condition,
    pub h2: Condition,
    pub a: Condition,
    pub b: Condition,
    pub c: Condition,
    pub d: Condition,
    /// Some condition holds outright, so spectrum below the threshold is expected.
    pub predicts_discrete_spectrum: bool,
    /// The global no-overlap part of the layer hypothesis is never checked.
    pub overlap_checked: bool,
}

/// Per-condition verdicts for a layer of half-width `a` over `surface`.
pub fn check_conditions(surface: &Surface, a: f64, audit: &SurfaceAudit) -> ConditionReport {
    let h2 = match &audit.rho {
        Ok(r) => match r.rho_m {
            None => Condition::new(
                Verdict::Holds,
                "no curvature sampled; any half-width admissible",
            ),
            Some(rm) if a < 0.95 * rm => Condition::new(
                Verdict::Holds,
                format!("a = {a} < 0.95 rho_m = {:.6} (sampled supremum)", 0.95 * rm),
            ),
            Some(rm) => Condition::new(
                Verdict::Fails,
                format!(
                    "a = {a} >= 0.95 rho_m = {:.6} (sampled supremum)",
                    0.95 * rm
                ),
            ),
        },
        Err(e) => Condition::new(Verdict::Fails, e.clone()),
    };
    let h1 = match (&audit.total_gauss, audit.far_curvature) {
        (Err(e), _) => Condition::new(Verdict::Inconclusive, e.clone()),
        (Ok(_), None) => Condition::new(
            Verdict::Inconclusive,
            "bounded chart; decay at infinity not observable",
        ),
        (Ok(k), Some(fc)) => {
            if fc.vanishes() {
                Condition::new(
                    Verdict::Holds,
                    format!(
                        "K integrable (total {:.6e} +- {:.1e}); |k| far out {:.2e}",
                        k.value, k.error, fc.far
                    ),
                )
            } else {
                Condition::new(
                    Verdict::Fails,
                    format!(
                        "curvatures do not vanish at infinity: |k| = {:.3e} far out",
                        fc.far
                    ),
                )
            }
        }
    };

    if audit.planar {
        let no = || {
            Condition::new(
                Verdict::Fails,
                "surface is a plane; no certificate expected",
            )
        };
        return ConditionReport {
            half_width: a,
            planar: true,
            h1,
            h2,
            a: no(),
            b: no(),
            c: no(),
            d: no(),
            predicts_discrete_spectrum: false,
            overlap_checked: false,
        };
    }

    let cond_a = match &audit.total_gauss {
        Err(e) => Condition::new(Verdict::Inconclusive, e.clone()),
        Ok(k) if k.upper() < 0.0 => Condition::new(
            Verdict::Holds,
            format!("total curvature {:.6} < 0", k.value),
        ),
        Ok(k) if k.lower() <= 0.0 => Condition::new(
            Verdict::Holds,
            format!(
                "critical case: total curvature {:.2e} +- {:.1e} is zero",
                k.value, k.error
            ),
        ),
        Ok(k) => Condition::new(
            Verdict::Fails,
            format!("total curvature {:.6} > 0", k.value),
        ),
    };

    let grad_local = !matches!(&audit.grad_mean_sq, Err(e) if e.contains("non-finite"));
    let cond_b = if grad_local {
        Condition::new(
            Verdict::SearchOverA,
            "grad M locally square-integrable on samples; small half-widths searched numerically",
        )
    } else {
        Condition::new(Verdict::Inconclusive, "grad M not finite on samples")
    };

    let cond_c = match (&audit.total_mean_sq, &audit.grad_mean_sq) {
        (Ok(MeanSquare::Divergent { .. }), Ok(MeanSquare::Converged { value, .. })) => {
            Condition::new(
                Verdict::Holds,
                format!(
                    "total mean curvature diverges; int |grad M|^2 = {:.3e}",
                    value.value
                ),
            )
        }
        (Ok(MeanSquare::Divergent { .. }), Ok(MeanSquare::Divergent { .. })) => {
            Condition::new(Verdict::Fails, "grad M not square-integrable")
        }
        (Ok(MeanSquare::Divergent { .. }), Err(e)) => {
            Condition::new(Verdict::Inconclusive, format!("grad M integrability: {e}"))
        }
        (Ok(MeanSquare::Converged { value, .. }), _) => Condition::new(
            Verdict::Fails,
            format!(
                "total mean curvature squared converges to {:.6}",
                value.value
            ),
        ),
        (Err(e), _) => Condition::new(Verdict::Inconclusive, e.clone()),
    };

    let cond_d = match (&surface.profile, &audit.end_gauss) {
        (None, _) => Condition::new(Verdict::Fails, "not a cylindrically symmetric chart"),
        (Some(_), Err(e)) => Condition::new(Verdict::Inconclusive, e.clone()),
        (Some(_), Ok(ends)) => {
            if ends.iter().any(|e| e.lower() > 0.0) {
                Condition::new(
                    Verdict::Holds,
                    format!(
                        "end total curvatures {:?}",
                        ends.iter().map(|e| e.value).collect::<Vec<_>>()
                    ),
                )
            } else {
                Condition::new(
                    Verdict::Fails,
                    format!(
                        "no end with positive total curvature: {:?}",
                        ends.iter().map(|e| e.value).collect::<Vec<_>>()
                    ),
                )
            }
        }
    };

    let premises = h1.verdict != Verdict::Fails && h2.verdict == Verdict::Holds;
    let predicts = premises
        && [&cond_a, &cond_c, &cond_d]
            .iter()
            .any(|c| c.verdict == Verdict::Holds);
    ConditionReport {
        half_width: a,
        planar: false,
        h1,
        h2,
        a: cond_a,
        b: cond_b,
        c: cond_c,
        d: cond_d,
        predicts_discrete_spectrum: predicts,
        overlap_checked: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::catalog;

    #[test]
    fn catenoid_satisfies_a_only() {
        let s = catalog::catenoid(1.0).unwrap();
        let r = check_conditions(&s, 0.5, &audit_surface(&s, 1e-6, 8));
        assert_eq!(r.a.verdict, Verdict::Holds);
        assert_eq!(r.c.verdict, Verdict::Fails);
        assert_eq!(r.d.verdict, Verdict::Fails);
        assert_eq!(r.h2.verdict, Verdict::Holds);
        assert!(r.predicts_discrete_spectrum);
    }

    #[test]
    fn paraboloid_satisfies_c_and_d() {
        let s = catalog::paraboloid(1.0).unwrap();
        let r = check_conditions(&s, 0.3, &audit_surface(&s, 1e-5, 12));
        assert_eq!(r.a.verdict, Verdict::Fails);
        assert_eq!(r.c.verdict, Verdict::Holds, "{:?}", r.c);
        assert_eq!(r.d.verdict, Verdict::Holds);
        assert!(r.predicts_discrete_spectrum);
    }

    #[test]
    fn plane_predicts_nothing() {
        let s = catalog::plane();
        let r = check_conditions(&s, 1.0, &audit_surface(&s, 1e-6, 6));
        assert!(r.planar);
        assert!(!r.predicts_discrete_spectrum);
        for c in [&r.a, &r.b, &r.c, &r.d] {
            assert_eq!(c.verdict, Verdict::Fails);
        }
    }

    #[test]
    fn cylinder_violates_decay() {
        let s = catalog::cylinder(1.0).unwrap();
        let r = check_conditions(&s, 0.5, &audit_surface(&s, 1e-6, 4));
        assert_eq!(r.h1.verdict, Verdict::Fails);
    }
}
