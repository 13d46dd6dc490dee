//! Cross-module invariants, checked by property tests.

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use crate::eigensolver::{
    assemble, smoothed_cone, solve_lowest, Refinement, SymmetricLayerProblem,
};
use crate::layer::{metric_at, offset_mean_curvature, LayerGeometry};
use crate::surface::{catalog, Surface};
use crate::variational::{q1_quadrature, MollifierFamily, TrialFunction};

fn surfaces() -> Vec<(Surface, f64)> {
    vec![
        (catalog::gaussian_bump(1.0, 2.0).unwrap(), 0.3),
        (catalog::catenoid(1.0).unwrap(), 0.5),
        (catalog::paraboloid(1.0).unwrap(), 0.3),
        (catalog::smoothed_cone(PI / 6.0, 1.2).unwrap(), 1.0),
    ]
}

/// Parameter point at frame radius `rho` and angle `t`.
fn point(s: &Surface, rho: f64, t: f64) -> [f64; 2] {
    let (fps, _) = s.frame().points(rho, t);
    fps[0].p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_element_and_sandwich(which in 0usize..4, rho in 0.0f64..6.0, t in 0.0f64..TAU, v in -0.99f64..0.99) {
        let (s, a) = surfaces().swap_remove(which);
        let layer = LayerGeometry::new(s.clone(), a).unwrap();
        let p = point(&s, rho, t);
        let u = v * a;
        let m = metric_at(&layer, p, u).unwrap();
        let g = s.sample(p, false).unwrap().g;
        let big = m.g_surface_matrix();
        let det_rel = (big.determinant() - m.f * m.f * g.determinant()).abs() / g.determinant();
        prop_assert!(det_rel < 1e-10, "det mismatch {det_rel:e}");
        // C- g <= G <= C+ g as quadratic forms
        let li = g.cholesky().unwrap().l().try_inverse().unwrap();
        let ev = (li * big * li.transpose()).symmetric_eigen().eigenvalues;
        let (cm, cp) = layer.sandwich();
        for e in ev.iter() {
            prop_assert!(*e >= cm - 1e-10 && *e <= cp + 1e-10, "{e} outside [{cm}, {cp}]");
        }
    }

    #[test]
    fn parallel_surface_mean_curvature(which in 0usize..4, rho in 0.2f64..5.0, t in 0.0f64..TAU, v in -0.9f64..0.9) {
        let (s, a) = surfaces().swap_remove(which);
        let layer = LayerGeometry::new(s.clone(), a).unwrap();
        let p = point(&s, rho, t);
        let u = v * a;
        let m = metric_at(&layer, p, u).unwrap();
        let oracle = offset_mean_curvature(&s, p, u).unwrap();
        prop_assert!((m.mean_u - oracle).abs() < 1e-6, "{} vs {oracle}", m.mean_u);
    }

    #[test]
    fn mollifier_is_a_monotone_cutoff(n in 0u32..12, rho in 0.0f64..1e6, r0 in 1.5f64..20.0) {
        let f = MollifierFamily::new(r0).unwrap();
        let (phi, dphi) = f.value(n, rho);
        prop_assert!((0.0..=1.0).contains(&phi));
        prop_assert!(dphi <= 0.0);
        if rho <= f.inner_radius(n) {
            prop_assert_eq!(phi, 1.0);
        }
        if rho >= f.outer_radius(n) {
            prop_assert_eq!(phi, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Reflecting the surface flips the normal; the layer, and so the form, is unchanged.
    #[test]
    fn form_is_invariant_under_reflection(h in 0.3f64..1.5, n in 0u32..3) {
        let a = 0.2;
        let up = LayerGeometry::new(catalog::gaussian_bump(h, 2.0).unwrap(), a).unwrap();
        let down = LayerGeometry::new(catalog::gaussian_bump(-h, 2.0).unwrap(), a).unwrap();
        let fam = MollifierFamily::for_surface(&up.surface);
        let trial = TrialFunction::basic(fam, n);
        let x = q1_quadrature(&up, &trial, 1e-8).unwrap();
        let y = q1_quadrature(&down, &trial, 1e-8).unwrap();
        prop_assert!((x.value - y.value).abs() <= x.error + y.error + 1e-9, "{x:?} vs {y:?}");
    }

    /// The lowest discrete eigenvalue bounds every Rayleigh quotient.
    #[test]
    fn rayleigh_quotients_bound_the_ground_state(c in prop::collection::vec(-1.0f64..1.0, 6)) {
        let prof = smoothed_cone(PI / 4.0, 1.2).unwrap();
        let f = assemble(&SymmetricLayerProblem::new(prof, 1.0, 0, Refinement::new(16.0, 64, 8)).unwrap()).unwrap();
        let lo = solve_lowest(&f, 1).unwrap().pairs[0].lambda;
        let x = f.interpolate(|s, u| {
            let bump = (-(s - 2.0 * c[0].abs()).powi(2) / (1.0 + c[1].abs())).exp();
            bump * (PI * u / 2.0).cos() * (1.0 + c[2] * u + c[3] * s.sin()) + 0.1 * c[4] * (s * u * c[5]).sin()
        });
        prop_assert!(f.rayleigh_quotient(&x) >= lo * (1.0 - 1e-12));
    }
}

#[test]
fn truncation_only_lowers_eigenvalues_when_extended() {
    let prof = smoothed_cone(PI / 4.0, 1.2).unwrap();
    let lowest = |len: f64, n_s: usize| {
        let f = assemble(
            &SymmetricLayerProblem::new(prof.clone(), 1.0, 0, Refinement::new(len, n_s, 16))
                .unwrap(),
        )
        .unwrap();
        solve_lowest(&f, 1).unwrap().pairs[0].lambda
    };
    // same cells, nested spaces
    let l = [lowest(15.0, 60), lowest(30.0, 120), lowest(60.0, 240)];
    assert!(l[1] <= l[0] && l[2] <= l[1], "{l:?}");
}
