//! The first transverse Dirichlet mode and the `u`-integrals built on it.

use std::f64::consts::PI;

use crate::layer::LocalLayer;
use crate::quadrature::GaussLegendre;

const FINE: usize = 48;
const COARSE: usize = 24;

#[derive(Debug, Clone)]
struct Nodes {
    u: Vec<f64>,
    w: Vec<f64>,
    chi: Vec<f64>,
    dchi: Vec<f64>,
}

/// `chi_1(u) = a^{-1/2} cos(kappa_1 u)` on `(-a, a)`, `kappa_1 = pi / 2a`.
#[derive(Debug, Clone)]
pub struct TransverseMode {
    pub a: f64,
    pub kappa: f64,
    fine: Nodes,
    coarse: Nodes,
}

impl TransverseMode {
    pub fn new(a: f64) -> Self {
        let kappa = 0.5 * PI / a;
        let nodes = |n: usize| {
            let gl = GaussLegendre::new(n);
            let (u, w): (Vec<f64>, Vec<f64>) = gl.on_interval(-a, a).unzip();
            let norm = a.sqrt().recip();
            let chi = u.iter().map(|&x| norm * (kappa * x).cos()).collect();
            let dchi = u
                .iter()
                .map(|&x| -norm * kappa * (kappa * x).sin())
                .collect();
            Nodes { u, w, chi, dchi }
        };
        Self {
            a,
            kappa,
            fine: nodes(FINE),
            coarse: nodes(COARSE),
        }
    }

    pub fn chi(&self, u: f64) -> f64 {
        (self.kappa * u).cos() / self.a.sqrt()
    }

    pub fn dchi(&self, u: f64) -> f64 {
        -self.kappa * (self.kappa * u).sin() / self.a.sqrt()
    }

    pub fn threshold(&self) -> f64 {
        self.kappa * self.kappa
    }

    /// `int u^2 chi_1^2 du = (pi^2 - 6) / (12 kappa_1^2)`.
    pub fn second_moment(&self) -> f64 {
        (PI * PI - 6.0) / (12.0 * self.kappa * self.kappa)
    }

    /// All `u`-integrals entering `Q_1[(A + B u) chi_1]` at one surface point.
    pub fn moments(&self, loc: &LocalLayer) -> UMoments {
        let fine = self.moments_with(&self.fine, loc);
        let coarse = self.moments_with(&self.coarse, loc);
        // polynomial-trigonometric moments are integrated exactly by both
        // rules, so only the rational weights carry a truncation error; the
        // remaining difference is roundoff and would only add noise
        let mut err = [0.0; MOMENTS];
        for k in 0..6 {
            err[k] = (fine[k] - coarse[k]).abs();
        }
        UMoments { v: fine, err }
    }

    fn moments_with(&self, nodes: &Nodes, loc: &LocalLayer) -> [f64; MOMENTS] {
        let k2 = self.kappa * self.kappa;
        let mut m = [0.0; MOMENTS];
        for i in 0..nodes.u.len() {
            let (u, w, c, dc) = (nodes.u[i], nodes.w[i], nodes.chi[i], nodes.dchi[i]);
            let f = loc.f(u);
            let gw = loc.gradient_weights(u);
            let t = dc * dc - k2 * c * c;
            let c2 = c * c;
            m[0] += w * c2 * gw[0];
            m[1] += w * u * c2 * gw[0];
            m[2] += w * u * u * c2 * gw[0];
            m[3] += w * c2 * gw[1];
            m[4] += w * u * c2 * gw[1];
            m[5] += w * u * u * c2 * gw[1];
            // f - 1 without cancellation against the leading 1
            let fm1 = u * (u * loc.k[0] * loc.k[1] - loc.k[0] - loc.k[1]);
            m[6] += w * fm1 * t;
            m[7] += w * f * (c * dc + u * t);
            m[8] += w * f * (c2 + 2.0 * u * c * dc + u * u * t);
            m[9] += w * f * c2;
            m[10] += w * f * u * c2;
            m[11] += w * f * u * u * c2;
        }
        m
    }
}

pub const MOMENTS: usize = 12;

/// `u`-integrals at a surface point (fine Gauss rule, with the fine/coarse
/// difference as error for the rational moments).
///
/// Indices: `0..3` are `int u^p chi^2 f/(1-uk_+)^2`, `3..6` the same for
/// `k_-`; `6` is `int (f-1)(chi'^2 - kappa^2 chi^2)`, `7` is
/// `int f (chi chi' + u (chi'^2 - kappa^2 chi^2))`, `8` is
/// `int f (chi^2 + 2u chi chi' + u^2 (chi'^2 - kappa^2 chi^2))`, and
/// `9..12` are `int u^p chi^2 f`.
#[derive(Debug, Clone, Copy)]
pub struct UMoments {
    pub v: [f64; MOMENTS],
    pub err: [f64; MOMENTS],
}

/// Coefficients of a trial `(A + B u) chi_1` at one point: the values of
/// `A`, `B` and the principal-frame components of their differentials.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialJet {
    pub a: f64,
    pub da: [f64; 2],
    pub b: f64,
    pub db: [f64; 2],
}

impl UMoments {
    fn combine(&self, c: &[f64; MOMENTS]) -> (f64, f64) {
        let mut v = 0.0;
        let mut e = 0.0;
        for k in 0..MOMENTS {
            v += c[k] * self.v[k];
            e += c[k].abs() * self.err[k];
        }
        (v, e)
    }

    /// Density of `Q_1`, integrated over `u`, with the exactly vanishing
    /// `A^2 int (chi'^2 - kappa^2 chi^2) du` removed.
    pub fn q1(&self, t: &TrialJet) -> (f64, f64) {
        let mut c = [0.0; MOMENTS];
        for side in 0..2 {
            let (a, b) = (t.da[side], t.db[side]);
            c[3 * side] = a * a;
            c[3 * side + 1] = 2.0 * a * b;
            c[3 * side + 2] = b * b;
        }
        c[6] = t.a * t.a;
        c[7] = 2.0 * t.a * t.b;
        c[8] = t.b * t.b;
        self.combine(&c)
    }

    /// Polarisation pieces of `Q_1[(A + eps B u) chi]`: the coefficients of
    /// `eps^0`, `eps^1`, `eps^2` with their errors.
    pub fn q1_split(&self, t: &TrialJet) -> [(f64, f64); 3] {
        let a_only = TrialJet {
            b: 0.0,
            db: [0.0; 2],
            ..*t
        };
        let b_only = TrialJet {
            a: 0.0,
            da: [0.0; 2],
            ..*t
        };
        let c0 = self.q1(&a_only);
        let c2 = self.q1(&b_only);
        let mut c = [0.0; MOMENTS];
        for side in 0..2 {
            c[3 * side + 1] = 2.0 * t.da[side] * t.db[side];
        }
        c[7] = 2.0 * t.a * t.b;
        [c0, self.combine(&c), c2]
    }

    /// `int |grad A|_G^2 chi^2 dOmega`-density (no `B`).
    pub fn gradient_sq(&self, da: [f64; 2]) -> (f64, f64) {
        let mut c = [0.0; MOMENTS];
        c[0] = da[0] * da[0];
        c[3] = da[1] * da[1];
        self.combine(&c)
    }

    /// `int (A + B u)^2 chi^2 f du`.
    pub fn norm_sq(&self, t: &TrialJet) -> (f64, f64) {
        let mut c = [0.0; MOMENTS];
        c[9] = t.a * t.a;
        c[10] = 2.0 * t.a * t.b;
        c[11] = t.b * t.b;
        self.combine(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::CurvatureSample;
    use approx::assert_relative_eq;

    #[test]
    fn mode_is_normalised_eigenfunction() {
        let m = TransverseMode::new(0.7);
        let gl = GaussLegendre::new(64);
        let norm: f64 = gl
            .on_interval(-0.7, 0.7)
            .map(|(u, w)| w * m.chi(u).powi(2))
            .sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
        assert!(m.chi(0.7).abs() < 1e-15 && m.chi(-0.7).abs() < 1e-15);
        for &u in &[-0.5, 0.1, 0.66] {
            let h = 1e-4;
            let dd = (m.chi(u + h) - 2.0 * m.chi(u) + m.chi(u - h)) / (h * h);
            assert_relative_eq!(-dd, m.threshold() * m.chi(u), max_relative = 1e-6);
            let d = (m.chi(u + h) - m.chi(u - h)) / (2.0 * h);
            assert_relative_eq!(d, m.dchi(u), max_relative = 1e-7);
        }
    }

    #[test]
    fn moments_match_hand_derived_identities() {
        // f = 1 - 2Mu + Ku^2: int (f-1)(chi'^2-k^2chi^2) = K, the cross moment is -M,
        // and the quadratic one is 1 + 4 K m2 with m2 the second moment of chi^2
        let a = 0.4;
        let m = TransverseMode::new(a);
        let (k1, k2) = (0.9, -0.3);
        let s = CurvatureSample::diagonal(k1, k2, 1.0);
        let mo = m.moments(&LocalLayer::new(&s));
        let (gauss, mean) = (k1 * k2, 0.5 * (k1 + k2));
        let m2 = m.second_moment();
        assert_relative_eq!(
            m2,
            a * a * (PI * PI - 6.0) / (3.0 * PI * PI),
            max_relative = 1e-14
        );
        assert_relative_eq!(mo.v[6], gauss, epsilon = 1e-13);
        assert_relative_eq!(mo.v[7], -mean, epsilon = 1e-13);
        assert_relative_eq!(mo.v[8], 1.0 + 4.0 * gauss * m2, epsilon = 1e-13);
        assert_relative_eq!(mo.v[9], 1.0 + gauss * m2, epsilon = 1e-13);
        assert!(mo.err.iter().all(|&e| e < 1e-12));
    }

    #[test]
    fn weighted_transverse_part_has_factor_four() {
        // int [(d_u psi)^2 - k^2 psi^2] f du for psi = (1 + M u) chi equals
        // K - M^2 + 4 m2 K M^2
        let m = TransverseMode::new(0.3);
        let (k1, k2) = (1.1, 0.4);
        let s = CurvatureSample::diagonal(k1, k2, 1.0);
        let mo = m.moments(&LocalLayer::new(&s));
        let (gauss, mean) = (k1 * k2, 0.5 * (k1 + k2));
        let (v, _) = mo.q1(&TrialJet {
            a: 1.0,
            da: [0.0; 2],
            b: mean,
            db: [0.0; 2],
        });
        let m2 = m.second_moment();
        assert_relative_eq!(
            v,
            gauss - mean * mean + 4.0 * m2 * gauss * mean * mean,
            epsilon = 1e-12
        );
    }
}
