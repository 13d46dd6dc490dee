//! Angular-mode reduction and bilinear finite elements on the `(s, u)` strip.

use rayon::prelude::*;
use serde::Serialize;

use super::band::BandMatrix;
use crate::error::{Error, Result};
use crate::layer::{validate, LayerGeometry};
use crate::quadrature::GaussLegendre;
use crate::surface::{RevolutionProfile, Surface};

/// Coefficients of the mode-`m` form: `Q = int c_s psi_s^2 + c_u psi_u^2 + c_phi psi^2`
/// and `||psi||^2 = int w psi^2`, per unit angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub w: f64,
    pub c_s: f64,
    pub c_u: f64,
    pub c_phi: f64,
}

#[derive(Debug, Clone)]
pub struct ModeCoefficients {
    pub profile: RevolutionProfile,
    pub a: f64,
    pub m: u32,
}

/// Separation of variables `psi(s, u) e^{i m alpha}` on a layer of revolution.
pub fn reduce(profile: &RevolutionProfile, a: f64, m: u32) -> ModeCoefficients {
    ModeCoefficients {
        profile: profile.clone(),
        a,
        m,
    }
}

impl ModeCoefficients {
    pub fn at(&self, s: f64, u: f64) -> Result<Coefficients> {
        let r = self.profile.eval(s).r;
        let (ks, kt) = self.profile.curvatures(s);
        let (ps, pt) = (1.0 - u * ks, 1.0 - u * kt);
        let w = ps * pt * r;
        let c_phi = if self.m == 0 {
            0.0
        } else if r > 0.0 {
            (self.m * self.m) as f64 * w / (r * r * pt * pt)
        } else {
            return Err(Error::AxisSingularity { s });
        };
        Ok(Coefficients {
            w,
            c_s: w / (ps * ps),
            c_u: w,
            c_phi,
        })
    }
}

/// Grid and truncation of one discrete problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Refinement {
    /// Truncation length `S` (the strip is `s in (0, S)` or `(-S, S)`).
    pub length: f64,
    pub n_s: usize,
    pub n_u: usize,
}

impl Refinement {
    pub fn new(length: f64, n_s: usize, n_u: usize) -> Self {
        Self { length, n_s, n_u }
    }
}

#[derive(Debug, Clone)]
pub struct SymmetricLayerProblem {
    pub profile: RevolutionProfile,
    pub a: f64,
    pub m: u32,
    pub grid: Refinement,
}

/// Default smallness of `a max|k|` required at the truncation.
pub const PLANARITY_TOL: f64 = 0.1;

impl SymmetricLayerProblem {
    /// Checks grid sizes, truncation range and asymptotic planarity at `S`;
    /// the curvature-radius hypothesis is checked by [`validate_layer`].
    pub fn new(profile: RevolutionProfile, a: f64, m: u32, grid: Refinement) -> Result<Self> {
        if grid.n_s < 8 || grid.n_u < 8 {
            return Err(Error::GridTooCoarse {
                n_s: grid.n_s,
                n_u: grid.n_u,
            });
        }
        if !(a > 0.0) || !(grid.length > 0.0) {
            return Err(Error::InvalidInput(
                "half-width and truncation length must be positive".into(),
            ));
        }
        let (lo, hi) = profile.s_range();
        let s_min = if profile.two_sided() {
            -grid.length
        } else {
            lo
        };
        if grid.length > hi || s_min < lo {
            return Err(Error::SupportEscape {
                needed: grid.length,
                available: hi,
            });
        }
        let (ks, kt) = profile.curvatures(grid.length);
        let far = a * ks.abs().max(kt.abs());
        if far > PLANARITY_TOL {
            return Err(Error::HypothesisViolated {
                reason: format!(
                    "a |k| = {far:.3} at the truncation s = {} exceeds {PLANARITY_TOL}",
                    grid.length
                ),
                at: Some([grid.length, 0.0, 0.0]),
            });
        }
        Ok(Self {
            profile,
            a,
            m,
            grid,
        })
    }

    pub fn threshold(&self) -> f64 {
        (std::f64::consts::FRAC_PI_2 / self.a).powi(2)
    }

    /// Start of the strip in `s`.
    pub fn s_start(&self) -> f64 {
        if self.profile.two_sided() {
            -self.grid.length
        } else {
            self.profile.s_range().0
        }
    }

    /// The axis is a natural boundary only for `m = 0` on profiles through it.
    pub fn natural_start(&self) -> bool {
        !self.profile.two_sided() && self.profile.on_axis() && self.m == 0
    }
}

/// Checks the curvature-radius hypothesis for the layer of a profile.
pub fn validate_layer(profile: &RevolutionProfile, a: f64) -> Result<()> {
    let layer = LayerGeometry::new(Surface::from_profile(profile.clone()), a)?;
    validate(&layer).map(|_| ())
}

/// Stiffness `A` and mass `B` after Dirichlet elimination.
#[derive(Debug, Clone)]
pub struct DiscreteForm {
    pub a: BandMatrix,
    pub b: BandMatrix,
    pub s_nodes: Vec<f64>,
    pub u_nodes: Vec<f64>,
    /// Index of the first free `s` node.
    pub s_first: usize,
    pub free_s: usize,
    pub free_u: usize,
    pub m: u32,
    pub grid: Refinement,
    pub threshold: f64,
}

impl DiscreteForm {
    pub fn dim(&self) -> usize {
        self.free_s * self.free_u
    }

    fn dof(&self, i: usize, j: usize) -> Option<usize> {
        let fi = i.checked_sub(self.s_first)?;
        let fj = j.checked_sub(1)?;
        (fi < self.free_s && fj < self.free_u).then_some(fi * self.free_u + fj)
    }

    /// Nodal interpolant of `f(s, u)` on the free nodes.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for i in 0..self.s_nodes.len() {
            for j in 0..self.u_nodes.len() {
                if let Some(k) = self.dof(i, j) {
                    x[k] = f(self.s_nodes[i], self.u_nodes[j]);
                }
            }
        }
        x
    }

    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        dot(x, &self.a.mul_vec(x)) / dot(x, &self.b.mul_vec(x))
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Galerkin matrices with 2x2 Gauss quadrature per cell.
pub fn assemble(problem: &SymmetricLayerProblem) -> Result<DiscreteForm> {
    let g = problem.grid;
    let coeffs = reduce(&problem.profile, problem.a, problem.m);
    let s0 = problem.s_start();
    let hs = (g.length - s0) / g.n_s as f64;
    let hu = 2.0 * problem.a / g.n_u as f64;
    let s_nodes: Vec<f64> = (0..=g.n_s).map(|i| s0 + i as f64 * hs).collect();
    let u_nodes: Vec<f64> = (0..=g.n_u).map(|j| -problem.a + j as f64 * hu).collect();
    let s_first = if problem.natural_start() { 0 } else { 1 };
    let free_s = g.n_s - s_first;
    let free_u = g.n_u - 1;
    let mut form = DiscreteForm {
        a: BandMatrix::zeros(free_s * free_u, free_u + 1),
        b: BandMatrix::zeros(free_s * free_u, free_u + 1),
        s_nodes,
        u_nodes,
        s_first,
        free_s,
        free_u,
        m: problem.m,
        grid: g,
        threshold: problem.threshold(),
    };

    let gl = GaussLegendre::new(2);
    let local: Vec<(usize, usize, [[f64; 4]; 4], [[f64; 4]; 4])> = (0..g.n_s * g.n_u)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / g.n_u, cell % g.n_u);
            let (sa, ua) = (form.s_nodes[i], form.u_nodes[j]);
            let mut ka = [[0.0; 4]; 4];
            let mut mb = [[0.0; 4]; 4];
            for (xs, ws) in gl.on_interval(0.0, 1.0) {
                for (xu, wu) in gl.on_interval(0.0, 1.0) {
                    let c = coeffs.at(sa + xs * hs, ua + xu * hu)?;
                    let wt = ws * wu * hs * hu;
                    // local nodes: (0,0), (1,0), (0,1), (1,1) in (s, u)
                    let n = [
                        (1.0 - xs) * (1.0 - xu),
                        xs * (1.0 - xu),
                        (1.0 - xs) * xu,
                        xs * xu,
                    ];
                    let ds = [-(1.0 - xu) / hs, (1.0 - xu) / hs, -xu / hs, xu / hs];
                    let du = [-(1.0 - xs) / hu, -xs / hu, (1.0 - xs) / hu, xs / hu];
                    for p in 0..4 {
                        for q in 0..4 {
                            ka[p][q] += wt
                                * (c.c_s * ds[p] * ds[q]
                                    + c.c_u * du[p] * du[q]
                                    + c.c_phi * n[p] * n[q]);
                            mb[p][q] += wt * c.w * n[p] * n[q];
                        }
                    }
                }
            }
            Ok((i, j, ka, mb))
        })
        .collect::<Result<_>>()?;

    for (i, j, ka, mb) in local {
        let nodes = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
        for p in 0..4 {
            let Some(dp) = form.dof(nodes[p].0, nodes[p].1) else {
                continue;
            };
            for q in 0..=p {
                let Some(dq) = form.dof(nodes[q].0, nodes[q].1) else {
                    continue;
                };
                form.a.add(dp, dq, ka[p][q]);
                form.b.add(dp, dq, mb[p][q]);
            }
        }
    }
    Ok(form)
}
