//! Shift-invert Lanczos for the pencil `A x = lambda B x`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::problem::{dot, DiscreteForm, Refinement};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub shift: f64,
    /// Bound on `||A x - lambda B x|| / ||B x||`.
    pub residual_tol: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            shift: 0.0,
            residual_tol: 1e-8,
            max_steps: 800,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub residual: f64,
    pub m: u32,
    /// 1-based position within the mode.
    pub index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// The requested lowest pairs, ascending, whether or not below threshold.
    pub pairs: Vec<EigenPair>,
    pub threshold: f64,
    pub grid: Refinement,
    pub dim: usize,
    pub steps: usize,
}

impl Spectrum {
    pub fn below_threshold(&self) -> impl Iterator<Item = &EigenPair> {
        self.pairs.iter().filter(move |p| p.lambda < self.threshold)
    }

    pub fn lowest(&self) -> Option<f64> {
        self.pairs.first().map(|p| p.lambda)
    }
}

/// Lowest `k` eigenpairs with the default options.
pub fn solve_lowest(form: &DiscreteForm, k: usize) -> Result<Spectrum> {
    solve_lowest_with(form, k, LanczosOptions::default())
}

fn b_norm(form: &DiscreteForm, x: &[f64]) -> f64 {
    dot(x, &form.b.mul_vec(x)).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Lanczos on `(A - shift B)^{-1} B` in the `B` inner product, with full
/// reorthogonalisation. Convergence is judged on true residuals.
pub fn solve_lowest_with(form: &DiscreteForm, k: usize, opts: LanczosOptions) -> Result<Spectrum> {
    let n = form.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenpairs of a pencil of dimension {n}"
        )));
    }
    let fact = form.a.shifted(opts.shift, &form.b).ldlt()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nq = b_norm(form, &q);
    q.iter_mut().for_each(|x| *x /= nq);

    let max_steps = opts.max_steps.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = Vec::new();
    for j in 0..max_steps {
        let bq = form.b.mul_vec(&q);
        let mut w = bq.clone();
        fact.solve_in_place(&mut w);
        let a = dot(&w, &bq);
        axpy(&mut w, -a, &q);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(&mut w, -b, prev);
        }
        basis.push(q);
        alpha.push(a);
        // two passes; the B-norm of the result follows from orthonormality
        let mut norm2 = 0.0;
        for _ in 0..2 {
            let bw = form.b.mul_vec(&w);
            norm2 = dot(&w, &bw);
            for v in &basis {
                let c = dot(v, &bw);
                axpy(&mut w, -c, v);
                norm2 -= c * c;
            }
        }
        let b = norm2.max(0.0).sqrt();
        let m = j + 1;
        let breakdown = !(b > 1e-13 * alpha.iter().fold(0.0f64, |s, x| s.max(x.abs())));
        if m >= k && (m % 5 == 0 || breakdown || m == max_steps) {
            let pairs = ritz_pairs(form, &basis, &alpha, &beta, k, opts.shift);
            if pairs.iter().all(|p| p.residual <= opts.residual_tol) {
                return Ok(Spectrum {
                    pairs,
                    threshold: form.threshold,
                    grid: form.grid,
                    dim: n,
                    steps: m,
                });
            }
            last = pairs;
        }
        if breakdown {
            break;
        }
        beta.push(b);
        q = w.iter().map(|x| x / b).collect();
    }
    let worst = last.iter().map(|p| p.residual).fold(0.0, f64::max);
    Err(Error::SolverStall(format!(
        "{k} pairs of mode m = {} not converged after {} Lanczos steps (worst residual {worst:.2e})",
        form.m,
        basis.len()
    )))
}

fn ritz_pairs(
    form: &DiscreteForm,
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    k: usize,
    shift: f64,
) -> Vec<EigenPair> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    // lambda = shift + 1/theta; the lowest lambda above the shift have the largest theta
    let mut order: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let n = form.dim();
    let mut pairs: Vec<EigenPair> = order
        .into_iter()
        .take(k)
        .map(|i| {
            let mut x = vec![0.0; n];
            for (c, v) in eig.eigenvectors.column(i).iter().zip(basis) {
                axpy(&mut x, *c, v);
            }
            let lambda = shift + 1.0 / eig.eigenvalues[i];
            let ax = form.a.mul_vec(&x);
            let bx = form.b.mul_vec(&x);
            let r: f64 = ax
                .iter()
                .zip(&bx)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            let nb = dot(&bx, &bx).sqrt();
            EigenPair {
                lambda,
                residual: r / nb,
                m: form.m,
                index: 0,
            }
        })
        .collect();
    pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    for (i, p) in pairs.iter_mut().enumerate() {
        p.index = i + 1;
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::problem::{assemble, SymmetricLayerProblem};
    use crate::surface::catalog;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn flat_strip_matches_separable_spectrum() {
        // cylinder of huge radius: flat strip (0, S) x (-a, a) up to O(a/R)
        let prof = catalog::cylinder(1e9).unwrap().profile.unwrap();
        let (s_len, a) = (4.0, 1.0);
        let pr = SymmetricLayerProblem::new(prof, a, 0, Refinement::new(s_len, 160, 40)).unwrap();
        let f = assemble(&pr).unwrap();
        let sp = solve_lowest(&f, 3).unwrap();
        let exact = |i: f64, j: f64| (i * PI / s_len).powi(2) + (j * PI / (2.0 * a)).powi(2);
        let mut want = vec![exact(1.0, 1.0), exact(2.0, 1.0), exact(3.0, 1.0)];
        want.sort_by(f64::total_cmp);
        for (p, w) in sp.pairs.iter().zip(want) {
            assert!(p.residual <= 1e-8);
            // bilinear elements overestimate by O(h^2)
            assert!(p.lambda >= w);
            assert_relative_eq!(p.lambda, w, max_relative = 2e-3);
        }
    }

    #[test]
    fn cone_has_a_bound_state_and_modes_are_ordered() {
        let prof = crate::eigensolver::smoothed_cone(PI / 12.0, 1.2).unwrap();
        let grid = Refinement::new(40.0, 200, 32);
        let lo = |m| {
            let f =
                assemble(&SymmetricLayerProblem::new(prof.clone(), 1.0, m, grid).unwrap()).unwrap();
            solve_lowest(&f, 1).unwrap().pairs[0].lambda
        };
        let (l0, l1) = (lo(0), lo(1));
        assert!(l0 < PI * PI / 4.0, "{l0}");
        assert!(l1 >= l0);
    }

    #[test]
    fn results_are_deterministic() {
        let prof = catalog::smoothed_cone(PI / 4.0, 1.2)
            .unwrap()
            .profile
            .unwrap();
        let pr = SymmetricLayerProblem::new(prof, 1.0, 0, Refinement::new(20.0, 80, 8)).unwrap();
        let f = assemble(&pr).unwrap();
        let x = solve_lowest(&f, 2).unwrap();
        let y = solve_lowest(&f, 2).unwrap();
        assert_eq!(x.pairs, y.pairs);
    }
}
