//! Symmetric banded matrices and an unpivoted `L D L^T` factorisation.

use crate::error::{Error, Result};

/// Lower band of a symmetric matrix: `data[i * (bw + 1) + k] = A[i][i - k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
    /// Offsets `k` of the diagonals that have been written to.
    used: Vec<bool>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
            used: vec![false; bw + 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// `A[i][j]` for any `i, j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > self.bw {
            0.0
        } else {
            self.data[i * (self.bw + 1) + k]
        }
    }

    /// Adds `v` to `A[i][j]` (and, implicitly, `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        assert!(k <= self.bw, "entry ({i}, {j}) outside the band");
        self.data[i * (self.bw + 1) + k] += v;
        self.used[k] = true;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let w = self.bw + 1;
        let mut y: Vec<f64> = (0..self.n).map(|i| self.data[i * w] * x[i]).collect();
        // element stencils leave most of the band empty
        for k in (1..=self.bw).filter(|&k| self.used[k]) {
            for i in k..self.n {
                let a = self.data[i * w + k];
                y[i] += a * x[i - k];
                y[i - k] += a * x[i];
            }
        }
        y
    }

    /// `self - sigma * other` on identical band structure.
    pub fn shifted(&self, sigma: f64, other: &BandMatrix) -> BandMatrix {
        assert_eq!((self.n, self.bw), (other.n, other.bw));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - sigma * b)
            .collect();
        let used = self
            .used
            .iter()
            .zip(&other.used)
            .map(|(a, b)| *a || *b)
            .collect();
        BandMatrix {
            n: self.n,
            bw: self.bw,
            data,
            used,
        }
    }

    /// `L D L^T` without pivoting. Fails on a (numerically) zero pivot.
    pub fn ldlt(&self) -> Result<BandLdlt> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        // l[i * w + k] = L[i][i - k] for k >= 1
        let mut l = self.data.clone();
        let mut d = vec![0.0; n];
        let scale = self.data.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        // t[k] = L[i][i - k] D[i - k] for the current row
        let mut t = vec![0.0; w];
        for i in 0..n {
            let reach = i.min(bw);
            for k in (1..=reach).rev() {
                let j = i - k;
                // L[i][j] D[j] = A[i][j] - sum_{p < j} L[i][p] D[p] L[j][p]
                let span = reach - k;
                let row_j = &l[j * w + 1..j * w + 1 + span];
                let v = l[i * w + k] - dot4(&t[k + 1..k + 1 + span], row_j);
                t[k] = v;
                l[i * w + k] = v / d[j];
            }
            let mut v = l[i * w];
            for k in 1..=reach {
                v -= t[k] * l[i * w + k];
            }
            if !(v.abs() > 1e-14 * scale) || !v.is_finite() {
                return Err(Error::SolverStall(format!(
                    "zero pivot {v:.3e} at row {i} of the shifted pencil"
                )));
            }
            d[i] = v;
            l[i * w] = 1.0;
        }
        Ok(BandLdlt { n, bw, l, d })
    }
}

/// Dot product with four independent accumulators.
fn dot4(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (xc, yc) = (x.chunks_exact(4), y.chunks_exact(4));
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        for q in 0..4 {
            acc[q] += a[q] * b[q];
        }
    }
    let tail: f64 = xr.iter().zip(yr).map(|(a, b)| a * b).sum();
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

#[derive(Debug, Clone)]
pub struct BandLdlt {
    n: usize,
    bw: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandLdlt {
    /// Number of negative pivots: by Sylvester's law, the number of
    /// eigenvalues of the factored matrix (or pencil shift) below zero.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut v = x[i];
            for p in lo..i {
                v -= self.l[i * w + (i - p)] * x[p];
            }
            x[i] = v;
        }
        for i in 0..self.n {
            x[i] /= self.d[i];
        }
        for i in (0..self.n).rev() {
            let v = x[i];
            let lo = i.saturating_sub(self.bw);
            for p in lo..i {
                x[p] -= self.l[i * w + (i - p)] * v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn laplacian(n: usize) -> BandMatrix {
        let mut a = BandMatrix::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        a
    }

    #[test]
    fn solve_matches_dense() {
        let n = 30;
        let mut a = BandMatrix::zeros(n, 3);
        for i in 0..n {
            a.add(i, i, 10.0 + i as f64 * 0.1);
            for k in 1..=3 {
                if i >= k {
                    a.add(i, i - k, 1.0 / (k as f64 + i as f64 * 0.01));
                }
            }
        }
        let dense = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        a.ldlt().unwrap().solve_in_place(&mut x);
        let r = &dense * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(b);
        assert!(r.norm() < 1e-12);
        let y = a.mul_vec(&vec![1.0; n]);
        let yd = &dense * nalgebra::DVector::from_element(n, 1.0);
        for i in 0..n {
            assert_relative_eq!(y[i], yd[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn inertia_counts_eigenvalues_below_shift() {
        // eigenvalues of the path Laplacian: 2 - 2 cos(k pi / (n + 1))
        let n = 40;
        let a = laplacian(n);
        let mut id = BandMatrix::zeros(n, 1);
        for i in 0..n {
            id.add(i, i, 1.0);
        }
        for shift in [0.3, 1.1, 2.5, 3.9] {
            let expected = (1..=n)
                .filter(|&k| {
                    2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos() < shift
                })
                .count();
            assert_eq!(
                a.shifted(shift, &id).ldlt().unwrap().negative_pivots(),
                expected
            );
        }
    }
}
