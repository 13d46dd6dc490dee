//! Adaptive quadrature primitives.
//!
//! Everything here works on vector-valued integrands `[f64; N]` so that
//! several integrals sharing one expensive geometry evaluation can be
//! accumulated together. The 1D driver is a global adaptive Gauss–Kronrod
//! (7/15) scheme with mandatory breakpoints; the reported error of an
//! interval is the raw Kronrod/Gauss difference, which is a conservative
//! bound for smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

/// Value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    /// Upper end of the enclosure `value + error`.
    pub fn upper(&self) -> f64 {
        self.value + self.error
    }

    pub fn lower(&self) -> f64 {
        self.value - self.error
    }

    pub fn scale(self, factor: f64) -> Self {
        Self::new(self.value * factor, self.error * factor.abs())
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate::new(self.value + rhs.value, self.error + rhs.error)
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate::new(self.value - rhs.value, self.error + rhs.error)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadratureError {
    #[error("adaptive quadrature did not converge: {intervals} intervals, error {error:.3e} above tolerance {tolerance:.3e}")]
    Stall {
        intervals: usize,
        error: f64,
        tolerance: f64,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl QuadOptions {
    pub fn absolute(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            max_intervals: 4000,
        }
    }

    pub fn with_rel(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd Kronrod abscissae XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn gk15<const N: usize, F>(
    f: &mut F,
    a: f64,
    b: f64,
) -> Result<([f64; N], [f64; N]), QuadratureError>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut eval = |x: f64| -> Result<[f64; N], QuadratureError> {
        let v = f(x);
        if v.iter().any(|c| !c.is_finite()) {
            return Err(QuadratureError::NonFinite { x });
        }
        Ok(v)
    };
    let fc = eval(center)?;
    for k in 0..N {
        kronrod[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
    }
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        for k in 0..N {
            let s = f1[k] + f2[k];
            kronrod[k] += w * s;
            if i % 2 == 1 {
                gauss[k] += WG[i / 2] * s;
            }
        }
    }
    let mut err = [0.0; N];
    for k in 0..N {
        kronrod[k] *= half;
        gauss[k] *= half;
        err[k] = (kronrod[k] - gauss[k]).abs();
    }
    Ok((kronrod, err))
}

/// Global adaptive integration of `f` over `[points[0], points[last]]`
/// with the interior points treated as mandatory breakpoints.
pub fn integrate<const N: usize, F>(
    mut f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<[Estimate; N], QuadratureError>
where
    F: FnMut(f64) -> [f64; N],
{
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    let priority = |err: &[f64; N], value: &[f64; N]| -> f64 {
        err.iter()
            .zip(value.iter())
            .map(|(e, v)| e / (opts.abs_tol + opts.rel_tol * v.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (value, error) = gk15(&mut f, a, b)?;
        for k in 0..N {
            total[k] += value[k];
            total_err[k] += error[k];
        }
        let p = priority(&error, &value);
        heap.push(Panel {
            a,
            b,
            value,
            error,
            priority: p,
        });
    }
    loop {
        let done = |t: &[f64; N], e: &[f64; N]| {
            (0..N).all(|k| e[k] <= opts.abs_tol.max(opts.rel_tol * t[k].abs()))
        };
        if done(&total, &total_err) {
            // the running sums can lose everything to cancellation after a
            // huge early panel, so confirm against a fresh summation
            total = [0.0; N];
            total_err = [0.0; N];
            for p in heap.iter() {
                for k in 0..N {
                    total[k] += p.value[k];
                    total_err[k] += p.error[k];
                }
            }
            if done(&total, &total_err) {
                break;
            }
        }
        if heap.len() >= opts.max_intervals {
            let tolerance = opts.abs_tol.max(opts.rel_tol * total[0].abs());
            return Err(QuadratureError::Stall {
                intervals: heap.len(),
                error: total_err.iter().cloned().fold(0.0, f64::max),
                tolerance,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b)
            || (worst.b - worst.a) <= 1e-13 * worst.a.abs().max(worst.b.abs())
        {
            // cannot split further; keep the panel's contribution and give up
            return Err(QuadratureError::Stall {
                intervals: heap.len() + 1,
                error: total_err.iter().cloned().fold(0.0, f64::max),
                tolerance: opts.abs_tol,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        for k in 0..N {
            total[k] += v1[k] + v2[k] - worst.value[k];
            total_err[k] += e1[k] + e2[k] - worst.error[k];
        }
        heap.push(Panel {
            a: worst.a,
            b: mid,
            priority: priority(&e1, &v1),
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            priority: priority(&e2, &v2),
            value: v2,
            error: e2,
        });
    }
    // recompute the sums from the panels to shed accumulated cancellation
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for p in heap.iter() {
        for k in 0..N {
            value[k] += p.value[k];
            error[k] += p.error[k];
        }
    }
    let mut out = [Estimate::default(); N];
    for k in 0..N {
        out[k] = Estimate::new(value[k], error[k]);
    }
    Ok(out)
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(
    mut f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| [f(x)], points, opts).map(|r| r[0])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive trapezoid rule for a 2π-periodic integrand, doubling the node
/// count until three successive levels agree to `rel_tol` or to within
/// `abs_floor`. Returns the integral over one period and the last level
/// difference.
pub fn periodic_trapezoid<const N: usize, F>(
    mut f: F,
    rel_tol: f64,
    abs_floor: f64,
    max_nodes: usize,
) -> ([f64; N], [f64; N], bool)
where
    F: FnMut(f64) -> [f64; N],
{
    let two_pi = std::f64::consts::TAU;
    let mut n = 4usize;
    let mut sum = [0.0; N];
    let mut peak = [0.0f64; N];
    for i in 0..n {
        let v = f(two_pi * i as f64 / n as f64);
        for k in 0..N {
            sum[k] += v[k];
            peak[k] = peak[k].max(v[k].abs());
        }
    }
    let mut prev = sum.map(|s| s * two_pi / n as f64);
    let mut agreed_once = false;
    loop {
        let step = two_pi / (2 * n) as f64;
        for i in 0..n {
            let v = f(step * (2 * i + 1) as f64);
            for k in 0..N {
                sum[k] += v[k];
                peak[k] = peak[k].max(v[k].abs());
            }
        }
        n *= 2;
        let cur = sum.map(|s| s * two_pi / n as f64);
        let mut diff = [0.0; N];
        let mut ok = true;
        // components share units; noise in a tiny one is judged against the largest
        let top = peak.iter().fold(0.0f64, |m, &p| m.max(p));
        for k in 0..N {
            diff[k] = (cur[k] - prev[k]).abs();
            let floor = (1e-9 * two_pi * top).max(abs_floor);
            if diff[k] > rel_tol * cur[k].abs() && diff[k] > floor {
                ok = false;
            }
        }
        if ok && agreed_once {
            return (cur, diff, true);
        }
        agreed_once = ok;
        if n >= max_nodes {
            return (cur, diff, false);
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        // degree 15 is the limit for 8 nodes
        let s: f64 = gl.on_interval(0.0, 2.0).map(|(x, w)| w * x.powi(15)).sum();
        assert_relative_eq!(s, 2f64.powi(16) / 16.0, max_relative = 1e-13);
        let w: f64 = gl.weights.iter().sum();
        assert_relative_eq!(w, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_breakpoints_and_kinks() {
        let r = integrate_scalar(
            |x: f64| x.abs(),
            &[-1.0, 0.0, 2.0],
            QuadOptions::absolute(1e-12),
        )
        .unwrap();
        assert_relative_eq!(r.value, 2.5, max_relative = 1e-13);
        let r =
            integrate_scalar(|x: f64| x.sqrt(), &[0.0, 1.0], QuadOptions::absolute(1e-9)).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() <= r.error.max(1e-9));
    }

    #[test]
    fn error_estimate_covers_true_error() {
        let r = integrate_scalar(
            |x: f64| (10.0 * x).sin().exp(),
            &[0.0, 3.0],
            QuadOptions::absolute(1e-6),
        )
        .unwrap();
        let fine = integrate_scalar(
            |x: f64| (10.0 * x).sin().exp(),
            &[0.0, 3.0],
            QuadOptions::absolute(1e-13),
        )
        .unwrap();
        assert!((r.value - fine.value).abs() <= r.error);
    }

    #[test]
    fn stall_is_reported() {
        let r = integrate_scalar(
            |x: f64| 1.0 / x.abs().sqrt().max(1e-300),
            &[-1.0, 1.0],
            QuadOptions::absolute(1e-14).with_max_intervals(50),
        );
        assert!(matches!(r, Err(QuadratureError::Stall { .. })));
    }

    #[test]
    fn periodic_trapezoid_is_spectral() {
        let (v, _, ok) = periodic_trapezoid(|a| [(a.cos()).exp()], 1e-14, 0.0, 1024);
        assert!(ok);
        // 2π I0(1)
        assert_relative_eq!(
            v[0],
            std::f64::consts::TAU * 1.266_065_877_752_008_4,
            max_relative = 1e-14
        );
        let (v, _, ok) = periodic_trapezoid(|a| [(4.0 * a).cos()], 1e-14, 0.0, 1024);
        assert!(ok);
        assert!(v[0].abs() < 1e-12);
    }
}
