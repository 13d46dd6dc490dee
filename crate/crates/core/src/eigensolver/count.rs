//! Counting discrete eigenvalues below the threshold across modes and grids.

use serde::Serialize;

use super::lanczos::{solve_lowest_with, LanczosOptions};
use super::problem::{assemble, validate_layer, Refinement, SymmetricLayerProblem};
use crate::error::{Error, Result};
use crate::surface::RevolutionProfile;

/// Eigenvalues within this fraction of the threshold are not counted.
pub const THRESHOLD_MARGIN: f64 = 1e-4;
/// Largest relative eigenvalue change accepted between the two finest grids.
pub const MESH_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct CountOptions {
    pub m_max: u32,
    /// Increasing refinements; the last two decide stabilisation.
    pub schedule: Vec<Refinement>,
    pub margin: f64,
    pub seed: u64,
}

impl CountOptions {
    pub fn new(m_max: u32, schedule: Vec<Refinement>) -> Self {
        Self {
            m_max,
            schedule,
            margin: THRESHOLD_MARGIN,
            seed: LanczosOptions::default().seed,
        }
    }
}

impl Default for CountOptions {
    fn default() -> Self {
        Self::new(8, default_schedule(40.0))
    }
}

/// Three grids at fixed truncation with ten cells per unit length along the
/// meridian; the transverse direction, which dominates the error, is refined.
pub fn default_schedule(length: f64) -> Vec<Refinement> {
    let n_s = (10.0 * length).ceil() as usize;
    [64, 96, 128]
        .into_iter()
        .map(|n_u| Refinement::new(length, n_s, n_u))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub m: u32,
    pub length: f64,
    pub n_s: usize,
    pub n_u: usize,
    pub index: usize,
    pub lambda: f64,
    pub residual: f64,
    pub below_threshold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeCount {
    pub m: u32,
    /// Eigenvalues below `threshold (1 - margin)` on the finest grid.
    pub count: usize,
    /// Eigenvalues within the margin of the threshold on the finest grid.
    pub unresolved: usize,
    pub multiplicity: usize,
    pub lowest: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub a: f64,
    pub threshold: f64,
    pub margin: f64,
    /// Total with multiplicity (two for each `m >= 1`).
    pub count: usize,
    pub unresolved: usize,
    pub per_mode: Vec<ModeCount>,
    pub table: Vec<TableRow>,
}

struct Level {
    count: usize,
    unresolved: usize,
    lambdas: Vec<f64>,
}

fn run_level(
    profile: &RevolutionProfile,
    a: f64,
    m: u32,
    grid: Refinement,
    opts: &CountOptions,
    table: &mut Vec<TableRow>,
) -> Result<Level> {
    let problem = SymmetricLayerProblem::new(profile.clone(), a, m, grid)?;
    let form = assemble(&problem)?;
    let tau = problem.threshold();
    let below =
        |t: f64| -> Result<usize> { Ok(form.a.shifted(t, &form.b).ldlt()?.negative_pivots()) };
    let count = below(tau * (1.0 - opts.margin))?;
    let unresolved = below(tau * (1.0 + opts.margin))? - count;
    let k = count.max(1).min(form.dim());
    let lanczos = LanczosOptions {
        seed: opts.seed,
        ..Default::default()
    };
    let spectrum = solve_lowest_with(&form, k, lanczos)?;
    let cut = tau * (1.0 - opts.margin);
    let found = spectrum.pairs.iter().filter(|p| p.lambda < cut).count();
    if found != count {
        return Err(Error::SolverStall(format!(
            "mode m = {m}: Lanczos found {found} eigenvalues below the cut where the inertia gives {count}"
        )));
    }
    for p in &spectrum.pairs {
        table.push(TableRow {
            m,
            length: grid.length,
            n_s: grid.n_s,
            n_u: grid.n_u,
            index: p.index,
            lambda: p.lambda,
            residual: p.residual,
            below_threshold: p.lambda < cut,
        });
    }
    Ok(Level {
        count,
        unresolved,
        lambdas: spectrum.pairs.iter().map(|p| p.lambda).collect(),
    })
}

/// Counts eigenvalues below `kappa_1^2 (1 - margin)` for `m = 0, 1, ...`
/// until a mode has none. Dirichlet truncation only raises eigenvalues, so
/// every counted value certifies one of the full layer up to discretisation.
pub fn count_below_threshold(
    profile: &RevolutionProfile,
    a: f64,
    opts: &CountOptions,
) -> Result<CountReport> {
    if opts.schedule.len() < 2 {
        return Err(Error::InvalidInput(
            "the refinement schedule needs at least two grids".into(),
        ));
    }
    validate_layer(profile, a)?;
    let threshold = (std::f64::consts::FRAC_PI_2 / a).powi(2);
    let mut table = Vec::new();
    let mut per_mode = Vec::new();
    for m in 0..=opts.m_max {
        let mut levels = Vec::with_capacity(opts.schedule.len());
        for &grid in &opts.schedule {
            levels.push(run_level(profile, a, m, grid, opts, &mut table)?);
        }
        let (prev, fine) = (&levels[levels.len() - 2], &levels[levels.len() - 1]);
        if prev.count != fine.count {
            return Err(Error::NotStabilized(format!(
                "mode m = {m}: counts {} and {} on the two finest grids",
                prev.count, fine.count
            )));
        }
        for (i, (x, y)) in prev
            .lambdas
            .iter()
            .zip(&fine.lambdas)
            .take(fine.count)
            .enumerate()
        {
            let change = (x - y).abs() / y.abs();
            if change >= MESH_TOL {
                return Err(Error::NotStabilized(format!(
                    "mode m = {m}: eigenvalue {} moved by {change:.2e} between the two finest grids",
                    i + 1
                )));
            }
        }
        let multiplicity = if m == 0 { 1 } else { 2 };
        per_mode.push(ModeCount {
            m,
            count: fine.count,
            unresolved: fine.unresolved,
            multiplicity,
            lowest: fine.lambdas[0],
        });
        if fine.count == 0 {
            break;
        }
    }
    Ok(CountReport {
        a,
        threshold,
        margin: opts.margin,
        count: per_mode.iter().map(|c| c.count * c.multiplicity).sum(),
        unresolved: per_mode.iter().map(|c| c.unresolved * c.multiplicity).sum(),
        per_mode,
        table,
    })
}
