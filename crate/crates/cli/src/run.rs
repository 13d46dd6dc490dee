//! The five commands. Each returns a serialisable report; writing files and
//! the stdout summary happens in `output`.

use anyhow::{anyhow, Result};
use rayon::prelude::*;
use serde::Serialize;

use quantum_layers::eigensolver::{count_below_threshold, CountReport};
use quantum_layers::layer::{validate, HypothesisReport, LayerGeometry};
use quantum_layers::surface::conditions::{audit_surface, SurfaceAudit};
use quantum_layers::surface::totals::{default_radii, truncated_integrals, Truncation};
use quantum_layers::surface::{check_conditions, cohn_vossen_bound, ConditionReport};
use quantum_layers::variational::{certify as certify_layer, Certificate};
use quantum_layers::Error;

use crate::config::{Command, RunConfig};

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub surface: String,
    pub half_width: f64,
    pub threshold: f64,
    pub genus: u32,
    pub ends: u32,
    pub cohn_vossen_bound: f64,
    /// `None` when the total curvature is unavailable.
    pub cohn_vossen_consistent: Option<bool>,
    /// The layer hypothesis check, or why it failed.
    pub layer: Result<HypothesisReport, String>,
    pub audit: SurfaceAudit,
    pub conditions: ConditionReport,
}

pub fn analyze(cfg: &RunConfig) -> Result<Analysis> {
    let surface = cfg.build_surface()?;
    let audit = audit_surface(&surface, cfg.tolerances.quadrature, cfg.tolerances.radii);
    let conditions = check_conditions(&surface, cfg.half_width, &audit);
    let layer = LayerGeometry::new(surface.clone(), cfg.half_width)?;
    let bound = cohn_vossen_bound(cfg.genus, cfg.ends)?;
    let consistent = audit
        .total_gauss
        .as_ref()
        .ok()
        .map(|k| k.lower() <= bound + 1e-9);
    Ok(Analysis {
        surface: surface.label().to_string(),
        half_width: cfg.half_width,
        threshold: layer.threshold(),
        genus: cfg.genus,
        ends: cfg.ends,
        cohn_vossen_bound: bound,
        cohn_vossen_consistent: consistent,
        layer: validate(&layer).map_err(|e| e.to_string()),
        audit,
        conditions,
    })
}

#[derive(Debug, Serialize)]
pub struct CertifyRun {
    pub surface: String,
    pub layer: HypothesisReport,
    pub certificate: Certificate,
}

pub fn certify(cfg: &RunConfig) -> Result<CertifyRun> {
    let surface = cfg.build_surface()?;
    let label = surface.label().to_string();
    let layer = LayerGeometry::new(surface, cfg.half_width)?;
    let hyp = validate(&layer)?;
    let certificate = certify_layer(
        &layer,
        cfg.certify.strategy.into(),
        cfg.certify.n_max,
        cfg.tolerances.quadrature,
    )?;
    Ok(CertifyRun {
        surface: label,
        layer: hyp,
        certificate,
    })
}

#[derive(Debug, Serialize)]
pub struct SolveRun {
    pub surface: String,
    pub report: CountReport,
}

pub fn solve(cfg: &RunConfig) -> Result<SolveRun> {
    let surface = cfg.build_surface()?;
    let Some(profile) = surface.profile.clone() else {
        return Err(Error::InvalidInput(format!(
            "solve requires cylindrical symmetry; `{}` is not a surface of revolution",
            surface.label()
        ))
        .into());
    };
    let report = count_below_threshold(&profile, cfg.half_width, &cfg.solve.options())?;
    Ok(SolveRun {
        surface: surface.label().to_string(),
        report,
    })
}

#[derive(Debug, Serialize)]
pub struct Probe {
    pub surface: String,
    pub note: &'static str,
    pub total_gauss: Result<quantum_layers::Estimate, String>,
    pub table: Vec<Truncation>,
}

pub fn probe_conjecture(cfg: &RunConfig) -> Result<Probe> {
    let surface = cfg.build_surface()?;
    let tol = cfg.tolerances.quadrature;
    let total_gauss =
        quantum_layers::surface::total_gauss_curvature(&surface, tol).map_err(|e| e.to_string());
    let radii = default_radii(&surface, cfg.tolerances.radii);
    let table = truncated_integrals(&surface, &radii, tol, false, |sp| {
        sp.sample.mean * sp.sample.mean
    })?;
    Ok(Probe {
        surface: surface.label().to_string(),
        note: "exploratory: truncated integrals of M^2 are evidence about growth, not a proof of divergence",
        total_gauss,
        table,
    })
}

/// One measured quantity at one sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub point: usize,
    pub coords: Vec<f64>,
    pub quantity: &'static str,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Serialize)]
pub struct Sweep {
    pub command: Command,
    pub axes: Vec<String>,
    pub rows: Vec<SweepRow>,
    /// Points whose run failed, with the error text.
    pub failures: Vec<(usize, String)>,
}

fn grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, values| {
        acc.into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect()
    })
}

fn measure(cfg: &RunConfig, command: Command) -> Result<Vec<(&'static str, f64, f64)>> {
    Ok(match command {
        Command::Analyze => {
            let a = analyze(cfg)?;
            let mut v = vec![(
                "predicts_discrete_spectrum",
                f64::from(u8::from(a.conditions.predicts_discrete_spectrum)),
                0.0,
            )];
            if let Ok(k) = &a.audit.total_gauss {
                v.push(("total_gauss", k.value, k.error));
            }
            v
        }
        Command::Certify => {
            let c = certify(cfg)?.certificate;
            vec![
                ("certified", f64::from(u8::from(c.is_certified())), 0.0),
                (
                    "q1",
                    c.value.unwrap_or(f64::NAN),
                    c.error.unwrap_or(f64::NAN),
                ),
                ("ladder_length", c.ladder.len() as f64, 0.0),
            ]
        }
        Command::Solve => {
            let r = solve(cfg)?.report;
            let lowest = r.per_mode.first().map_or(f64::NAN, |m| m.lowest);
            vec![
                ("count", r.count as f64, 0.0),
                ("unresolved", r.unresolved as f64, 0.0),
                ("lowest", lowest, 0.0),
                ("threshold", r.threshold, 0.0),
            ]
        }
        Command::ProbeConjecture => {
            let p = probe_conjecture(cfg)?;
            let last = p
                .table
                .last()
                .ok_or_else(|| anyhow!("no truncation radii inside the chart"))?;
            vec![("mean_sq_truncated", last.value.value, last.value.error)]
        }
        Command::Sweep => unreachable!("rejected by validation"),
    })
}

/// Runs the sweep command at every point of the axis grid, concurrently.
/// Failures at single points are recorded rather than aborting the sweep.
pub fn sweep(cfg: &RunConfig) -> Result<Sweep> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("command `sweep` needs a [sweep] section".into()))?;
    let names: Vec<&str> = sw.axes.iter().map(|a| a.name.as_str()).collect();
    let points = grid(&sw.axes.iter().map(|a| a.values.clone()).collect::<Vec<_>>());
    // catch bad axis names before spending time on the grid
    for p in &points {
        cfg.with_overrides(
            &names
                .iter()
                .copied()
                .zip(p.iter().copied())
                .collect::<Vec<_>>(),
        )?;
    }
    let results: Vec<Result<Vec<(&'static str, f64, f64)>, String>> = points
        .par_iter()
        .map(|p| {
            let over: Vec<(&str, f64)> = names.iter().copied().zip(p.iter().copied()).collect();
            cfg.with_overrides(&over)
                .and_then(|c| measure(&c, sw.command))
                .map_err(|e| format!("{e:#}"))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (i, (p, r)) in points.iter().zip(results).enumerate() {
        match r {
            Ok(qs) => rows.extend(qs.into_iter().map(|(quantity, value, error)| SweepRow {
                point: i,
                coords: p.clone(),
                quantity,
                value,
                error,
            })),
            Err(e) => failures.push((i, e)),
        }
    }
    Ok(Sweep {
        command: sw.command,
        axes: names.iter().map(|s| s.to_string()).collect(),
        rows,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::grid;

    #[test]
    fn grid_is_row_major() {
        let g = grid(&[vec![1.0, 2.0], vec![10.0, 20.0, 30.0]]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![1.0, 10.0]);
        assert_eq!(g[2], vec![1.0, 30.0]);
        assert_eq!(g[3], vec![2.0, 10.0]);
    }
}
