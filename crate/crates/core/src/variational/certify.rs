//! Certificate ladders: search over `n` (and `eps`) for `Q_1 + error < 0`.

use std::f64::consts::TAU;

use serde::Serialize;

use super::forms::{optimal_epsilon, q1_quadrature, q1_weighted, EpsilonFit};
use super::mollifier::MollifierFamily;
use super::trial::{select_bump, Bump, TrialFunction};
use crate::error::{Error, Result};
use crate::layer::LayerGeometry;
use crate::quadrature::Estimate;
use crate::surface::conditions::{audit_surface, check_conditions, Verdict};
use crate::surface::{RadialFrame, Surface};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    Auto,
    Basic,
    Deformed,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateVerdict {
    Certified,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderStep {
    pub strategy: Strategy,
    pub n: u32,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub epsilon: Option<f64>,
    pub value: Estimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub requested: Strategy,
    pub half_width: f64,
    pub threshold: f64,
    pub verdict: CertificateVerdict,
    /// The certifying trial, or the last one tried.
    pub trial: Option<TrialFunction>,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub ladder: Vec<LadderStep>,
    pub epsilon_fit: Option<EpsilonFit>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == CertificateVerdict::Certified
    }
}

struct Run {
    steps: Vec<LadderStep>,
    last: Option<(TrialFunction, Estimate)>,
    certified: bool,
    fit: Option<EpsilonFit>,
    notes: Vec<String>,
}

impl Run {
    fn new() -> Self {
        Self {
            steps: Vec::new(),
            last: None,
            certified: false,
            fit: None,
            notes: Vec::new(),
        }
    }

    fn push(
        &mut self,
        strategy: Strategy,
        trial: TrialFunction,
        epsilon: Option<f64>,
        value: Estimate,
    ) {
        let f = trial.family;
        self.steps.push(LadderStep {
            strategy,
            n: trial.n,
            inner_radius: f.inner_radius(trial.n),
            outer_radius: f.outer_radius(trial.n),
            epsilon,
            value,
        });
        self.last = Some((trial, value));
        self.certified = value.upper() < 0.0;
    }
}

/// `Err` values that end a ladder early without failing the certificate.
fn stops_ladder(e: &Error) -> bool {
    matches!(
        e,
        Error::SupportEscape { .. }
            | Error::QuadratureStall(_)
            | Error::DegenerateBump { .. }
            | Error::GradientUnavailable(_)
    )
}

fn basic_ladder(layer: &LayerGeometry, n_max: u32, tol: f64, run: &mut Run) -> Result<()> {
    let fam = MollifierFamily::for_surface(&layer.surface);
    for n in 0..=n_max {
        let trial = TrialFunction::basic(fam, n);
        match q1_quadrature(layer, &trial, tol) {
            Ok(v) => run.push(Strategy::Basic, trial, None, v),
            Err(e) if stops_ladder(&e) => {
                run.notes
                    .push(format!("BASIC ladder stopped at n = {n}: {e}"));
                return Ok(());
            }
            Err(e) => return Err(e),
        }
        if run.certified {
            break;
        }
    }
    Ok(())
}

fn weighted_ladder(layer: &LayerGeometry, n_max: u32, tol: f64, run: &mut Run) -> Result<()> {
    let fam = MollifierFamily::for_surface(&layer.surface);
    for n in 0..=n_max {
        match q1_weighted(layer, &fam, n, tol) {
            Ok(v) => run.push(Strategy::Weighted, TrialFunction::weighted(fam, n), None, v),
            Err(e) if stops_ladder(&e) => {
                run.notes
                    .push(format!("WEIGHTED ladder stopped at n = {n}: {e}"));
                return Ok(());
            }
            Err(e) => return Err(e),
        }
        if run.certified {
            break;
        }
    }
    Ok(())
}

/// Largest `ln R_0` used when sizing the mollifier for the deformed trial.
const MAX_LOG_RADIUS: f64 = 150.0;

fn ends(surface: &Surface) -> f64 {
    match surface.frame() {
        RadialFrame::Meridian {
            two_sided: true, ..
        } => 2.0,
        _ => 1.0,
    }
}

/// Mollifier for the deformed trial: equal to one on the bump, and wide
/// enough that the flat-end energy `2 pi / ln R_0` per end is at most half
/// the gain `c1^2 / 4 c2` available from the bump.
pub fn deformed_family(
    layer: &LayerGeometry,
    bump: &Bump,
    tol: f64,
) -> Result<(MollifierFamily, EpsilonFit)> {
    let surface = &layer.surface;
    let base = MollifierFamily::for_surface(surface);
    let r0 = base.r0.max(1.05 * bump.reach(surface.frame()));
    let probe = MollifierFamily::new(r0)?;
    let fit = optimal_epsilon(layer, &probe, 0, bump, tol)?;
    let gain = fit.gain();
    let log_r = (2.0 * TAU * ends(surface) / gain)
        .max(r0.ln())
        .min(MAX_LOG_RADIUS);
    Ok((MollifierFamily::new(log_r.exp())?, fit))
}

fn deformed_ladder(layer: &LayerGeometry, n_max: u32, tol: f64, run: &mut Run) -> Result<()> {
    let bump = match select_bump(&layer.surface) {
        Ok(b) => b,
        Err(e) if stops_ladder(&e) => {
            run.notes.push(format!("DEFORMED not attempted: {e}"));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let (fam, _) = match deformed_family(layer, &bump, tol) {
        Ok(x) => x,
        Err(e) if stops_ladder(&e) => {
            run.notes.push(format!("DEFORMED not attempted: {e}"));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    run.notes.push(format!(
        "bump {bump:?}; mollifier ln R_0 = {:.3}",
        fam.r0.ln()
    ));
    for n in 0..=n_max {
        let step = optimal_epsilon(layer, &fam, n, &bump, tol).and_then(|fit| {
            let trial = TrialFunction::deformed(fam, n, fit.epsilon, bump);
            q1_quadrature(layer, &trial, tol).map(|v| (fit, trial, v))
        });
        match step {
            Ok((fit, trial, v)) => {
                run.fit = Some(fit);
                run.push(Strategy::Deformed, trial, Some(fit.epsilon), v);
            }
            Err(e) if stops_ladder(&e) => {
                run.notes
                    .push(format!("DEFORMED ladder stopped at n = {n}: {e}"));
                return Ok(());
            }
            Err(e) => return Err(e),
        }
        if run.certified {
            break;
        }
    }
    Ok(())
}

/// Strategies AUTO tries, in order, from the condition audit.
pub fn auto_plan(surface: &Surface, a: f64, tol: f64) -> (Vec<Strategy>, Vec<String>) {
    let audit = audit_surface(surface, tol, 10);
    let report = check_conditions(surface, a, &audit);
    let mut notes = vec![format!(
        "conditions: a = {:?}, c = {:?}, d = {:?}",
        report.a.verdict, report.c.verdict, report.d.verdict
    )];
    if report.planar {
        notes.push("planar surface: no spectrum below the threshold is expected".into());
        return (vec![Strategy::Basic], notes);
    }
    let mut plan = Vec::new();
    if let Ok(k) = &audit.total_gauss {
        if k.upper() < 0.0 {
            plan.push(Strategy::Basic);
        } else if k.lower() <= 0.0 {
            plan.push(Strategy::Deformed);
        }
    }
    if audit.total_mean_sq.as_ref().is_ok_and(|m| m.is_divergent())
        || report.b.verdict == Verdict::SearchOverA
    {
        plan.push(Strategy::Weighted);
    }
    if plan.is_empty() {
        plan.push(Strategy::Basic);
    }
    (plan, notes)
}

/// Search for a trial function with `Q_1 + error < 0`. Never claims absence
/// of spectrum: failure is `INCONCLUSIVE`.
pub fn certify(
    layer: &LayerGeometry,
    strategy: Strategy,
    n_max: u32,
    tol: f64,
) -> Result<Certificate> {
    let mut run = Run::new();
    let plan = match strategy {
        Strategy::Auto => {
            let (plan, notes) = auto_plan(&layer.surface, layer.a, tol);
            run.notes.extend(notes);
            plan
        }
        s => vec![s],
    };
    for s in plan {
        match s {
            Strategy::Basic => basic_ladder(layer, n_max, tol, &mut run)?,
            Strategy::Deformed => deformed_ladder(layer, n_max, tol, &mut run)?,
            Strategy::Weighted => weighted_ladder(layer, n_max, tol, &mut run)?,
            Strategy::Auto => unreachable!(),
        }
        if run.certified {
            break;
        }
    }
    let (trial, value) = run.last.map_or((None, None), |(t, v)| (Some(t), Some(v)));
    Ok(Certificate {
        requested: strategy,
        half_width: layer.a,
        threshold: layer.threshold(),
        verdict: if run.certified {
            CertificateVerdict::Certified
        } else {
            CertificateVerdict::Inconclusive
        },
        trial,
        value: value.map(|v| v.value),
        error: value.map(|v| v.error),
        ladder: run.steps,
        epsilon_fit: run.fit,
        notes: run.notes,
    })
}

/// Outcome of shrinking the half-width until the weighted trial certifies.
#[derive(Debug, Clone, Serialize)]
pub struct HalfWidthSearch {
    pub tried: Vec<(f64, Estimate)>,
    pub certified_at: Option<f64>,
}

/// Halve `a` from `a_start` (at most `steps` times) looking for a negative
/// weighted-trial value at ladder index `n`.
pub fn search_half_width(
    surface: &Surface,
    n: u32,
    a_start: f64,
    steps: u32,
    tol: f64,
) -> Result<HalfWidthSearch> {
    let fam = MollifierFamily::for_surface(surface);
    let mut tried = Vec::new();
    let mut a = a_start;
    for _ in 0..steps {
        let layer = LayerGeometry::new(surface.clone(), a)?;
        if crate::layer::validate(&layer).is_ok() {
            let v = q1_weighted(&layer, &fam, n, tol)?;
            tried.push((a, v));
            if v.upper() < 0.0 {
                return Ok(HalfWidthSearch {
                    tried,
                    certified_at: Some(a),
                });
            }
        }
        a *= 0.5;
    }
    Ok(HalfWidthSearch {
        tried,
        certified_at: None,
    })
}
