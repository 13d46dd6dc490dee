//! Files in the output directory and the plain-text summary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use quantum_layers::surface::conditions::Condition;
use quantum_layers::surface::totals::MeanSquare;

use crate::run::{Analysis, CertifyRun, Probe, SolveRun, Sweep};

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let path = dir.join(name);
    let mut w =
        csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn verdict(c: &Condition) -> String {
    format!("{:?}", c.verdict).to_lowercase()
}

fn mean_sq_line(name: &str, m: &Result<MeanSquare, String>) -> String {
    match m {
        Ok(MeanSquare::Converged { value, .. }) => {
            format!("{name}: {:.6} +- {:.1e}", value.value, value.error)
        }
        Ok(MeanSquare::Divergent { truncated }) => {
            let last = truncated.last().map_or(f64::NAN, |t| t.value.value);
            format!("{name}: divergent (truncated value {last:.4} at the largest radius)")
        }
        Err(e) => format!("{name}: unavailable ({e})"),
    }
}

pub fn analysis(dir: &Path, a: &Analysis) -> Result<String> {
    write_json(dir, "analysis.json", a)?;
    let mut rows = Vec::new();
    for (name, m) in [
        ("mean_sq", &a.audit.total_mean_sq),
        ("grad_mean_sq", &a.audit.grad_mean_sq),
    ] {
        if let Ok(m) = m {
            for t in m.truncated() {
                rows.push(vec![
                    name.to_string(),
                    num(t.radius),
                    num(t.value.value),
                    num(t.value.error),
                ]);
            }
        }
    }
    write_csv(
        dir,
        "truncated.csv",
        &["quantity", "radius", "value", "error"],
        rows,
    )?;

    let c = &a.conditions;
    let mut s = String::new();
    writeln!(s, "surface     {}", a.surface)?;
    writeln!(
        s,
        "half-width  {}  (threshold kappa_1^2 = {:.6})",
        a.half_width, a.threshold
    )?;
    match &a.audit.total_gauss {
        Ok(k) => writeln!(
            s,
            "total Gauss curvature: {:.8} +- {:.1e}",
            k.value, k.error
        )?,
        Err(e) => writeln!(s, "total Gauss curvature: unavailable ({e})")?,
    }
    writeln!(
        s,
        "Cohn-Vossen bound for genus {} with {} end(s): {:.6}{}",
        a.genus,
        a.ends,
        a.cohn_vossen_bound,
        match a.cohn_vossen_consistent {
            Some(true) => "  (consistent)",
            Some(false) => "  (VIOLATED: check the declared topology)",
            None => "",
        }
    )?;
    writeln!(s, "{}", mean_sq_line("int M^2", &a.audit.total_mean_sq))?;
    match &a.audit.rho {
        Ok(r) => match r.rho_m {
            Some(rm) => writeln!(s, "rho_m ~ {rm:.6} ({})", r.qualifier)?,
            None => writeln!(s, "rho_m = inf (no curvature sampled)")?,
        },
        Err(e) => writeln!(s, "rho_m unavailable ({e})")?,
    }
    writeln!(
        s,
        "layer hypothesis: {}",
        a.layer.as_ref().map_or_else(
            |e| format!("fails: {e}"),
            |r| format!("holds ({} samples)", r.samples)
        )
    )?;
    writeln!(s)?;
    writeln!(s, "condition  verdict         note")?;
    for (name, cond) in [
        ("H1", &c.h1),
        ("H2", &c.h2),
        ("(a)", &c.a),
        ("(b)", &c.b),
        ("(c)", &c.c),
        ("(d)", &c.d),
    ] {
        writeln!(s, "{name:<10} {:<15} {}", verdict(cond), cond.note)?;
    }
    writeln!(s)?;
    let prediction = if c.planar {
        "no prediction: the surface is a plane"
    } else if c.predicts_discrete_spectrum {
        "discrete spectrum below the threshold is predicted"
    } else {
        "no condition holds outright; nothing is predicted"
    };
    writeln!(s, "{prediction}")?;
    Ok(s)
}

pub fn certificate(dir: &Path, run: &CertifyRun) -> Result<String> {
    write_json(dir, "certificate.json", run)?;
    let c = &run.certificate;
    let rows = c.ladder.iter().map(|st| {
        vec![
            format!("{:?}", st.strategy).to_lowercase(),
            st.n.to_string(),
            num(st.inner_radius),
            num(st.outer_radius),
            st.epsilon.map(num).unwrap_or_default(),
            num(st.value.value),
            num(st.value.error),
        ]
    });
    write_csv(
        dir,
        "ladder.csv",
        &[
            "strategy",
            "n",
            "inner_radius",
            "outer_radius",
            "epsilon",
            "q1",
            "error",
        ],
        rows,
    )?;
    let mut s = String::new();
    writeln!(s, "surface     {}", run.surface)?;
    writeln!(
        s,
        "half-width  {}  (threshold {:.6})",
        c.half_width, c.threshold
    )?;
    writeln!(s, "strategy    {:?}", c.requested)?;
    for st in &c.ladder {
        let eps = st
            .epsilon
            .map_or(String::new(), |e| format!("  eps = {e:.4}"));
        writeln!(
            s,
            "  {:<9} n = {:>2}  Q1 = {:+.6e} +- {:.1e}{eps}",
            format!("{:?}", st.strategy),
            st.n,
            st.value.value,
            st.value.error
        )?;
    }
    for note in &c.notes {
        writeln!(s, "  note: {note}")?;
    }
    writeln!(s, "verdict     {:?}", c.verdict)?;
    Ok(s)
}

pub fn spectrum(dir: &Path, run: &SolveRun) -> Result<String> {
    let r = &run.report;
    write_json(dir, "count.json", run)?;
    let rows = r.table.iter().map(|t| {
        vec![
            t.m.to_string(),
            num(t.length),
            t.n_s.to_string(),
            t.n_u.to_string(),
            t.index.to_string(),
            num(t.lambda),
            num(t.residual),
            t.below_threshold.to_string(),
        ]
    });
    write_csv(
        dir,
        "spectrum.csv",
        &[
            "m",
            "length",
            "n_s",
            "n_u",
            "index",
            "lambda",
            "residual",
            "below_threshold",
        ],
        rows,
    )?;
    let mut s = String::new();
    writeln!(s, "surface     {}", run.surface)?;
    writeln!(
        s,
        "half-width  {}  (threshold {:.6}, margin {:.0e})",
        r.a, r.threshold, r.margin
    )?;
    writeln!(s, "mode  count  unresolved  lowest")?;
    for m in &r.per_mode {
        writeln!(
            s,
            "{:>4}  {:>5}  {:>10}  {:.8}",
            m.m, m.count, m.unresolved, m.lowest
        )?;
    }
    writeln!(
        s,
        "eigenvalues below the threshold (with multiplicity): {}",
        r.count
    )?;
    if r.unresolved > 0 {
        writeln!(
            s,
            "within the margin of the threshold (not counted): {}",
            r.unresolved
        )?;
    }
    Ok(s)
}

pub fn probe(dir: &Path, p: &Probe) -> Result<String> {
    write_json(dir, "probe.json", p)?;
    let rows = p
        .table
        .iter()
        .map(|t| vec![num(t.radius), num(t.value.value), num(t.value.error)]);
    write_csv(dir, "probe.csv", &["radius", "mean_sq", "error"], rows)?;
    let mut s = String::new();
    writeln!(s, "surface     {}", p.surface)?;
    writeln!(s, "{}", p.note)?;
    match &p.total_gauss {
        Ok(k) => writeln!(
            s,
            "total Gauss curvature: {:.8} +- {:.1e}",
            k.value, k.error
        )?,
        Err(e) => writeln!(s, "total Gauss curvature: unavailable ({e})")?,
    }
    writeln!(s, "radius        int_(rho<R) M^2")?;
    for t in &p.table {
        writeln!(
            s,
            "{:<12.4} {:.8} +- {:.1e}",
            t.radius, t.value.value, t.value.error
        )?;
    }
    Ok(s)
}

pub fn sweep(dir: &Path, sw: &Sweep) -> Result<String> {
    write_json(dir, "sweep.json", sw)?;
    let mut header = vec!["point"];
    header.extend(sw.axes.iter().map(String::as_str));
    header.extend(["quantity", "value", "error"]);
    let rows = sw.rows.iter().map(|r| {
        let mut v = vec![r.point.to_string()];
        v.extend(r.coords.iter().copied().map(num));
        v.extend([r.quantity.to_string(), num(r.value), num(r.error)]);
        v
    });
    write_csv(dir, "sweep.csv", &header, rows)?;
    let mut s = String::new();
    writeln!(
        s,
        "sweep of `{:?}` over {}",
        sw.command,
        sw.axes.join(" x ")
    )?;
    for r in &sw.rows {
        let coords: Vec<String> = sw
            .axes
            .iter()
            .zip(&r.coords)
            .map(|(n, v)| format!("{n} = {v}"))
            .collect();
        writeln!(
            s,
            "  [{}] {:<28} {} = {}",
            r.point,
            coords.join(", "),
            r.quantity,
            r.value
        )?;
    }
    for (i, e) in &sw.failures {
        writeln!(s, "  [{i}] failed: {e}")?;
    }
    Ok(s)
}
