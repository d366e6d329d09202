//! Machine-readable reports, text tables and the static spectrum plot.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::basis::ErrorBasis;
use crate::classify::{Family, MuVector, TVector};
use crate::io::{complex, complex_list, matrix, mps_to_json, num, object};
use crate::linalg::C64;
use crate::mps::{MpsTensor, SchmidtSpectrum};
use crate::protocol::TrialStats;
use crate::push::{ErrorClass, GluabilityReport, NogoReport, PushRecord};

fn record_json(label: &str, r: &PushRecord, basis: &ErrorBasis) -> Value {
    let (period, preperiod) = match r.classification {
        ErrorClass::TopologicalPeriodic { period, preperiod } => (json!(period), json!(preperiod)),
        ErrorClass::TopologicalUniform => (json!(1), json!(0)),
        _ => (Value::Null, Value::Null),
    };
    let steps: Vec<Value> = r
        .steps
        .iter()
        .map(|s| {
            let out = basis.find(&s.v_out, 1e-9).map(|(i, _)| basis.labels[i].clone());
            json!({
                "phase": complex(s.phase),
                "residual": num(s.residual),
                "transfer_residual": num(s.transfer_residual),
                "u_phys": matrix(&s.u_phys),
                "v_out": matrix(&s.v_out),
                "v_out_label": out,
            })
        })
        .collect();
    json!({
        "label": label,
        "classification": r.classification.label(),
        "period": period,
        "preperiod": preperiod,
        "trivialize_index": r.trivialize_index,
        "failure": r.failure,
        "max_residual": num(r.max_residual()),
        "steps": steps,
    })
}

pub fn gluability_json(r: &GluabilityReport, basis: &ErrorBasis) -> Value {
    let errors: Vec<Value> = r
        .labels
        .iter()
        .zip(&r.per_error)
        .map(|(l, rec)| record_json(l, rec, basis))
        .collect();
    json!({
        "verdict": r.verdict.label(),
        "canonical_residual": num(r.canonical_residual),
        "basis_preserved": r.basis_preserved,
        "diagnostics": {
            "flat_spectrum": r.diagnostics.flat_spectrum,
            "correlation_zeros": r.diagnostics.correlation_zeros,
            "nogo_triggered": r.diagnostics.nogo_triggered,
        },
        "entanglement_spectrum": r.spectrum.as_ref().map(|s| s.values.iter().map(|&x| num(x)).collect::<Vec<_>>()),
        "correlation_spectrum": complex_list(&r.correlation_eigenvalues),
        "numerical_rank": r.numerical_rank,
        "degenerate": r.degenerate,
        "errors": errors,
        "notes": r.notes,
    })
}

pub fn nogo_json(n: &NogoReport) -> Value {
    json!({
        "nonflat": n.nonflat,
        "fullrank": n.fullrank,
        "nogo": n.nogo,
        "numerical_rank": n.numerical_rank,
        "spectrum": n.spectrum.iter().map(|&x| num(x)).collect::<Vec<_>>(),
    })
}

pub fn trials_json(s: &TrialStats) -> Value {
    let hist = object(s.labels.iter().zip(&s.histogram).map(|(l, &k)| (l.clone(), json!(k))));
    json!({
        "n": s.n,
        "trials": s.trials,
        "seed": s.seed,
        "min_fidelity": num(s.min_fidelity),
        "mean_fidelity": num(s.mean_fidelity),
        "chi_square": num(s.chi_square),
        "dof": s.dof,
        "p_value": num(s.p_value),
        "max_prob_deviation": num(s.max_prob_deviation),
        "outcome_histogram": hist,
    })
}

pub fn spectrum_json(corr: Option<&[C64]>, ent: Option<&SchmidtSpectrum>) -> Value {
    let mut m = serde_json::Map::new();
    if let Some(c) = corr {
        m.insert("correlation".into(), complex_list(c));
    }
    if let Some(e) = ent {
        m.insert("entanglement".into(), Value::Array(e.values.iter().map(|&x| num(x)).collect()));
    }
    Value::Object(m)
}

pub fn family_json(f: &Family, samples: &[MpsTensor]) -> Value {
    json!({
        "chi": f.chi,
        "commutant_dim": f.commutant.dim,
        "generators": f.commutant.generators.len(),
        "max_residual": num(f.commutant.max_residual),
        "basis": f.commutant.basis.iter().map(matrix).collect::<Vec<_>>(),
        "samples": samples.iter().map(mps_to_json).collect::<Vec<_>>(),
    })
}

pub fn conversion_json(t: &TVector, mu: &MuVector, tensor: &MpsTensor) -> Value {
    json!({
        "t": complex_list(t.values()),
        "mu": complex_list(&mu.mu),
        "physical": mu.physical,
        "tensor": mps_to_json(tensor),
    })
}

fn fmt_c(z: C64) -> String {
    format!("{:>+.10} {:>+.10}i", z.re, z.im)
}

pub fn correlation_table(ev: &[C64]) -> String {
    let mut s = String::new();
    for (k, z) in ev.iter().enumerate() {
        let _ = writeln!(s, "corr  {k:>3}  {}  |{:.10}|", fmt_c(*z), z.norm());
    }
    s
}

pub fn entanglement_table(sp: &SchmidtSpectrum) -> String {
    let mut s = String::new();
    for (k, x) in sp.values.iter().enumerate() {
        let _ = writeln!(s, "ent   {k:>3}  {x:.12}");
    }
    s
}

pub fn gluability_table(r: &GluabilityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "verdict: {}", r.verdict.label());
    let _ = writeln!(
        s,
        "flat spectrum: {}  correlation zeros: {}  nogo: {}  basis preserved: {}",
        r.diagnostics.flat_spectrum, r.diagnostics.correlation_zeros, r.diagnostics.nogo_triggered, r.basis_preserved
    );
    for (l, rec) in r.labels.iter().zip(&r.per_error) {
        let extra = match rec.classification {
            ErrorClass::TopologicalPeriodic { period, preperiod } => format!(" period {period} preperiod {preperiod}"),
            ErrorClass::Local => format!(" trivial after {}", rec.trivialize_index.unwrap_or(0) + 1),
            _ => String::new(),
        };
        let _ = writeln!(
            s,
            "  {l:<8} {}{extra}  max residual {:.2e}",
            rec.classification.label(),
            rec.max_residual()
        );
    }
    if let Some(sp) = &r.spectrum {
        s.push_str(&entanglement_table(sp));
    }
    s.push_str(&correlation_table(&r.correlation_eigenvalues));
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

/// Correlation eigenvalues in the unit disk (left panel) and the Schmidt
/// values as bars (right panel). Output depends only on the inputs.
pub fn spectrum_svg(corr: &[C64], ent: Option<&SchmidtSpectrum>) -> String {
    let (w, h) = (640.0, 320.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let (cx, cy, r) = (160.0, 165.0, 130.0);
    let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="{r}" fill="none" stroke="gray"/>"#);
    let _ = writeln!(s, r#"<line x1="{}" y1="{cy}" x2="{}" y2="{cy}" stroke="lightgray"/>"#, cx - r, cx + r);
    let _ = writeln!(s, r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="lightgray"/>"#, cy - r, cy + r);
    let _ = writeln!(s, r#"<text x="{cx}" y="20" text-anchor="middle" font-size="14">correlation spectrum</text>"#);
    for z in corr {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="steelblue"/>"#,
            cx + r * z.re,
            cy - r * z.im
        );
    }
    let _ = writeln!(s, r#"<text x="480" y="20" text-anchor="middle" font-size="14">entanglement spectrum</text>"#);
    if let Some(sp) = ent {
        let (x0, y0, bw, bh) = (340.0, 295.0, 280.0, 260.0);
        let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="gray"/>"#, x0 + bw);
        let n = sp.values.len().max(1) as f64;
        let step = bw / n;
        for (k, &v) in sp.values.iter().enumerate() {
            let hgt = bh * v.clamp(0.0, 1.0);
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="indianred"/>"#,
                x0 + step * k as f64 + step * 0.1,
                y0 - hgt,
                step * 0.8,
                hgt
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
