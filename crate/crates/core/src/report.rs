//! Machine-readable documents emitted by the CLI and the C API, plus the
//! plain-text renderings of run results.
//!
//! Every document carries `"schema_version"`; the JSON Schemas live in the
//! crate's `schemas/` directory.

use std::fmt::Write;

use serde_json::{json, Map, Value};

use crate::densmat::matrix_to_value;
use crate::gates::{GateSequence, PhaseDistance, SynthOutcome};
use crate::interp::{history_key, RunResult};
use crate::json::{to_json_string, SCHEMA_VERSION};
use crate::lang::{ParseError, TypeErrors};
use crate::qram::ShotReport;

pub fn exact_document(r: &RunResult) -> Value {
    let outcomes: Map<String, Value> = r
        .outcome_distribution
        .iter()
        .map(|(k, &p)| (k.clone(), json!(p)))
        .collect();
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "backend": "exact",
        "outcomes": outcomes,
        "loop_residual": r.loop_residual,
        "pruned_trace": r.pruned_trace,
        "merged_rho": matrix_to_value(r.merged.rho.matrix()),
        "qubits": r.merged.qubits,
    });
    if let Some(branches) = &r.branches {
        doc["branches"] = branches
            .iter()
            .map(|b| {
                json!({
                    "history": history_key(&b.history),
                    "probability": b.rho.trace(),
                    "rho": matrix_to_value(b.rho.matrix()),
                })
            })
            .collect();
    }
    doc
}

pub fn sample_document(r: &ShotReport) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "backend": "sample",
        "shots": r.shots,
        "seed": r.seed,
        "counts": r.counts,
        "truncated": r.truncated,
    })
}

fn sequence_value(seq: &GateSequence, d: &PhaseDistance) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "result": "found",
        "lines": seq.num_lines,
        "steps": seq.steps.iter().map(|s| json!({"gate": s.gate.as_str(), "targets": s.targets})).collect::<Vec<_>>(),
        "distance": d.distance,
        "phase": [d.phase.re, d.phase.im],
    })
}

pub fn synth_document(outcome: &SynthOutcome) -> Value {
    match outcome {
        SynthOutcome::Found { sequence, distance } => sequence_value(sequence, distance),
        SynthOutcome::NotFound {
            best_distance,
            max_depth,
        } => json!({
            "schema_version": SCHEMA_VERSION,
            "result": "not_found",
            "best_distance": best_distance,
            "max_depth": max_depth,
        }),
    }
}

/// A failed operation: `kind` is a stable error category, `diagnostics`
/// lists source-level problems when there are any.
pub fn error_document(kind: &str, message: &str, diagnostics: &[Value]) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "error": kind,
        "message": message,
        "diagnostics": diagnostics,
    })
}

pub fn parse_diagnostic(e: &ParseError) -> Value {
    json!({
        "line": e.span.line,
        "column": e.span.column,
        "kind": "ParseError",
        "message": e.to_string(),
    })
}

pub fn type_diagnostics(errs: &TypeErrors) -> Vec<Value> {
    errs.0
        .iter()
        .map(|e| {
            let span = e.span();
            json!({
                "line": span.line,
                "column": span.column,
                "kind": e.variant_name(),
                "message": e.to_string(),
            })
        })
        .collect()
}

/// Compact JSON with `%.17g` floats and a trailing newline.
pub fn render(doc: &Value) -> String {
    let mut s = to_json_string(doc);
    s.push('\n');
    s
}

const KEY_WIDTH: usize = 40;

fn table(out: &mut String, header: (&str, &str), rows: &[(String, String)]) {
    let width = rows
        .iter()
        .map(|r| r.0.len())
        .chain([header.0.len()])
        .max()
        .unwrap_or(0)
        .min(KEY_WIDTH);
    writeln!(out, "{:<width$}  {}", header.0, header.1).unwrap();
    for (k, v) in rows {
        let k = if k.is_empty() { "(none)" } else { k };
        writeln!(out, "{k:<width$}  {v}").unwrap();
    }
}

pub fn exact_text(r: &RunResult) -> String {
    let mut out = String::new();
    writeln!(out, "backend: exact").unwrap();
    writeln!(out, "qubits: {}", r.merged.qubits.join(" ")).unwrap();
    let rows: Vec<(String, String)> = r
        .outcome_distribution
        .iter()
        .map(|(k, p)| (k.clone(), format!("{p:.12}")))
        .collect();
    table(&mut out, ("history", "probability"), &rows);
    writeln!(out, "loop_residual: {:.3e}", r.loop_residual).unwrap();
    if r.pruned_trace > 0.0 {
        writeln!(out, "pruned_trace: {:.3e}", r.pruned_trace).unwrap();
    }
    let diag: Vec<String> = (0..r.merged.rho.dim())
        .map(|i| format!("{:.12}", r.merged.rho.matrix()[(i, i)].re))
        .collect();
    writeln!(out, "merged diagonal: {}", diag.join(" ")).unwrap();
    out
}

pub fn sample_text(r: &ShotReport) -> String {
    let mut out = String::new();
    writeln!(out, "backend: sample").unwrap();
    writeln!(out, "shots: {}  seed: {}", r.shots, r.seed).unwrap();
    let rows: Vec<(String, String)> = r
        .counts
        .iter()
        .map(|(k, &c)| (k.clone(), format!("{c:>8}  {:.6}", c as f64 / r.shots as f64)))
        .collect();
    table(&mut out, ("history", "   count  frequency"), &rows);
    if r.truncated > 0 {
        writeln!(out, "truncated: {}", r.truncated).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{synthesize, Gate};
    use crate::interp::{run_exact, InterpConfig};
    use crate::lang::{parse, typecheck};

    #[test]
    fn exact_document_shape() {
        let p = typecheck(&parse("proc main() { new qbit q; q *= H; measure q { 0: {} 1: {} } }").unwrap()).unwrap();
        let r = run_exact(&p, &InterpConfig::default()).unwrap();
        let text = render(&exact_document(&r));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["backend"], "exact");
        assert_eq!(v["qubits"], json!(["q"]));
        assert!((v["outcomes"]["q=0"].as_f64().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(v["merged_rho"]["dim"], 2);
        assert!(v.get("branches").is_none());
        assert!(exact_text(&r).contains("q=1"));
    }

    #[test]
    fn synth_documents() {
        let target = Gate::N.matrix();
        let found = synthesize(&target, 1, 1e-12, 4).unwrap();
        let v = synth_document(&found);
        assert_eq!(v["result"], "found");
        let gates: Vec<&str> = v["steps"].as_array().unwrap().iter().map(|s| s["gate"].as_str().unwrap()).collect();
        assert_eq!(gates, ["H", "V", "V", "H"]);
        let missing = synthesize(&target, 1, 1e-12, 1).unwrap();
        let v = synth_document(&missing);
        assert_eq!(v["result"], "not_found");
        assert!(v["best_distance"].as_f64().unwrap() > 0.0);
    }
}
