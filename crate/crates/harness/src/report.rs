//! Structured-text and JSON renderings of a regime classification.

use std::fmt::Write;

use dlab_core::regime::{fraction_string, thresholds, Model, ModelParams, RegimeReport};
use serde_json::{json, Map, Value};

fn params_json(p: &ModelParams) -> Value {
    json!({
        "model": p.model.to_string(),
        "N": p.dim,
        "b": fraction_string(&p.b),
        "q": fraction_string(&p.q),
        "alpha": if p.model == Model::Inlh { Value::String(fraction_string(&p.alpha)) } else { Value::Null },
    })
}

/// One JSON object per tuple; every rational is a fraction string.
pub fn regime_json(r: &RegimeReport) -> Value {
    let t = thresholds(&r.params);
    let certificates: Vec<Value> = r
        .certificates
        .iter()
        .map(|c| {
            let witness: Map<String, Value> = c
                .witness
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(fraction_string(v))))
                .collect();
            json!({
                "system": c.system.name(),
                "feasible": c.feasible,
                "witness": witness,
                "violation": c.violation,
            })
        })
        .collect();
    json!({
        "params": params_json(&r.params),
        "valid": r.valid,
        "s_crit": fraction_string(&r.s_crit),
        "mass_class": format!("{:?}", r.mass_class),
        "theorem_label": r.theorem_label.to_string(),
        "thresholds": {
            "nonscattering_low": fraction_string(&t.nonscattering_low),
            "split": fraction_string(&t.split),
            "scattering_high": fraction_string(&t.scattering_high),
        },
        "certificates": certificates,
        "notes": r.notes,
    })
}

/// Record for a tuple that failed the condition check.
pub fn invalid_json(p: &ModelParams, reason: &str) -> Value {
    json!({ "params": params_json(p), "valid": false, "error": reason })
}

pub fn regime_text(r: &RegimeReport) -> String {
    let t = thresholds(&r.params);
    let mut s = String::new();
    let _ = writeln!(s, "{}", r.params);
    let _ = writeln!(s, "  s_c            {}", fraction_string(&r.s_crit));
    let _ = writeln!(s, "  mass class     {:?}", r.mass_class);
    let _ = writeln!(s, "  theorem label  {}", r.theorem_label);
    let _ = writeln!(
        s,
        "  thresholds     low {}  split {}  high {}",
        fraction_string(&t.nonscattering_low),
        fraction_string(&t.split),
        fraction_string(&t.scattering_high)
    );
    for c in &r.certificates {
        if c.feasible {
            let w: Vec<String> = c
                .witness
                .iter()
                .map(|(k, v)| format!("{k}={}", fraction_string(v)))
                .collect();
            let _ = writeln!(s, "  {:<11} feasible    {}", c.system.name(), w.join(" "));
        } else {
            let _ = writeln!(
                s,
                "  {:<11} infeasible  {}",
                c.system.name(),
                c.violation.as_deref().unwrap_or("")
            );
        }
    }
    for n in &r.notes {
        let _ = writeln!(s, "  note: {n}");
    }
    s
}
