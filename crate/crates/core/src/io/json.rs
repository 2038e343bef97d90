use serde_json::{json, Value};

use crate::reasoner::{Model, Verdict};

pub const SCHEMA_VERSION: u64 = 1;

/// Versioned JSON form of a verdict. Node maps are keyed by source node ids.
pub fn emit_result(verdict: &Verdict, model: Option<Model>) -> Value {
    let mut v = json!({
        "schema": SCHEMA_VERSION,
        "outcome": verdict.outcome.to_string(),
        "budget_spent": verdict.budget_spent,
        "certificate": verdict.certificate,
        "diagnostics": verdict.diagnostics,
    });
    if let Some(m) = model {
        v["model"] = json!(m.name());
    }
    v
}
