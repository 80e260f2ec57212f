//! Canonical JSON for computed sets and rule outcomes.
//!
//! Reports must be byte-identical across runs, so everything that reaches
//! the report file is canonical: generators and constraint rows are sorted,
//! rationals are printed in lowest terms, and nothing time- or
//! machine-dependent is written (wall times go to stderr only).

use serde_json::{json, Value};
use vacal_core::calculus_rules::{QcStatus, Relation, RuleReport, Verdict};
use vacal_core::linalg::Vector;
use vacal_core::normal_cones::{ConeUnion, PolyUnion};
use vacal_core::polyhedra::{Cone, Polyhedron};
use vacal_core::scalar::{format_scalar, Scalar};

pub fn vector_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(|c| Value::String(format_scalar(c))).collect())
}

fn vectors_json(vs: &[Vector]) -> Value {
    let mut sorted: Vec<&Vector> = vs.iter().collect();
    sorted.sort();
    Value::Array(sorted.into_iter().map(|v| vector_json(v)).collect())
}

fn rows_json(rows: &[(Vector, Scalar)]) -> Value {
    let mut sorted: Vec<&(Vector, Scalar)> = rows.iter().collect();
    sorted.sort();
    Value::Array(
        sorted
            .into_iter()
            .map(|(normal, rhs)| {
                json!({
                    "normal": vector_json(normal),
                    "rhs": format_scalar(rhs),
                })
            })
            .collect(),
    )
}

/// Both representations of one polyhedron, fully sorted.
pub fn poly_json(p: &Polyhedron) -> Value {
    json!({
        "vertices": vectors_json(p.vertices()),
        "rays": vectors_json(p.rays()),
        "lineality": vectors_json(p.lineality()),
        "ineqs": rows_json(p.ineqs()),
        "eqs": rows_json(p.eqs()),
    })
}

pub fn union_json(u: &PolyUnion) -> Value {
    let mut parts: Vec<&Polyhedron> = u.parts().iter().collect();
    parts.sort();
    json!({
        "dim": u.dim(),
        "parts": Value::Array(parts.into_iter().map(poly_json).collect()),
    })
}

pub fn cone_json(c: &Cone) -> Value {
    json!({
        "dim": c.dim(),
        "parts": if c.is_empty_marker() {
            Value::Array(vec![])
        } else {
            Value::Array(vec![poly_json(c.as_poly())])
        },
    })
}

pub fn cone_union_json(u: &ConeUnion) -> Value {
    let mut parts: Vec<Value> = u.parts().iter().map(|c| poly_json(c.as_poly())).collect();
    parts.sort_by_key(|v| v.to_string());
    json!({
        "dim": u.dim(),
        "parts": Value::Array(parts),
    })
}

pub fn qc_json(qc: &QcStatus) -> Value {
    match qc {
        QcStatus::Satisfied => json!({ "status": "satisfied" }),
        QcStatus::Violated(witness) => match witness {
            Some(w) => json!({ "status": "violated", "witness": vector_json(w) }),
            None => json!({ "status": "violated" }),
        },
        QcStatus::NotApplicable => json!({ "status": "not-applicable" }),
    }
}

pub fn relation_label(r: Relation) -> &'static str {
    match r {
        Relation::Equality => "equality",
        Relation::LhsWithinRhs => "lhs-within-rhs",
        Relation::RhsWithinLhs => "rhs-within-lhs",
    }
}

pub fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Confirmed => json!({ "status": "confirmed" }),
        Verdict::Skipped(reason) => json!({ "status": "skipped", "reason": reason }),
        Verdict::Refuted(witness) => {
            json!({ "status": "refuted", "witness": vector_json(witness) })
        }
    }
}

pub fn verdict_label(v: &Verdict) -> &'static str {
    match v {
        Verdict::Confirmed => "confirmed",
        Verdict::Skipped(_) => "skipped",
        Verdict::Refuted(_) => "refuted",
    }
}

pub fn qc_label(qc: &QcStatus) -> &'static str {
    match qc {
        QcStatus::Satisfied => "satisfied",
        QcStatus::Violated(_) => "violated",
        QcStatus::NotApplicable => "not-applicable",
    }
}

pub fn rule_report_json(r: &RuleReport) -> Value {
    json!({
        "rule_id": r.rule_id,
        "qc": qc_json(&r.qc),
        "relation": relation_label(r.relation),
        "verdict": verdict_json(&r.verdict),
        "assumptions": r.assumptions,
        "lhs": union_json(&r.lhs),
        "rhs": union_json(&r.rhs),
    })
}
