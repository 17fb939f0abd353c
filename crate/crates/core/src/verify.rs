//! Serving-fidelity checks: a source snapshot file against the payload the
//! API serves for it, and the scores recomputed from each side.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::payload::ApiPayload;
use crate::scoring::{score_dao, ScoreCard};
use crate::snapshot::{BlockKind, ParsedSnapshot};

/// Relative tolerance for float comparisons; integers compare exactly.
pub const FLOAT_RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMismatch {
    pub field_path: String,
    /// Value in the source file, `None` if absent there.
    pub expected: Option<Value>,
    /// Value in the API payload, `None` if absent there.
    pub found: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreMismatch {
    pub field: String,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaoVerification {
    pub dao_name: String,
    pub chain_id: Option<u64>,
    pub source_path: String,
    pub field_mismatches: Vec<FieldMismatch>,
    pub score_mismatches: Vec<ScoreMismatch>,
    /// Set when the DAO could not be checked at all (rejected source,
    /// not served, transport failure).
    pub error: Option<String>,
}

impl DaoVerification {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.field_mismatches.is_empty() && self.score_mismatches.is_empty()
    }

    pub fn failed(
        dao_name: impl Into<String>,
        chain_id: Option<u64>,
        source_path: impl Into<String>,
        error: impl Into<String>,
    ) -> Self {
        Self {
            dao_name: dao_name.into(),
            chain_id,
            source_path: source_path.into(),
            field_mismatches: Vec::new(),
            score_mismatches: Vec::new(),
            error: Some(error.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub daos: Vec<DaoVerification>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn new(daos: Vec<DaoVerification>) -> Self {
        let pass = daos.iter().all(DaoVerification::passed);
        Self { daos, pass }
    }
}

/// Compares one source document with its served payload.
pub fn verify_payload(source_path: &str, source: &ParsedSnapshot, payload: &ApiPayload) -> DaoVerification {
    DaoVerification {
        dao_name: source.snapshot.dao_name.clone(),
        chain_id: Some(source.snapshot.chain_id),
        source_path: source_path.to_string(),
        field_mismatches: compare_fields(source, payload),
        score_mismatches: compare_scores(source, payload),
        error: None,
    }
}

pub fn compare_fields(source: &ParsedSnapshot, payload: &ApiPayload) -> Vec<FieldMismatch> {
    let mut out = Vec::new();
    let s = &source.snapshot;
    let mut identity = |path: &str, expected: Value, found: Value| {
        if expected != found {
            out.push(FieldMismatch { field_path: path.into(), expected: Some(expected), found: Some(found) });
        }
    };
    identity("dao_name", s.dao_name.clone().into(), payload.dao_name.clone().into());
    identity("chain_id", s.chain_id.into(), payload.chain_id.into());
    identity("timestamp", s.timestamp.clone().into(), payload.timestamp.clone().into());

    let empty = Map::new();
    for kind in BlockKind::ALL {
        let expected = source.blocks.get(kind).unwrap_or(&empty);
        compare_maps(kind.as_str(), expected, payload.block(kind), &mut out);
    }
    out
}

fn compare_maps(path: &str, expected: &Map<String, Value>, found: &Map<String, Value>, out: &mut Vec<FieldMismatch>) {
    for (key, e) in expected {
        let child = format!("{path}.{key}");
        match found.get(key) {
            Some(f) => compare_values(&child, e, f, out),
            None => out.push(FieldMismatch { field_path: child, expected: Some(e.clone()), found: None }),
        }
    }
    for (key, f) in found {
        if !expected.contains_key(key) {
            out.push(FieldMismatch { field_path: format!("{path}.{key}"), expected: None, found: Some(f.clone()) });
        }
    }
}

fn compare_values(path: &str, expected: &Value, found: &Value, out: &mut Vec<FieldMismatch>) {
    let mismatch =
        || FieldMismatch { field_path: path.into(), expected: Some(expected.clone()), found: Some(found.clone()) };
    match (expected, found) {
        (Value::Object(e), Value::Object(f)) => compare_maps(path, e, f, out),
        (Value::Array(e), Value::Array(f)) => {
            if e.len() != f.len() {
                out.push(mismatch());
                return;
            }
            for (i, (ev, fv)) in e.iter().zip(f).enumerate() {
                compare_values(&format!("{path}[{i}]"), ev, fv, out);
            }
        }
        (Value::Number(e), Value::Number(f)) => {
            if !numbers_match(e, f) {
                out.push(mismatch());
            }
        }
        (e, f) if e == f => {}
        _ => out.push(mismatch()),
    }
}

/// Same numeric type (integer vs float) and equal value: exact for
/// integers, within [`FLOAT_RELATIVE_TOLERANCE`] for floats.
pub fn numbers_match(e: &Number, f: &Number) -> bool {
    match (e.is_f64(), f.is_f64()) {
        (false, false) => e == f,
        (true, true) => {
            let (a, b) = (e.as_f64().unwrap_or(f64::NAN), f.as_f64().unwrap_or(f64::NAN));
            a == b || (a - b).abs() <= FLOAT_RELATIVE_TOLERANCE * a.abs().max(b.abs())
        }
        _ => false,
    }
}

/// Scores computed from the source file versus scores computed from the
/// served payload.
pub fn compare_scores(source: &ParsedSnapshot, payload: &ApiPayload) -> Vec<ScoreMismatch> {
    let expected = score_dao(&source.snapshot);
    let found = match payload.to_parsed() {
        Ok(p) => score_dao(&p.snapshot),
        Err(e) => {
            return vec![ScoreMismatch {
                field: "payload".into(),
                expected: "a scoreable payload".into(),
                found: e.to_string(),
            }]
        }
    };
    diff_cards(&expected, &found)
}

pub fn diff_cards(expected: &ScoreCard, found: &ScoreCard) -> Vec<ScoreMismatch> {
    let mut out = Vec::new();
    let mut check = |field: &str, e: String, f: String| {
        if e != f {
            out.push(ScoreMismatch { field: field.into(), expected: e, found: f });
        }
    };
    check("s_participation", expected.s_participation.to_string(), found.s_participation.to_string());
    check("s_funds", expected.s_funds.to_string(), found.s_funds.to_string());
    check("s_voting", expected.s_voting.to_string(), found.s_voting.to_string());
    check("s_decentralisation", expected.s_decentralisation.to_string(), found.s_decentralisation.to_string());
    check("composite", expected.composite.to_string(), found.composite.to_string());
    check("band", expected.band.to_string(), found.band.to_string());
    check("policy_version", expected.policy_version.clone(), found.policy_version.clone());
    out
}
