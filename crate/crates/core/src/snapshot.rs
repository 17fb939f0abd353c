//! Canonical DAO snapshot model.
//!
//! A snapshot document carries identity fields (`dao_name`, `chain_id`,
//! `timestamp`) and up to five metric blocks. Blocks may sit at the document
//! root or under a nested `metrics` object; root placement wins when both are
//! present. Parsing never fabricates values: anything missing, mistyped or
//! negative ends up absent in the typed model and is listed in the
//! [`ValidationReport`].

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Key of the optional wrapper object that may hold the metric blocks.
pub const NESTED_METRICS_KEY: &str = "metrics";

/// One of the five canonical metric blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    NetworkParticipation,
    AccumulatedFunds,
    VotingEfficiency,
    Decentralisation,
    HealthMetrics,
}

impl BlockKind {
    /// All blocks in canonical serialisation order.
    pub const ALL: [BlockKind; 5] = [
        BlockKind::NetworkParticipation,
        BlockKind::AccumulatedFunds,
        BlockKind::VotingEfficiency,
        BlockKind::Decentralisation,
        BlockKind::HealthMetrics,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::NetworkParticipation => "network_participation",
            BlockKind::AccumulatedFunds => "accumulated_funds",
            BlockKind::VotingEfficiency => "voting_efficiency",
            BlockKind::Decentralisation => "decentralisation",
            BlockKind::HealthMetrics => "health_metrics",
        }
    }

    /// Legacy spellings accepted on input and rewritten to the canonical key.
    pub fn legacy_alias(self) -> Option<&'static str> {
        match self {
            BlockKind::Decentralisation => Some("decentralization"),
            _ => None,
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|kind| kind.as_str() == key || kind.legacy_alias() == Some(key))
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    Syntax,
    MissingIdentity,
    MissingBlock,
    MissingField,
    TypeMismatch,
    NegativeValue,
    OutOfRange,
    Inconsistent,
    InvalidTimestamp,
    PlacementConflict,
    LegacyKey,
    Normalised,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub kind: IssueKind,
    pub field_path: String,
    pub message: String,
}

/// Problems found while reading one snapshot document.
///
/// Errors mean the document was rejected; warnings mean it was accepted
/// with the listed fields treated as absent or normalised.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn warn(&mut self, kind: IssueKind, field_path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Warning,
            kind,
            field_path: field_path.into(),
            message: message.into(),
        });
    }

    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn count(&self, kind: IssueKind) -> usize {
        self.issues.iter().filter(|i| i.kind == kind).count()
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Tri-state on-chain automation flag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AutomationFlag {
    Yes,
    No,
    #[default]
    Unknown,
}

impl AutomationFlag {
    /// Canonical JSON form, `None` for [`AutomationFlag::Unknown`].
    pub fn to_json(self) -> Option<Value> {
        match self {
            AutomationFlag::Yes => Some(Value::from("Yes")),
            AutomationFlag::No => Some(Value::from("No")),
            AutomationFlag::Unknown => None,
        }
    }
}

/// Maps a raw `on_chain_automation` value onto the tri-state flag.
///
/// Booleans and case-insensitive `"yes"`/`"no"` strings are recognised;
/// every other value (including `null` and absence) is `Unknown`.
pub fn normalize_automation(raw: Option<&Value>) -> AutomationFlag {
    match raw {
        Some(Value::Bool(true)) => AutomationFlag::Yes,
        Some(Value::Bool(false)) => AutomationFlag::No,
        Some(Value::String(s)) if s.trim().eq_ignore_ascii_case("yes") => AutomationFlag::Yes,
        Some(Value::String(s)) if s.trim().eq_ignore_ascii_case("no") => AutomationFlag::No,
        _ => AutomationFlag::Unknown,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkParticipation {
    pub num_distinct_voters: Option<f64>,
    pub total_members: Option<f64>,
    /// Upstream-reported turnout; informational only.
    pub participation_rate: Option<f64>,
    pub unique_proposers: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AccumulatedFunds {
    pub treasury_value_usd: Option<f64>,
    pub circulating_supply: Option<f64>,
    pub total_supply: Option<f64>,
    pub circulating_token_percentage: Option<f64>,
    pub token_price_usd: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VotingEfficiency {
    pub total_proposals: Option<f64>,
    pub approved_proposals: Option<f64>,
    /// Either a fraction in `[0, 1]` or a percentage above 1.
    pub approval_rate: Option<f64>,
    pub avg_voting_duration_days: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Decentralisation {
    pub largest_holder_percent: Option<f64>,
    pub on_chain_automation: AutomationFlag,
    pub proposer_concentration: Option<f64>,
    pub token_distribution: Option<Value>,
}

/// One DAO's harmonised metric record.
#[derive(Debug, Clone, PartialEq)]
pub struct DaoSnapshot {
    pub dao_name: String,
    pub chain_id: u64,
    pub timestamp: Option<String>,
    pub network_participation: Option<NetworkParticipation>,
    pub accumulated_funds: Option<AccumulatedFunds>,
    pub voting_efficiency: Option<VotingEfficiency>,
    pub decentralisation: Option<Decentralisation>,
    pub health_metrics: Option<Map<String, Value>>,
}

impl DaoSnapshot {
    /// A snapshot with identity only and every block absent.
    pub fn empty(dao_name: impl Into<String>, chain_id: u64) -> Self {
        Self {
            dao_name: dao_name.into(),
            chain_id,
            timestamp: None,
            network_participation: None,
            accumulated_funds: None,
            voting_efficiency: None,
            decentralisation: None,
            health_metrics: None,
        }
    }

    /// Serialises the interpreted fields back into the snapshot file format
    /// with every block at the root.
    pub fn to_json(&self) -> Value {
        let mut doc = Map::new();
        doc.insert("dao_name".into(), self.dao_name.clone().into());
        doc.insert("chain_id".into(), self.chain_id.into());
        if let Some(ts) = &self.timestamp {
            doc.insert("timestamp".into(), ts.clone().into());
        }
        if let Some(p) = &self.network_participation {
            let mut b = Map::new();
            put(&mut b, "num_distinct_voters", p.num_distinct_voters);
            put(&mut b, "total_members", p.total_members);
            put(&mut b, "participation_rate", p.participation_rate);
            put(&mut b, "unique_proposers", p.unique_proposers);
            doc.insert(BlockKind::NetworkParticipation.as_str().into(), b.into());
        }
        if let Some(f) = &self.accumulated_funds {
            let mut b = Map::new();
            put(&mut b, "treasury_value_usd", f.treasury_value_usd);
            put(&mut b, "circulating_supply", f.circulating_supply);
            put(&mut b, "total_supply", f.total_supply);
            put(&mut b, "circulating_token_percentage", f.circulating_token_percentage);
            put(&mut b, "token_price_usd", f.token_price_usd);
            doc.insert(BlockKind::AccumulatedFunds.as_str().into(), b.into());
        }
        if let Some(v) = &self.voting_efficiency {
            let mut b = Map::new();
            put(&mut b, "total_proposals", v.total_proposals);
            put(&mut b, "approved_proposals", v.approved_proposals);
            put(&mut b, "approval_rate", v.approval_rate);
            put(&mut b, "avg_voting_duration_days", v.avg_voting_duration_days);
            doc.insert(BlockKind::VotingEfficiency.as_str().into(), b.into());
        }
        if let Some(d) = &self.decentralisation {
            let mut b = Map::new();
            put(&mut b, "largest_holder_percent", d.largest_holder_percent);
            if let Some(flag) = d.on_chain_automation.to_json() {
                b.insert("on_chain_automation".into(), flag);
            }
            put(&mut b, "proposer_concentration", d.proposer_concentration);
            if let Some(td) = &d.token_distribution {
                b.insert("token_distribution".into(), td.clone());
            }
            doc.insert(BlockKind::Decentralisation.as_str().into(), b.into());
        }
        if let Some(h) = &self.health_metrics {
            doc.insert(BlockKind::HealthMetrics.as_str().into(), h.clone().into());
        }
        Value::Object(doc)
    }
}

fn put(block: &mut Map<String, Value>, key: &str, value: Option<f64>) {
    if let Some(v) = value {
        block.insert(key.into(), number_value(v));
    }
}

/// Integral values within the exact `f64` integer range serialise as JSON
/// integers; everything else as a float.
fn number_value(v: f64) -> Value {
    const EXACT: f64 = 9_007_199_254_740_992.0;
    if v.fract() == 0.0 && v.abs() < EXACT {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

/// The metric blocks of one document as they will be stored and served,
/// after key aliasing and flag normalisation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawBlocks {
    blocks: Vec<(BlockKind, Map<String, Value>)>,
}

impl RawBlocks {
    pub fn get(&self, kind: BlockKind) -> Option<&Map<String, Value>> {
        self.blocks.iter().find(|(k, _)| *k == kind).map(|(_, b)| b)
    }

    pub fn insert(&mut self, kind: BlockKind, block: Map<String, Value>) {
        match self.blocks.iter_mut().find(|(k, _)| *k == kind) {
            Some(slot) => slot.1 = block,
            None => {
                self.blocks.push((kind, block));
                self.blocks.sort_by_key(|(k, _)| *k);
            }
        }
    }

    /// Present blocks in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (BlockKind, &Map<String, Value>)> {
        self.blocks.iter().map(|(k, b)| (*k, b))
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Result of reading one accepted document.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSnapshot {
    pub snapshot: DaoSnapshot,
    pub blocks: RawBlocks,
    pub report: ValidationReport,
}

impl ParsedSnapshot {
    /// Reassembles the normalised document: identity fields followed by the
    /// present blocks at the root.
    pub fn normalised_document(&self) -> Value {
        let mut doc = Map::new();
        doc.insert("dao_name".into(), self.snapshot.dao_name.clone().into());
        doc.insert("chain_id".into(), self.snapshot.chain_id.into());
        if let Some(ts) = &self.snapshot.timestamp {
            doc.insert("timestamp".into(), ts.clone().into());
        }
        for (kind, block) in self.blocks.iter() {
            doc.insert(kind.as_str().into(), Value::Object(block.clone()));
        }
        Value::Object(doc)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("document is not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("document root is not a JSON object")]
    NotAnObject,
    #[error("missing or invalid identity field `{field}`")]
    MissingIdentity { field: &'static str },
}

impl SnapshotError {
    /// The rejection expressed as a report entry.
    pub fn to_issue(&self) -> Issue {
        let (kind, field_path) = match self {
            SnapshotError::Syntax(_) => (IssueKind::Syntax, String::new()),
            SnapshotError::NotAnObject => (IssueKind::TypeMismatch, String::new()),
            SnapshotError::MissingIdentity { field } => (IssueKind::MissingIdentity, (*field).to_string()),
        };
        Issue { severity: Severity::Error, kind, field_path, message: self.to_string() }
    }
}

/// Parses a snapshot file's bytes.
pub fn parse_snapshot(raw: &[u8]) -> Result<ParsedSnapshot, SnapshotError> {
    let value: Value = serde_json::from_slice(raw)?;
    parse_snapshot_value(&value)
}

/// Parses an already-decoded JSON document.
pub fn parse_snapshot_value(value: &Value) -> Result<ParsedSnapshot, SnapshotError> {
    let root = value.as_object().ok_or(SnapshotError::NotAnObject)?;
    let mut report = ValidationReport::default();

    let dao_name = root
        .get("dao_name")
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or(SnapshotError::MissingIdentity { field: "dao_name" })?
        .to_string();
    let chain_id =
        root.get("chain_id").and_then(positive_integer).ok_or(SnapshotError::MissingIdentity { field: "chain_id" })?;

    let timestamp = match root.get("timestamp") {
        None | Some(Value::Null) => {
            report.warn(IssueKind::MissingField, "timestamp", "timestamp is missing");
            None
        }
        Some(Value::String(ts)) => {
            if !is_iso8601(ts) {
                report.warn(IssueKind::InvalidTimestamp, "timestamp", format!("`{ts}` is not an ISO-8601 datetime"));
            }
            Some(ts.clone())
        }
        Some(other) => {
            report.warn(IssueKind::TypeMismatch, "timestamp", format!("expected string, found {}", json_type(other)));
            None
        }
    };

    let nested = match root.get(NESTED_METRICS_KEY) {
        None => None,
        Some(Value::Object(m)) => Some(m),
        Some(other) => {
            report.warn(
                IssueKind::TypeMismatch,
                NESTED_METRICS_KEY,
                format!("expected object, found {}", json_type(other)),
            );
            None
        }
    };

    let mut blocks = RawBlocks::default();
    for kind in BlockKind::ALL {
        let at_root = locate_block(root, kind, "", &mut report);
        let in_nested = nested.and_then(|m| locate_block(m, kind, "metrics.", &mut report));
        let (path, raw) = match (at_root, in_nested) {
            (Some(r), Some(_)) => {
                report.warn(
                    IssueKind::PlacementConflict,
                    kind.as_str(),
                    format!("`{kind}` appears at the root and under `metrics`; the root block wins"),
                );
                r
            }
            (Some(r), None) => r,
            (None, Some(n)) => n,
            (None, None) => {
                report.warn(IssueKind::MissingBlock, kind.as_str(), format!("block `{kind}` is missing"));
                continue;
            }
        };
        match raw {
            Value::Object(block) => {
                let mut block = block.clone();
                if kind == BlockKind::Decentralisation {
                    normalise_automation_field(&mut block, &path, &mut report);
                }
                blocks.insert(kind, block);
            }
            other => report.warn(IssueKind::TypeMismatch, path, format!("expected object, found {}", json_type(other))),
        }
    }

    let snapshot = DaoSnapshot {
        dao_name,
        chain_id,
        timestamp,
        network_participation: blocks.get(BlockKind::NetworkParticipation).map(|b| read_participation(b, &mut report)),
        accumulated_funds: blocks.get(BlockKind::AccumulatedFunds).map(|b| read_funds(b, &mut report)),
        voting_efficiency: blocks.get(BlockKind::VotingEfficiency).map(|b| read_voting(b, &mut report)),
        decentralisation: blocks.get(BlockKind::Decentralisation).map(|b| read_decentralisation(b, &mut report)),
        health_metrics: blocks.get(BlockKind::HealthMetrics).cloned(),
    };

    Ok(ParsedSnapshot { snapshot, blocks, report })
}

/// Finds a block under its canonical key or its legacy alias; returns the
/// field path it was found at and the raw value.
fn locate_block<'a>(
    container: &'a Map<String, Value>,
    kind: BlockKind,
    prefix: &str,
    report: &mut ValidationReport,
) -> Option<(String, &'a Value)> {
    let canonical = container.get(kind.as_str());
    let legacy = kind.legacy_alias().and_then(|alias| container.get(alias).map(|v| (alias, v)));
    match (canonical, legacy) {
        (Some(v), Some((alias, _))) => {
            report.warn(
                IssueKind::LegacyKey,
                format!("{prefix}{alias}"),
                format!("both `{alias}` and `{kind}` present; `{alias}` ignored"),
            );
            Some((format!("{prefix}{kind}"), v))
        }
        (Some(v), None) => Some((format!("{prefix}{kind}"), v)),
        (None, Some((alias, v))) => {
            report.warn(
                IssueKind::LegacyKey,
                format!("{prefix}{alias}"),
                format!("legacy key `{alias}` renamed to `{kind}`"),
            );
            Some((format!("{prefix}{alias}"), v))
        }
        (None, None) => None,
    }
}

fn normalise_automation_field(block: &mut Map<String, Value>, path: &str, report: &mut ValidationReport) {
    let Some(raw) = block.get("on_chain_automation") else {
        return;
    };
    let field = format!("{path}.on_chain_automation");
    let canonical = normalize_automation(Some(raw)).to_json();
    match canonical {
        Some(c) if &c != raw => {
            report.warn(IssueKind::Normalised, field, format!("{raw} normalised to {c}"));
            block.insert("on_chain_automation".into(), c);
        }
        Some(_) => {}
        None if raw.is_null() => {}
        None => report.warn(
            IssueKind::TypeMismatch,
            field,
            format!("unrecognised automation flag {raw}; treated as unknown"),
        ),
    }
}

struct FieldReader<'a> {
    block: &'a Map<String, Value>,
    kind: BlockKind,
}

impl FieldReader<'_> {
    /// A non-negative number, or `None` with a warning for anything else.
    fn number(&self, key: &str, report: &mut ValidationReport) -> Option<f64> {
        let path = format!("{}.{key}", self.kind);
        match self.block.get(key) {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => match n.as_f64() {
                Some(v) if v < 0.0 => {
                    report.warn(IssueKind::NegativeValue, path, format!("negative value {v} treated as absent"));
                    None
                }
                Some(v) => Some(v),
                None => None,
            },
            Some(other) => {
                report.warn(IssueKind::TypeMismatch, path, format!("expected number, found {}", json_type(other)));
                None
            }
        }
    }
}

fn read_participation(block: &Map<String, Value>, report: &mut ValidationReport) -> NetworkParticipation {
    let r = FieldReader { block, kind: BlockKind::NetworkParticipation };
    NetworkParticipation {
        num_distinct_voters: r.number("num_distinct_voters", report),
        total_members: r.number("total_members", report),
        participation_rate: r.number("participation_rate", report),
        unique_proposers: r.number("unique_proposers", report),
    }
}

fn read_funds(block: &Map<String, Value>, report: &mut ValidationReport) -> AccumulatedFunds {
    let r = FieldReader { block, kind: BlockKind::AccumulatedFunds };
    AccumulatedFunds {
        treasury_value_usd: r.number("treasury_value_usd", report),
        circulating_supply: r.number("circulating_supply", report),
        total_supply: r.number("total_supply", report),
        circulating_token_percentage: r.number("circulating_token_percentage", report),
        token_price_usd: r.number("token_price_usd", report),
    }
}

fn read_voting(block: &Map<String, Value>, report: &mut ValidationReport) -> VotingEfficiency {
    let r = FieldReader { block, kind: BlockKind::VotingEfficiency };
    let v = VotingEfficiency {
        total_proposals: r.number("total_proposals", report),
        approved_proposals: r.number("approved_proposals", report),
        approval_rate: r.number("approval_rate", report),
        avg_voting_duration_days: r.number("avg_voting_duration_days", report),
    };
    if let (Some(approved), Some(total)) = (v.approved_proposals, v.total_proposals) {
        if approved > total {
            report.warn(
                IssueKind::Inconsistent,
                "voting_efficiency.approved_proposals",
                format!("approved_proposals ({approved}) exceeds total_proposals ({total})"),
            );
        }
    }
    v
}

fn read_decentralisation(block: &Map<String, Value>, report: &mut ValidationReport) -> Decentralisation {
    let r = FieldReader { block, kind: BlockKind::Decentralisation };
    let largest_holder_percent = r.number("largest_holder_percent", report).and_then(|h| {
        if h > 100.0 {
            report.warn(
                IssueKind::OutOfRange,
                "decentralisation.largest_holder_percent",
                format!("{h} is outside [0, 100]; treated as absent"),
            );
            None
        } else {
            Some(h)
        }
    });
    Decentralisation {
        largest_holder_percent,
        on_chain_automation: normalize_automation(block.get("on_chain_automation")),
        proposer_concentration: r.number("proposer_concentration", report),
        token_distribution: block.get("token_distribution").filter(|v| !v.is_null()).cloned(),
    }
}

fn positive_integer(v: &Value) -> Option<u64> {
    if let Some(n) = v.as_u64() {
        return (n > 0).then_some(n);
    }
    let f = v.as_f64()?;
    (f > 0.0 && f.fract() == 0.0 && f < u64::MAX as f64).then_some(f as u64)
}

fn is_iso8601(ts: &str) -> bool {
    chrono::DateTime::parse_from_rfc3339(ts).is_ok()
        || chrono::NaiveDateTime::parse_from_str(ts, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        || chrono::NaiveDate::parse_from_str(ts, "%Y-%m-%d").is_ok()
}

fn json_type(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}
