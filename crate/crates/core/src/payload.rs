//! The JSON shape served for one DAO by the v1 API.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::snapshot::{parse_snapshot_value, BlockKind, ParsedSnapshot, SnapshotError};

/// Catalog-assigned DAO identifier, stable once assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DaoId(pub u64);

/// Monotonically increasing import run identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RunId(pub u64);

impl fmt::Display for DaoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for RunId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Identity fields plus all five blocks; absent blocks are `{}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiPayload {
    pub dao_id: DaoId,
    pub dao_name: String,
    pub chain_id: u64,
    pub timestamp: Option<String>,
    #[serde(default)]
    pub network_participation: Map<String, Value>,
    #[serde(default)]
    pub accumulated_funds: Map<String, Value>,
    #[serde(default)]
    pub voting_efficiency: Map<String, Value>,
    #[serde(default)]
    pub decentralisation: Map<String, Value>,
    #[serde(default)]
    pub health_metrics: Map<String, Value>,
}

impl ApiPayload {
    pub fn block(&self, kind: BlockKind) -> &Map<String, Value> {
        match kind {
            BlockKind::NetworkParticipation => &self.network_participation,
            BlockKind::AccumulatedFunds => &self.accumulated_funds,
            BlockKind::VotingEfficiency => &self.voting_efficiency,
            BlockKind::Decentralisation => &self.decentralisation,
            BlockKind::HealthMetrics => &self.health_metrics,
        }
    }

    pub fn block_mut(&mut self, kind: BlockKind) -> &mut Map<String, Value> {
        match kind {
            BlockKind::NetworkParticipation => &mut self.network_participation,
            BlockKind::AccumulatedFunds => &mut self.accumulated_funds,
            BlockKind::VotingEfficiency => &mut self.voting_efficiency,
            BlockKind::Decentralisation => &mut self.decentralisation,
            BlockKind::HealthMetrics => &mut self.health_metrics,
        }
    }

    /// Reads the payload back as a snapshot document, the way a client
    /// scoring from the API would.
    pub fn to_parsed(&self) -> Result<ParsedSnapshot, SnapshotError> {
        let value = serde_json::to_value(self).expect("payload serialises");
        parse_snapshot_value(&value)
    }
}
