//! Intermediate indicators that every KPI score is computed from.

use serde::{Serialize, Serializer};

use crate::snapshot::{AccumulatedFunds, DaoSnapshot, NetworkParticipation, VotingEfficiency};

/// Distinct voters as a percentage of members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Turnout {
    Valid(f64),
    /// A denominator or numerator was missing or zero, or the ratio exceeded 100%.
    Invalid,
}

impl Turnout {
    pub fn value(self) -> Option<f64> {
        match self {
            Turnout::Valid(v) => Some(v),
            Turnout::Invalid => None,
        }
    }
}

impl Serialize for Turnout {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Turnout::Valid(v) => serializer.serialize_f64(*v),
            Turnout::Invalid => serializer.serialize_str("invalid"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedIndicators {
    pub turnout_pct: Turnout,
    pub approval_pct: Option<f64>,
    pub circulating_share_pct: Option<f64>,
    pub relative_treasury_pct: f64,
}

impl DerivedIndicators {
    pub fn from_snapshot(s: &DaoSnapshot) -> Self {
        let funds = s.accumulated_funds.clone().unwrap_or_default();
        Self {
            turnout_pct: s.network_participation.as_ref().map_or(Turnout::Invalid, compute_turnout),
            approval_pct: s.voting_efficiency.as_ref().and_then(normalize_approval),
            circulating_share_pct: compute_circulating_share(&funds),
            relative_treasury_pct: compute_relative_treasury(&funds),
        }
    }
}

/// `100 * voters / members`; the upstream `participation_rate` is ignored.
pub fn compute_turnout(p: &NetworkParticipation) -> Turnout {
    let voters = p.num_distinct_voters.unwrap_or(0.0);
    let members = p.total_members.unwrap_or(0.0);
    if voters <= 0.0 || members <= 0.0 {
        return Turnout::Invalid;
    }
    let rate = voters / members * 100.0;
    if rate > 100.0 {
        Turnout::Invalid
    } else {
        Turnout::Valid(rate)
    }
}

/// Rates above 1 are already percentages; rates in `[0, 1]` are fractions.
pub fn normalize_approval(v: &VotingEfficiency) -> Option<f64> {
    v.approval_rate.map(|rate| if rate > 1.0 { rate } else { rate * 100.0 })
}

pub fn compute_circulating_share(f: &AccumulatedFunds) -> Option<f64> {
    match (f.circulating_supply, f.total_supply) {
        (Some(circ), Some(total)) if circ > 0.0 && total > 0.0 => Some(circ / total * 100.0),
        _ => f.circulating_token_percentage,
    }
}

/// Treasury as a percentage of circulating market cap, or 0 without a price.
pub fn compute_relative_treasury(f: &AccumulatedFunds) -> f64 {
    let treasury = f.treasury_value_usd.unwrap_or(0.0);
    match (f.circulating_supply, f.token_price_usd) {
        (Some(circ), Some(price)) if circ > 0.0 && price > 0.0 => treasury / (circ * price) * 100.0,
        _ => 0.0,
    }
}
