//! The fixed threshold policy behind the KPI scores.
//!
//! Thresholds live here as constants so that the engine and the published
//! methodology document are generated from one definition.

use serde_json::{json, Value};

pub const POLICY_VERSION: &str = "table2-v1";

pub mod participation {
    /// Turnout strictly above this scores 3.
    pub const HIGH_ABOVE_PCT: f64 = 40.0;
    /// Turnout at or above this (and not high) scores 2.
    pub const MEDIUM_FROM_PCT: f64 = 10.0;
    /// Turnout above this is anomalous.
    pub const ANOMALY_ABOVE_PCT: f64 = 100.0;
}

pub mod funds {
    pub const TOP_TREASURY_USD: f64 = 1e9;
    pub const LARGE_TREASURY_USD: f64 = 1e8;
    /// Circulating share strictly above this lifts a large treasury to 2.25.
    pub const LARGE_CIRCULATING_ABOVE_PCT: f64 = 50.0;
    /// Circulating share assumed when neither supply figures nor the reported
    /// percentage are available.
    pub const CIRCULATING_FALLBACK_PCT: f64 = 100.0;
    pub const MID_TREASURY_USD: f64 = 1e7;
    pub const MID_RELATIVE_FROM_PCT: f64 = 10.0;
    pub const SMALL_TREASURY_USD: f64 = 1e6;
    pub const SMALL_RELATIVE_FROM_PCT: f64 = 5.0;
}

pub mod voting {
    pub const MIN_PROPOSALS: f64 = 3.0;
    pub const HIGH_APPROVAL_ABOVE_PCT: f64 = 70.0;
    pub const MEDIUM_APPROVAL_FROM_PCT: f64 = 30.0;
    pub const MIN_DURATION_DAYS: f64 = 3.0;
    pub const MAX_DURATION_DAYS: f64 = 14.0;
}

pub mod decentralisation {
    /// Largest holder strictly below this scores 3.
    pub const DISPERSED_BELOW_PCT: f64 = 10.0;
    /// Upper bound (inclusive) of the 2.4 / 1.8 band.
    pub const MODERATE_UP_TO_PCT: f64 = 33.0;
    /// Upper bound (inclusive) of the 1.2 band.
    pub const CONCENTRATED_UP_TO_PCT: f64 = 66.0;
}

pub mod bands {
    /// Composite at or above this (in hundredths) is Medium.
    pub const MEDIUM_FROM: u16 = 600;
    /// Composite at or above this (in hundredths) is High.
    pub const HIGH_FROM: u16 = 900;
}

/// Machine- and human-readable description of the policy, used to render
/// the methodology panel and checked in alongside the engine.
pub fn policy_document() -> Value {
    use decentralisation as dec;
    use participation as part;
    json!({
        "policy_version": POLICY_VERSION,
        "composite": {
            "rule": "sum of the four KPI scores",
            "range": [3.35, 12],
            "bands": [
                {"band": "Low", "rule": format!("C < {}", bands::MEDIUM_FROM as f64 / 100.0)},
                {"band": "Medium", "rule": format!("{} <= C < {}", bands::MEDIUM_FROM as f64 / 100.0, bands::HIGH_FROM as f64 / 100.0)},
                {"band": "High", "rule": format!("C >= {}", bands::HIGH_FROM as f64 / 100.0)},
            ],
        },
        "kpis": [
            {
                "kpi": "network_participation",
                "indicator": "turnout = 100 * num_distinct_voters / total_members",
                "rows": [
                    {"points": 3, "rule": format!("turnout > {}%", part::HIGH_ABOVE_PCT)},
                    {"points": 2, "rule": format!("{}% <= turnout <= {}%", part::MEDIUM_FROM_PCT, part::HIGH_ABOVE_PCT)},
                    {"points": 1, "rule": format!(
                        "turnout < {}%, or invalid (zero/missing voters or members, turnout > {}%)",
                        part::MEDIUM_FROM_PCT, part::ANOMALY_ABOVE_PCT
                    )},
                ],
            },
            {
                "kpi": "accumulated_funds",
                "indicator": "t = treasury_value_usd; circ_pct = 100 * circulating_supply / total_supply, else circulating_token_percentage, else 100; rel_treasury = 100 * t / (circulating_supply * token_price_usd), else 0",
                "evaluation": "first matching row wins",
                "rows": [
                    {"points": 3, "rule": format!("t >= {:e}", funds::TOP_TREASURY_USD)},
                    {"points": 2.25, "rule": format!("t >= {:e} and circ_pct > {}%", funds::LARGE_TREASURY_USD, funds::LARGE_CIRCULATING_ABOVE_PCT)},
                    {"points": 1.5, "rule": format!("t >= {:e} and circ_pct <= {}%", funds::LARGE_TREASURY_USD, funds::LARGE_CIRCULATING_ABOVE_PCT)},
                    {"points": 1.5, "rule": format!("t >= {:e} and rel_treasury >= {}%", funds::MID_TREASURY_USD, funds::MID_RELATIVE_FROM_PCT)},
                    {"points": 1.25, "rule": format!("t >= {:e} and rel_treasury >= {}%", funds::SMALL_TREASURY_USD, funds::SMALL_RELATIVE_FROM_PCT)},
                    {"points": 0.75, "rule": "otherwise"},
                ],
            },
            {
                "kpi": "voting_efficiency",
                "indicator": "approval = approval_rate if > 1 else 100 * approval_rate; window = avg_voting_duration_days in [3, 14]",
                "rows": [
                    {"points": 3, "rule": format!("approval > {}% and window", voting::HIGH_APPROVAL_ABOVE_PCT)},
                    {"points": 2, "rule": format!("{}% <= approval <= {}% and window", voting::MEDIUM_APPROVAL_FROM_PCT, voting::HIGH_APPROVAL_ABOVE_PCT)},
                    {"points": 1, "rule": format!(
                        "approval < {}%, approval missing, duration outside [{}, {}] days, or total_proposals < {}",
                        voting::MEDIUM_APPROVAL_FROM_PCT, voting::MIN_DURATION_DAYS, voting::MAX_DURATION_DAYS, voting::MIN_PROPOSALS
                    )},
                ],
            },
            {
                "kpi": "decentralisation",
                "indicator": "h = largest_holder_percent",
                "rows": [
                    {"points": 3, "rule": format!("h < {}%", dec::DISPERSED_BELOW_PCT)},
                    {"points": 2.4, "rule": format!(
                        "{}% <= h <= {}% and participation score >= 2 and on_chain_automation = Yes",
                        dec::DISPERSED_BELOW_PCT, dec::MODERATE_UP_TO_PCT
                    )},
                    {"points": 1.8, "rule": format!("{}% <= h <= {}%, otherwise", dec::DISPERSED_BELOW_PCT, dec::MODERATE_UP_TO_PCT)},
                    {"points": 1.2, "rule": format!("{}% < h <= {}%", dec::MODERATE_UP_TO_PCT, dec::CONCENTRATED_UP_TO_PCT)},
                    {"points": 0.6, "rule": format!("h > {}% or h missing", dec::CONCENTRATED_UP_TO_PCT)},
                ],
            },
        ],
    })
}
