//! Declarative transcription of the client scoring thresholds, written
//! against raw snapshot JSON without touching the engine's code paths.
//!
//! Each KPI is a list of `(points, predicate)` rows copied from the threshold
//! table. Overlapping rows are resolved the way the table reads: funds takes
//! the best applicable row (the later rows are fallbacks), voting takes the
//! worst (the sparse-proposal guard overrides), and the remaining KPIs must
//! match exactly one row.

#![allow(dead_code)]

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCard {
    pub participation: f64,
    pub funds: f64,
    pub voting: f64,
    pub decentralisation: f64,
    /// Composite in hundredths of a point.
    pub composite_hundredths: i64,
    pub band: &'static str,
}

struct Raw<'a>(&'a Value);

impl Raw<'_> {
    fn num(&self, block: &str, key: &str) -> Option<f64> {
        self.0.get(block)?.get(key)?.as_f64().filter(|v| *v >= 0.0)
    }

    fn automation_yes(&self) -> bool {
        match self.0.get("decentralisation").and_then(|b| b.get("on_chain_automation")) {
            Some(Value::Bool(b)) => *b,
            Some(Value::String(s)) => s.trim().eq_ignore_ascii_case("yes"),
            _ => false,
        }
    }
}

/// Indicator values as the client derives them.
struct Ind {
    turnout: Option<f64>,
    t: f64,
    circ_pct: f64,
    rel: f64,
    approval: Option<f64>,
    duration: Option<f64>,
    proposals: f64,
    holder: Option<f64>,
}

fn derive(raw: &Raw<'_>) -> Ind {
    let m = raw.num("network_participation", "total_members").unwrap_or(0.0);
    let v = raw.num("network_participation", "num_distinct_voters").unwrap_or(0.0);
    let turnout = if m == 0.0 || v == 0.0 {
        None
    } else {
        let rate = (v / m) * 100.0;
        if rate > 100.0 {
            None
        } else {
            Some(rate)
        }
    };

    let t = raw.num("accumulated_funds", "treasury_value_usd").unwrap_or(0.0);
    let circ = raw.num("accumulated_funds", "circulating_supply").unwrap_or(0.0);
    let total = raw.num("accumulated_funds", "total_supply").unwrap_or(0.0);
    let price = raw.num("accumulated_funds", "token_price_usd").unwrap_or(0.0);
    let circ_pct = if total > 0.0 && circ > 0.0 {
        (circ / total) * 100.0
    } else {
        raw.num("accumulated_funds", "circulating_token_percentage").unwrap_or(100.0)
    };
    let rel = if circ > 0.0 && price > 0.0 { (t / (circ * price)) * 100.0 } else { 0.0 };

    let approval = raw.num("voting_efficiency", "approval_rate").map(|a| if a > 1.0 { a } else { a * 100.0 });
    Ind {
        turnout,
        t,
        circ_pct,
        rel,
        approval,
        duration: raw.num("voting_efficiency", "avg_voting_duration_days"),
        proposals: raw.num("voting_efficiency", "total_proposals").unwrap_or(0.0),
        holder: raw.num("decentralisation", "largest_holder_percent").filter(|h| *h <= 100.0),
    }
}

type Rule = fn(&Ind) -> bool;

const PARTICIPATION: &[(f64, Rule)] = &[
    (3.0, |i| i.turnout.is_some_and(|t| t > 40.0)),
    (2.0, |i| i.turnout.is_some_and(|t| (10.0..=40.0).contains(&t))),
    (1.0, |i| i.turnout.is_none_or(|t| t < 10.0)),
];

const FUNDS: &[(f64, Rule)] = &[
    (3.0, |i| i.t >= 1e9),
    (2.25, |i| i.t >= 1e8 && i.t < 1e9 && i.circ_pct > 50.0),
    (1.5, |i| i.t >= 1e8 && i.t < 1e9 && i.circ_pct <= 50.0),
    (1.5, |i| i.t >= 1e7 && i.t < 1e9 && i.rel >= 10.0),
    (1.25, |i| i.t >= 1e6 && i.t < 1e9 && i.rel >= 5.0),
    (0.75, |_| true),
];

fn in_window(i: &Ind) -> bool {
    i.duration.is_some_and(|d| (3.0..=14.0).contains(&d))
}

const VOTING: &[(f64, Rule)] = &[
    (3.0, |i| i.approval.is_some_and(|a| a > 70.0) && in_window(i)),
    (2.0, |i| i.approval.is_some_and(|a| (30.0..=70.0).contains(&a)) && in_window(i)),
    (1.0, |i| i.approval.is_some_and(|a| a < 30.0) || !in_window(i) || i.proposals < 3.0),
];

fn decentralisation(i: &Ind, participation: f64, automation_yes: bool) -> f64 {
    let medium_or_high = participation >= 2.0;
    let rows: [(f64, bool); 5] = match i.holder {
        None => return 0.6,
        Some(h) => [
            (3.0, h < 10.0),
            (2.4, (10.0..=33.0).contains(&h) && medium_or_high && automation_yes),
            (1.8, (10.0..=33.0).contains(&h) && !(medium_or_high && automation_yes)),
            (1.2, h > 33.0 && h <= 66.0),
            (0.6, h > 66.0),
        ],
    };
    exactly_one(rows.iter().filter(|(_, hit)| *hit).map(|(p, _)| *p))
}

fn exactly_one(mut hits: impl Iterator<Item = f64>) -> f64 {
    let first = hits.next().expect("some row applies");
    assert!(hits.next().is_none(), "rows overlap");
    first
}

pub fn oracle_score(doc: &Value) -> OracleCard {
    let raw = Raw(doc);
    let i = derive(&raw);
    let hits = |rows: &[(f64, Rule)]| rows.iter().filter(|(_, r)| r(&i)).map(|(p, _)| *p).collect::<Vec<_>>();

    let participation = exactly_one(hits(PARTICIPATION).into_iter());
    let funds = hits(FUNDS).into_iter().fold(f64::MIN, f64::max);
    let voting_hits = hits(VOTING);
    let voting = if voting_hits.is_empty() { 1.0 } else { voting_hits.into_iter().fold(f64::MAX, f64::min) };
    let decent = decentralisation(&i, participation, raw.automation_yes());

    let hundredths = |p: f64| (p * 100.0).round() as i64;
    let composite_hundredths = hundredths(participation) + hundredths(funds) + hundredths(voting) + hundredths(decent);
    let c = composite_hundredths as f64 / 100.0;
    let band = if c < 6.0 {
        "Low"
    } else if c < 9.0 {
        "Medium"
    } else {
        "High"
    };
    OracleCard { participation, funds, voting, decentralisation: decent, composite_hundredths, band }
}

/// The indicator grid: every combination of the listed bin representatives.
pub mod grid {
    use serde_json::{json, Map, Value};

    /// `None` encodes an anomalous (> 100 %) turnout.
    pub const TURNOUT: &[Option<u32>] = &[None, Some(0), Some(5), Some(10), Some(25), Some(40), Some(41), Some(100)];
    pub const TREASURY: &[f64] = &[0.0, 5e6, 5e7, 1.5e8, 2e9];
    pub const CIRC_SHARE: &[Option<f64>] = &[None, Some(40.0), Some(60.0)];
    pub const REL: &[f64] = &[0.0, 5.0, 12.0];
    pub const APPROVAL: &[Option<f64>] = &[None, Some(10.0), Some(30.0), Some(50.0), Some(70.0), Some(80.0)];
    pub const DURATION: &[f64] = &[1.0, 3.0, 7.0, 14.0, 20.0];
    pub const PROPOSALS: &[u32] = &[0, 2, 3, 50];
    pub const HOLDER: &[Option<f64>] =
        &[None, Some(5.0), Some(10.0), Some(20.0), Some(33.0), Some(50.0), Some(66.0), Some(80.0)];
    pub const FLAG: &[Option<&str>] = &[Some("Yes"), Some("No"), None];

    pub fn len() -> usize {
        TURNOUT.len()
            * TREASURY.len()
            * CIRC_SHARE.len()
            * REL.len()
            * APPROVAL.len()
            * DURATION.len()
            * PROPOSALS.len()
            * HOLDER.len()
            * FLAG.len()
    }

    /// Visits every grid point as a snapshot document.
    pub fn for_each(mut f: impl FnMut(&Value)) {
        const CIRCULATING: f64 = 1e6;
        for turnout in TURNOUT {
            let participation = match turnout {
                None => json!({"num_distinct_voters": 150, "total_members": 100}),
                Some(v) => json!({"num_distinct_voters": v, "total_members": 100}),
            };
            for &t in TREASURY {
                for circ_share in CIRC_SHARE {
                    for &rel in REL {
                        let mut funds = Map::new();
                        funds.insert("treasury_value_usd".into(), t.into());
                        funds.insert("circulating_supply".into(), CIRCULATING.into());
                        if let Some(c) = circ_share {
                            funds.insert("circulating_token_percentage".into(), (*c).into());
                        }
                        if t > 0.0 && rel > 0.0 {
                            funds.insert("token_price_usd".into(), (t / (CIRCULATING / 100.0 * rel)).into());
                        }
                        let funds = Value::Object(funds);
                        for approval in APPROVAL {
                            for &duration in DURATION {
                                for &proposals in PROPOSALS {
                                    let mut voting = Map::new();
                                    voting.insert("total_proposals".into(), proposals.into());
                                    if let Some(a) = approval {
                                        voting.insert("approval_rate".into(), (*a).into());
                                    }
                                    voting.insert("avg_voting_duration_days".into(), duration.into());
                                    let voting = Value::Object(voting);
                                    for holder in HOLDER {
                                        for flag in FLAG {
                                            let mut dec = Map::new();
                                            if let Some(h) = holder {
                                                dec.insert("largest_holder_percent".into(), (*h).into());
                                            }
                                            if let Some(fl) = flag {
                                                dec.insert("on_chain_automation".into(), (*fl).into());
                                            }
                                            let doc = json!({
                                                "dao_name": "Grid",
                                                "chain_id": 1,
                                                "network_participation": participation,
                                                "accumulated_funds": funds,
                                                "voting_efficiency": voting,
                                                "decentralisation": Value::Object(dec),
                                            });
                                            f(&doc);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
