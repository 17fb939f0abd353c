//! KPI scoring engine: four component scores, their composite and the band.
//!
//! Scores are held as integer hundredths ([`Points`]) so the composite is an
//! exact sum; `1 + 3 + 2 + 1.2` is exactly `7.2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::indicators::{DerivedIndicators, Turnout};
use crate::policy::{self, bands, decentralisation as dec, funds, participation as part, voting};
use crate::snapshot::{AccumulatedFunds, AutomationFlag, DaoSnapshot, Decentralisation, VotingEfficiency};

/// A score in hundredths of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Points(u16);

impl Points {
    pub const fn from_hundredths(h: u16) -> Self {
        Points(h)
    }

    pub const fn hundredths(self) -> u16 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }

    /// Exact conversion from a decimal value with at most two fractional digits.
    pub fn from_f64(v: f64) -> Option<Self> {
        let scaled = (v * 100.0).round();
        if !(0.0..=f64::from(u16::MAX)).contains(&scaled) || (scaled / 100.0 - v).abs() > 1e-9 {
            return None;
        }
        Some(Points(scaled as u16))
    }
}

impl std::ops::Add for Points {
    type Output = Points;

    fn add(self, rhs: Points) -> Points {
        Points(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Points {
    fn sum<I: Iterator<Item = Points>>(iter: I) -> Points {
        iter.fold(Points(0), |a, b| a + b)
    }
}

impl fmt::Display for Points {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (whole, frac) = (self.0 / 100, self.0 % 100);
        match frac {
            0 => write!(f, "{whole}"),
            f2 if f2 % 10 == 0 => write!(f, "{whole}.{}", f2 / 10),
            f2 => write!(f, "{whole}.{f2:02}"),
        }
    }
}

impl Serialize for Points {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_multiple_of(100) {
            serializer.serialize_u64(u64::from(self.0 / 100))
        } else {
            serializer.serialize_f64(self.as_f64())
        }
    }
}

impl<'de> Deserialize<'de> for Points {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        Points::from_f64(v).ok_or_else(|| serde::de::Error::custom(format!("{v} is not a score")))
    }
}

pub const ONE: Points = Points(100);
pub const TWO: Points = Points(200);
pub const THREE: Points = Points(300);

pub mod funds_points {
    use super::Points;
    pub const TOP: Points = Points(300);
    pub const LARGE_CIRCULATING: Points = Points(225);
    pub const LARGE: Points = Points(150);
    pub const MID: Points = Points(150);
    pub const SMALL: Points = Points(125);
    pub const BASELINE: Points = Points(75);
}

pub mod decentralisation_points {
    use super::Points;
    pub const DISPERSED: Points = Points(300);
    pub const MODERATE_AUTOMATED: Points = Points(240);
    pub const MODERATE: Points = Points(180);
    pub const CONCENTRATED: Points = Points(120);
    pub const DOMINATED: Points = Points(60);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    Low,
    Medium,
    High,
}

impl Band {
    pub fn as_str(self) -> &'static str {
        match self {
            Band::Low => "Low",
            Band::Medium => "Medium",
            Band::High => "High",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Low" => Ok(Band::Low),
            "Medium" => Ok(Band::Medium),
            "High" => Ok(Band::High),
            other => Err(format!("unknown band `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("composite {0} is outside [0, 12]")]
pub struct CompositeOutOfRange(pub Points);

/// Low below 6, Medium in `[6, 9)`, High from 9.
pub fn band_of(composite: Points) -> Result<Band, CompositeOutOfRange> {
    match composite.hundredths() {
        c if c > 1200 => Err(CompositeOutOfRange(composite)),
        c if c >= bands::HIGH_FROM => Ok(Band::High),
        c if c >= bands::MEDIUM_FROM => Ok(Band::Medium),
        _ => Ok(Band::Low),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub s_participation: Points,
    pub s_funds: Points,
    pub s_voting: Points,
    pub s_decentralisation: Points,
    pub composite: Points,
    pub band: Band,
    pub policy_version: String,
}

impl ScoreCard {
    pub fn from_components(
        s_participation: Points,
        s_funds: Points,
        s_voting: Points,
        s_decentralisation: Points,
    ) -> Self {
        let composite = s_participation + s_funds + s_voting + s_decentralisation;
        let band = band_of(composite).expect("component scores are capped at 3");
        Self {
            s_participation,
            s_funds,
            s_voting,
            s_decentralisation,
            composite,
            band,
            policy_version: policy::POLICY_VERSION.to_string(),
        }
    }
}

pub fn score_participation(d: &DerivedIndicators) -> Points {
    match d.turnout_pct {
        Turnout::Valid(t) if t > part::ANOMALY_ABOVE_PCT => ONE,
        Turnout::Valid(t) if t > part::HIGH_ABOVE_PCT => THREE,
        Turnout::Valid(t) if t >= part::MEDIUM_FROM_PCT => TWO,
        _ => ONE,
    }
}

pub fn score_funds(f: &AccumulatedFunds, d: &DerivedIndicators) -> Points {
    use funds_points as fp;
    let t = f.treasury_value_usd.unwrap_or(0.0);
    let circ_pct = d.circulating_share_pct.unwrap_or(funds::CIRCULATING_FALLBACK_PCT);
    let rel = d.relative_treasury_pct;
    if t >= funds::TOP_TREASURY_USD {
        fp::TOP
    } else if t >= funds::LARGE_TREASURY_USD {
        if circ_pct > funds::LARGE_CIRCULATING_ABOVE_PCT {
            fp::LARGE_CIRCULATING
        } else {
            fp::LARGE
        }
    } else if t >= funds::MID_TREASURY_USD && rel >= funds::MID_RELATIVE_FROM_PCT {
        fp::MID
    } else if t >= funds::SMALL_TREASURY_USD && rel >= funds::SMALL_RELATIVE_FROM_PCT {
        fp::SMALL
    } else {
        fp::BASELINE
    }
}

pub fn score_voting(v: &VotingEfficiency, d: &DerivedIndicators) -> Points {
    if v.total_proposals.is_none_or(|n| n < voting::MIN_PROPOSALS) {
        return ONE;
    }
    let in_window = v
        .avg_voting_duration_days
        .is_some_and(|dur| (voting::MIN_DURATION_DAYS..=voting::MAX_DURATION_DAYS).contains(&dur));
    match d.approval_pct {
        Some(a) if in_window && a > voting::HIGH_APPROVAL_ABOVE_PCT => THREE,
        Some(a) if in_window && a >= voting::MEDIUM_APPROVAL_FROM_PCT => TWO,
        _ => ONE,
    }
}

/// `s_participation` must already be computed: the 2.4 tier needs medium or
/// high participation (score ≥ 2) plus on-chain automation.
pub fn score_decentralisation(d: &Decentralisation, s_participation: Points, flag: AutomationFlag) -> Points {
    use decentralisation_points as dp;
    match d.largest_holder_percent {
        Some(h) if h < dec::DISPERSED_BELOW_PCT => dp::DISPERSED,
        Some(h) if h <= dec::MODERATE_UP_TO_PCT => {
            if s_participation >= TWO && flag == AutomationFlag::Yes {
                dp::MODERATE_AUTOMATED
            } else {
                dp::MODERATE
            }
        }
        Some(h) if h <= dec::CONCENTRATED_UP_TO_PCT => dp::CONCENTRATED,
        _ => dp::DOMINATED,
    }
}

pub fn score_dao(s: &DaoSnapshot) -> ScoreCard {
    let d = DerivedIndicators::from_snapshot(s);
    let s_participation = score_participation(&d);
    let s_funds = score_funds(&s.accumulated_funds.clone().unwrap_or_default(), &d);
    let s_voting = score_voting(&s.voting_efficiency.clone().unwrap_or_default(), &d);
    let dec_block = s.decentralisation.clone().unwrap_or_default();
    let s_decentralisation = score_decentralisation(&dec_block, s_participation, dec_block.on_chain_automation);
    ScoreCard::from_components(s_participation, s_funds, s_voting, s_decentralisation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snapshot::parse_snapshot;

    fn with_turnout(t: f64) -> DerivedIndicators {
        DerivedIndicators {
            turnout_pct: Turnout::Valid(t),
            approval_pct: None,
            circulating_share_pct: None,
            relative_treasury_pct: 0.0,
        }
    }

    fn p(h: u16) -> Points {
        Points::from_hundredths(h)
    }

    #[test]
    fn points_display_and_serde() {
        assert_eq!(p(120).to_string(), "1.2");
        assert_eq!(p(225).to_string(), "2.25");
        assert_eq!(p(300).to_string(), "3");
        assert_eq!(p(335).to_string(), "3.35");
        assert_eq!(p(60).to_string(), "0.6");
        assert_eq!(serde_json::to_string(&p(720)).unwrap(), "7.2");
        assert_eq!(serde_json::to_string(&p(300)).unwrap(), "3");
        assert_eq!(serde_json::from_str::<Points>("7.2").unwrap(), p(720));
        assert!(serde_json::from_str::<Points>("7.215").is_err());
    }

    #[test]
    fn participation_bins() {
        assert_eq!(score_participation(&with_turnout(5.4732)), ONE);
        assert_eq!(score_participation(&with_turnout(25.0)), TWO);
        assert_eq!(score_participation(&with_turnout(10.0)), TWO);
        assert_eq!(score_participation(&with_turnout(9.999999)), ONE);
        assert_eq!(score_participation(&with_turnout(40.0)), TWO);
        assert_eq!(score_participation(&with_turnout(40.0000001)), THREE);
        let invalid = DerivedIndicators { turnout_pct: Turnout::Invalid, ..with_turnout(0.0) };
        assert_eq!(score_participation(&invalid), ONE);
    }

    #[test]
    fn funds_bins() {
        let d = |circ: Option<f64>, rel: f64| DerivedIndicators {
            circulating_share_pct: circ,
            relative_treasury_pct: rel,
            ..with_turnout(0.0)
        };
        let t = |v: f64| AccumulatedFunds { treasury_value_usd: Some(v), ..Default::default() };
        assert_eq!(score_funds(&t(2.087864e9), &d(Some(62.8494), 0.0)), p(300));
        assert_eq!(score_funds(&t(1.5e8), &d(Some(60.0), 0.0)), p(225));
        assert_eq!(score_funds(&t(1.5e8), &d(Some(50.0), 0.0)), p(150));
        // missing circulating share counts as 100 %
        assert_eq!(score_funds(&t(1.5e8), &d(None, 0.0)), p(225));
        assert_eq!(score_funds(&t(5e7), &d(None, 12.0)), p(150));
        assert_eq!(score_funds(&t(5e6), &d(None, 8.0)), p(125));
        assert_eq!(score_funds(&t(5e6), &d(None, 4.99)), p(75));
        assert_eq!(score_funds(&t(0.0), &d(None, 0.0)), p(75));
        assert_eq!(score_funds(&AccumulatedFunds::default(), &d(None, 0.0)), p(75));
    }

    #[test]
    fn voting_bins() {
        let v = |n: f64, dur: f64| VotingEfficiency {
            total_proposals: Some(n),
            avg_voting_duration_days: Some(dur),
            ..Default::default()
        };
        let a = |x: f64| DerivedIndicators { approval_pct: Some(x), ..with_turnout(0.0) };
        assert_eq!(score_voting(&v(83.0, 6.07), &a(68.67)), TWO);
        assert_eq!(score_voting(&v(10.0, 7.0), &a(80.0)), THREE);
        assert_eq!(score_voting(&v(10.0, 20.0), &a(90.0)), ONE);
        assert_eq!(score_voting(&v(2.0, 7.0), &a(90.0)), ONE);
        assert_eq!(score_voting(&v(10.0, 3.0), &a(70.0)), TWO);
        assert_eq!(score_voting(&v(10.0, 14.0), &a(30.0)), TWO);
        assert_eq!(score_voting(&v(10.0, 7.0), &a(29.9)), ONE);
        assert_eq!(score_voting(&v(10.0, 2.99), &a(80.0)), ONE);
        let no_approval = DerivedIndicators { approval_pct: None, ..with_turnout(0.0) };
        assert_eq!(score_voting(&v(10.0, 7.0), &no_approval), ONE);
        assert_eq!(score_voting(&VotingEfficiency::default(), &a(80.0)), ONE);
    }

    #[test]
    fn decentralisation_bins() {
        let h = |x: f64| Decentralisation { largest_holder_percent: Some(x), ..Default::default() };
        assert_eq!(score_decentralisation(&h(37.15), ONE, AutomationFlag::Yes), p(120));
        assert_eq!(score_decentralisation(&h(5.0), ONE, AutomationFlag::No), p(300));
        assert_eq!(score_decentralisation(&h(20.0), TWO, AutomationFlag::Yes), p(240));
        assert_eq!(score_decentralisation(&h(20.0), ONE, AutomationFlag::Yes), p(180));
        assert_eq!(score_decentralisation(&h(20.0), THREE, AutomationFlag::Unknown), p(180));
        assert_eq!(score_decentralisation(&h(10.0), TWO, AutomationFlag::Yes), p(240));
        assert_eq!(score_decentralisation(&h(33.0), TWO, AutomationFlag::Yes), p(240));
        assert_eq!(score_decentralisation(&h(66.0), ONE, AutomationFlag::No), p(120));
        assert_eq!(score_decentralisation(&h(70.0), ONE, AutomationFlag::No), p(60));
        assert_eq!(score_decentralisation(&Decentralisation::default(), THREE, AutomationFlag::Yes), p(60));
    }

    #[test]
    fn uniswap_card() {
        let parsed = parse_snapshot(include_bytes!("../testdata/uniswap.json")).unwrap();
        let card = score_dao(&parsed.snapshot);
        assert_eq!(
            card,
            ScoreCard {
                s_participation: p(100),
                s_funds: p(300),
                s_voting: p(200),
                s_decentralisation: p(120),
                composite: p(720),
                band: Band::Medium,
                policy_version: "table2-v1".into(),
            }
        );
        assert_eq!(card.composite.as_f64(), 7.2);
    }

    #[test]
    fn empty_and_maximal_cards() {
        let card = score_dao(&DaoSnapshot::empty("Empty", 1));
        assert_eq!(
            (card.s_participation, card.s_funds, card.s_voting, card.s_decentralisation),
            (p(100), p(75), p(100), p(60))
        );
        assert_eq!(card.composite, p(335));
        assert_eq!(card.band, Band::Low);

        let doc = serde_json::json!({
            "dao_name": "Max", "chain_id": 1,
            "network_participation": {"num_distinct_voters": 50, "total_members": 100},
            "accumulated_funds": {"treasury_value_usd": 2e9},
            "voting_efficiency": {"total_proposals": 10, "approval_rate": 80, "avg_voting_duration_days": 7},
            "decentralisation": {"largest_holder_percent": 5}
        });
        let card = score_dao(&crate::snapshot::parse_snapshot_value(&doc).unwrap().snapshot);
        assert_eq!(card.composite, p(1200));
        assert_eq!(card.band, Band::High);
    }

    #[test]
    fn band_boundaries() {
        assert_eq!(band_of(p(720)), Ok(Band::Medium));
        assert_eq!(band_of(p(600)), Ok(Band::Medium));
        assert_eq!(band_of(p(599)), Ok(Band::Low));
        assert_eq!(band_of(p(900)), Ok(Band::High));
        assert_eq!(band_of(p(899)), Ok(Band::Medium));
        assert_eq!(band_of(p(335)), Ok(Band::Low));
        assert_eq!(band_of(p(1200)), Ok(Band::High));
        assert_eq!(band_of(p(1201)), Err(CompositeOutOfRange(p(1201))));
    }
}
