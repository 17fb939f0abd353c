//! Seeded synthetic snapshot corpus.
//!
//! The first files of every corpus are fixed anchors that together hit every
//! bin of every KPI, every band, and the edge cases the importer and scorer
//! must handle (anomalous turnout, sparse proposals, missing blocks, nested
//! `metrics`, legacy key spelling, boolean and string automation flags). The
//! rest are drawn from a ChaCha stream, skewed towards low turnout.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

const UNISWAP: &str = include_str!("../testdata/uniswap.json");

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureFile {
    pub file_name: String,
    pub document: Value,
}

impl FixtureFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(&self.document).expect("fixture serialises");
        bytes.push(b'\n');
        bytes
    }
}

/// Number of fixed anchor files at the head of every corpus of at least
/// this size.
pub fn anchor_count() -> usize {
    anchors().len()
}

/// A deterministic corpus of `n` snapshot documents.
pub fn generate(n: usize, seed: u64) -> Vec<FixtureFile> {
    let mut files: Vec<FixtureFile> = anchors()
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(i, (slug, document))| FixtureFile { file_name: format!("{:03}-{slug}.json", i + 1), document })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut names: Vec<String> =
        files.iter().map(|f| f.document["dao_name"].as_str().unwrap_or_default().to_string()).collect();
    while files.len() < n {
        let index = files.len() + 1;
        let name = unique_name(&mut rng, &names, index);
        names.push(name.clone());
        let document = random_document(&mut rng, &name);
        files.push(FixtureFile { file_name: format!("{index:03}-{}.json", slugify(&name)), document });
    }
    files
}

/// Writes [`generate`]`(n, seed)` into `out_dir`, creating it if needed.
pub fn write_corpus(n: usize, seed: u64, out_dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    generate(n, seed)
        .into_iter()
        .map(|f| {
            let path = out_dir.join(&f.file_name);
            fs::write(&path, f.to_bytes())?;
            Ok(path)
        })
        .collect()
}

fn anchors() -> Vec<(&'static str, Value)> {
    let ts = "2025-04-06T17:38:34.119947";
    vec![
        ("uniswap", serde_json::from_str(UNISWAP).expect("bundled listing parses")),
        (
            "summit",
            json!({
                "dao_name": "Summit Collective",
                "chain_id": 1,
                "timestamp": ts,
                "network_participation": {"num_distinct_voters": 5000, "total_members": 10000, "participation_rate": 50.0, "unique_proposers": 61},
                "accumulated_funds": {"treasury_value_usd": 2.0e9, "circulating_supply": 4.0e8, "total_supply": 1.0e9, "circulating_token_percentage": 40.0, "token_price_usd": 3.5},
                "voting_efficiency": {"total_proposals": 40, "approved_proposals": 32, "approval_rate": 80.0, "avg_voting_duration_days": 7.0},
                "decentralisation": {"largest_holder_percent": 5.0, "on_chain_automation": true, "proposer_concentration": 12.5},
                "health_metrics": {"status": "healthy", "treasury_runway_months": 96}
            }),
        ),
        (
            "dormant",
            json!({
                "dao_name": "Dormant Guild",
                "chain_id": 10,
                "timestamp": ts
            }),
        ),
        (
            "anomalous-turnout",
            json!({
                "dao_name": "Anomalous Turnout DAO",
                "chain_id": 137,
                "timestamp": ts,
                "network_participation": {"num_distinct_voters": 1500, "total_members": 1000, "participation_rate": 150.0, "unique_proposers": 9},
                "accumulated_funds": {"treasury_value_usd": 5.0e7, "circulating_supply": 1.0e7, "total_supply": 2.0e7, "circulating_token_percentage": 50.0, "token_price_usd": 4.0},
                "voting_efficiency": {"total_proposals": 20, "approved_proposals": 11, "approval_rate": 55.0, "avg_voting_duration_days": 5.0},
                "decentralisation": {"largest_holder_percent": 50.0, "on_chain_automation": "No", "proposer_concentration": 44.0}
            }),
        ),
        (
            "sparse-proposals",
            json!({
                "dao_name": "Sparse Proposals DAO",
                "chain_id": 1,
                "timestamp": ts,
                "network_participation": {"num_distinct_voters": 250, "total_members": 1000, "participation_rate": 25.0, "unique_proposers": 2},
                "accumulated_funds": {"treasury_value_usd": 1.5e8, "circulating_supply": 6.0e8, "total_supply": 1.0e9, "circulating_token_percentage": 60.0},
                "voting_efficiency": {"total_proposals": 2, "approved_proposals": 2, "approval_rate": 90.0, "avg_voting_duration_days": 7.0},
                "decentralisation": {"largest_holder_percent": 20.0, "on_chain_automation": "yes", "proposer_concentration": 100.0}
            }),
        ),
        (
            "nested-metrics",
            json!({
                "dao_name": "Nested Metrics DAO",
                "chain_id": 42161,
                "timestamp": ts,
                "metrics": {
                    "network_participation": {"num_distinct_voters": 4500, "total_members": 10000, "participation_rate": 45.0, "unique_proposers": 30},
                    "accumulated_funds": {"treasury_value_usd": 1.2e8, "circulating_supply": 4.0e8, "total_supply": 1.0e9, "circulating_token_percentage": 40.0},
                    "voting_efficiency": {"total_proposals": 30, "approved_proposals": 22, "approval_rate": 0.75, "avg_voting_duration_days": 10.0},
                    "decentralisation": {"largest_holder_percent": 20.0, "on_chain_automation": "No", "proposer_concentration": 30.0}
                }
            }),
        ),
        (
            "fallback-treasury",
            json!({
                "dao_name": "Fallback Treasury DAO",
                "chain_id": 8453,
                "timestamp": ts,
                "network_participation": {"num_distinct_voters": 120, "total_members": 1000, "participation_rate": 12.0, "unique_proposers": 7},
                "accumulated_funds": {"treasury_value_usd": 5.0e7, "circulating_supply": 1.0e7, "token_price_usd": 2.0},
                "voting_efficiency": {"total_proposals": 12, "approved_proposals": 5, "approval_rate": 40.0, "avg_voting_duration_days": 4.0},
                "decentralisation": {"largest_holder_percent": 70.0, "on_chain_automation": "Yes", "proposer_concentration": 80.0}
            }),
        ),
        (
            "small-treasury",
            json!({
                "dao_name": "Small Treasury DAO",
                "chain_id": 1,
                "timestamp": ts,
                "network_participation": {"num_distinct_voters": 30, "total_members": 1000, "participation_rate": 3.0, "unique_proposers": 4},
                "accumulated_funds": {"treasury_value_usd": 5.0e6, "circulating_supply": 1.0e7, "total_supply": 5.0e7, "token_price_usd": 8.0},
                "voting_efficiency": {"total_proposals": 8, "approved_proposals": 1, "approval_rate": 20.0, "avg_voting_duration_days": 5.0},
                "decentralisation": {"largest_holder_percent": 80.0, "on_chain_automation": false, "proposer_concentration": 75.0}
            }),
        ),
        (
            "legacy-spelling",
            json!({
                "dao_name": "Legacy Spelling DAO",
                "chain_id": 1,
                "timestamp": ts,
                "network_participation": {"num_distinct_voters": 80, "total_members": 1000, "participation_rate": 8.0, "unique_proposers": 11},
                "accumulated_funds": {"treasury_value_usd": 2.0e8, "circulating_token_percentage": 30.0},
                "voting_efficiency": {"total_proposals": 15, "approved_proposals": 10, "approval_rate": 65.0, "avg_voting_duration_days": 2.0},
                "decentralization": {"largest_holder_percent": 8.0, "on_chain_automation": "Yes", "proposer_concentration": 20.0},
                "health_metrics": {"status": "stable", "treasury_runway_months": 48}
            }),
        ),
        (
            "zero-members",
            json!({
                "dao_name": "Zero Members DAO",
                "chain_id": 10,
                "timestamp": ts,
                "network_participation": {"num_distinct_voters": 10, "total_members": 0, "participation_rate": 0.0, "unique_proposers": 1},
                "accumulated_funds": {"treasury_value_usd": 2.5e6},
                "voting_efficiency": {"total_proposals": 5, "approved_proposals": 4, "approval_rate": 0.8, "avg_voting_duration_days": 6.0},
                "decentralisation": {"largest_holder_percent": 25.0, "on_chain_automation": true}
            }),
        ),
    ]
}

const NAME_HEADS: &[&str] = &[
    "Aurora", "Basalt", "Cobalt", "Delta", "Ember", "Fjord", "Granite", "Harbor", "Indigo", "Juniper", "Kestrel",
    "Lumen", "Meridian", "Nimbus", "Obsidian", "Prism", "Quartz", "Radiant", "Sable", "Tidal", "Umber", "Vertex",
    "Willow", "Zenith",
];
const NAME_TAILS: &[&str] = &[
    "DAO",
    "Collective",
    "Protocol",
    "Finance",
    "Guild",
    "Network",
    "Labs",
    "Commons",
    "Treasury",
    "Assembly",
    "Federation",
    "Union",
];

fn unique_name(rng: &mut ChaCha8Rng, taken: &[String], index: usize) -> String {
    for _ in 0..32 {
        let name =
            format!("{} {}", NAME_HEADS.choose(rng).expect("non-empty"), NAME_TAILS.choose(rng).expect("non-empty"));
        if !taken.contains(&name) {
            return name;
        }
    }
    format!("Synthetic DAO {index}")
}

fn slugify(name: &str) -> String {
    name.to_ascii_lowercase().replace(' ', "-")
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_document(rng: &mut ChaCha8Rng, name: &str) -> Value {
    let chain_id = *[1u64, 1, 1, 10, 137, 42161, 8453].choose(rng).expect("non-empty");
    let seconds = rng.gen_range(0..86_400u32);
    let micros = rng.gen_range(0..1_000_000u32);
    let timestamp =
        format!("2025-04-06T{:02}:{:02}:{:02}.{micros:06}", seconds / 3600, (seconds / 60) % 60, seconds % 60);

    let members = log_uniform(rng, 500.0, 2.0e6).round();
    let roll: f64 = rng.gen();
    let turnout = if roll < 0.8 {
        rng.gen_range(0.2..9.9)
    } else if roll < 0.92 {
        rng.gen_range(10.0..40.0)
    } else {
        rng.gen_range(40.5..85.0)
    };
    let voters = (members * turnout / 100.0).round().max(1.0);
    let participation = json!({
        "num_distinct_voters": voters as u64,
        "total_members": members as u64,
        "participation_rate": round_to(voters / members * 100.0, 4),
        "unique_proposers": rng.gen_range(1..120u32),
    });

    let treasury = round_to(log_uniform(rng, 1.0e4, 5.0e9), 2);
    let circulating = log_uniform(rng, 1.0e6, 1.0e10).round();
    let total = (circulating / rng.gen_range(0.2..1.0)).round();
    let mut funds = Map::new();
    funds.insert("treasury_value_usd".into(), treasury.into());
    funds.insert("circulating_supply".into(), (circulating as u64).into());
    funds.insert("total_supply".into(), (total as u64).into());
    funds.insert("circulating_token_percentage".into(), round_to(circulating / total * 100.0, 4).into());
    if rng.gen_bool(0.6) {
        funds.insert("token_price_usd".into(), round_to(log_uniform(rng, 0.01, 200.0), 4).into());
    }

    let total_proposals = if rng.gen_bool(0.1) { rng.gen_range(0..3u32) } else { rng.gen_range(3..300u32) };
    let approved = (f64::from(total_proposals) * rng.gen_range(0.1..0.95)).round() as u32;
    let approval_pct =
        if total_proposals == 0 { 0.0 } else { f64::from(approved) / f64::from(total_proposals) * 100.0 };
    let approval_rate = if rng.gen_bool(0.2) { round_to(approval_pct / 100.0, 4) } else { round_to(approval_pct, 2) };
    let voting = json!({
        "total_proposals": total_proposals,
        "approved_proposals": approved,
        "approval_rate": approval_rate,
        "avg_voting_duration_days": round_to(rng.gen_range(1.0..20.0), 2),
    });

    let roll: f64 = rng.gen();
    let holder = if roll < 0.15 {
        rng.gen_range(1.0..10.0)
    } else if roll < 0.5 {
        rng.gen_range(10.0..33.0)
    } else if roll < 0.85 {
        rng.gen_range(33.0..66.0)
    } else {
        rng.gen_range(66.0..95.0)
    };
    let automation = match rng.gen_range(0..5u8) {
        0 => json!("Yes"),
        1 => json!("No"),
        2 => json!(true),
        3 => json!(false),
        _ => json!("yes"),
    };
    let mut decentralisation = Map::new();
    decentralisation.insert("largest_holder_percent".into(), round_to(holder, 2).into());
    decentralisation.insert("on_chain_automation".into(), automation);
    decentralisation.insert("proposer_concentration".into(), round_to(rng.gen_range(5.0..95.0), 2).into());
    if rng.gen_bool(0.3) {
        decentralisation.insert(
            "token_distribution".into(),
            json!({
                "top_10_holders_percent": round_to(rng.gen_range(holder.max(20.0)..99.0), 2),
                "gini": round_to(rng.gen_range(0.5..0.99), 3),
            }),
        );
    }

    let mut doc = Map::new();
    doc.insert("dao_name".into(), name.into());
    doc.insert("chain_id".into(), chain_id.into());
    doc.insert("timestamp".into(), timestamp.into());
    doc.insert("network_participation".into(), participation);
    doc.insert("accumulated_funds".into(), funds.into());
    doc.insert("voting_efficiency".into(), voting);
    doc.insert("decentralisation".into(), decentralisation.into());
    if rng.gen_bool(0.3) {
        let status = *["healthy", "stable", "watch"].choose(rng).expect("non-empty");
        doc.insert(
            "health_metrics".into(),
            json!({"status": status, "treasury_runway_months": rng.gen_range(3..120u32)}),
        );
    }
    Value::Object(doc)
}
