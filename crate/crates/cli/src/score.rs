use std::io::Write;
use std::path::Path;

use dao_portal_core::catalog::{FileReport, SourceDocument, SourceScan};
use dao_portal_core::{score_dao, DaoSnapshot, ScoreCard};
use serde::Serialize;

use crate::args::{OutputFormat, SortKey};
use crate::client::ApiClient;
use crate::error::CliError;

pub const CSV_HEADER: [&str; 9] = [
    "dao_name",
    "chain_id",
    "s_participation",
    "s_funds",
    "s_voting",
    "s_decentralisation",
    "composite",
    "band",
    "policy_version",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub dao_name: String,
    pub chain_id: u64,
    #[serde(flatten)]
    pub card: ScoreCard,
}

impl ScoreRow {
    pub fn from_snapshot(s: &DaoSnapshot) -> Self {
        Self { dao_name: s.dao_name.clone(), chain_id: s.chain_id, card: score_dao(s) }
    }
}

/// Rows plus the files that could not be scored.
#[derive(Debug, Default)]
pub struct Scored {
    pub rows: Vec<ScoreRow>,
    pub rejected: Vec<FileReport>,
}

pub fn is_url(input: &str) -> bool {
    input.starts_with("http://") || input.starts_with("https://")
}

pub async fn load(input: &str) -> Result<Scored, CliError> {
    if is_url(input) {
        return from_api(&ApiClient::new(input)).await;
    }
    let path = Path::new(input);
    if path.is_dir() {
        let scan = SourceScan::read_dir(path)?;
        let rows = scan.latest_per_dao().into_iter().map(|d| ScoreRow::from_snapshot(&d.parsed.snapshot)).collect();
        return Ok(Scored { rows, rejected: scan.rejected });
    }
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {input}: {e}")))?;
    let doc = SourceDocument::from_bytes(input, &bytes).map_err(|e| CliError::Input(format!("{input}: {e}")))?;
    Ok(Scored { rows: vec![ScoreRow::from_snapshot(&doc.parsed.snapshot)], rejected: Vec::new() })
}

/// Scores what the API serves, the way the dashboard does.
pub async fn from_api(client: &ApiClient) -> Result<Scored, CliError> {
    let ids: Vec<_> = client.list_daos().await?.into_iter().map(|d| d.dao_id).collect();
    let mut rows = Vec::with_capacity(ids.len());
    for payload in client.payloads(&ids).await? {
        let parsed = payload
            .to_parsed()
            .map_err(|e| CliError::Input(format!("payload of DAO {} is not a snapshot: {e}", payload.dao_id)))?;
        rows.push(ScoreRow::from_snapshot(&parsed.snapshot));
    }
    Ok(Scored { rows, rejected: Vec::new() })
}

/// Highest first; ties keep their input order.
pub fn sort_rows(rows: &mut [ScoreRow], key: SortKey) {
    let pick = |r: &ScoreRow| match key {
        SortKey::Overall => r.card.composite,
        SortKey::Participation => r.card.s_participation,
        SortKey::Funds => r.card.s_funds,
        SortKey::Voting => r.card.s_voting,
        SortKey::Decentralisation => r.card.s_decentralisation,
    };
    rows.sort_by_key(|r| std::cmp::Reverse(pick(r)));
}

pub fn render(rows: &[ScoreRow], format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, rows).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let csv_err = |e: csv::Error| CliError::Io(std::io::Error::other(e));
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for r in rows {
                let c = &r.card;
                w.write_record([
                    r.dao_name.clone(),
                    r.chain_id.to_string(),
                    c.s_participation.to_string(),
                    c.s_funds.to_string(),
                    c.s_voting.to_string(),
                    c.s_decentralisation.to_string(),
                    c.composite.to_string(),
                    c.band.to_string(),
                    c.policy_version.clone(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
        OutputFormat::Table => render_table(rows, out)?,
    }
    Ok(())
}

fn render_table(rows: &[ScoreRow], out: &mut dyn Write) -> std::io::Result<()> {
    let header = ["DAO", "PART", "FUNDS", "VOTE", "DECENT", "C", "BAND"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            let c = &r.card;
            [
                r.dao_name.clone(),
                c.s_participation.to_string(),
                c.s_funds.to_string(),
                c.s_voting.to_string(),
                c.s_decentralisation.to_string(),
                c.composite.to_string(),
                c.band.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |out: &mut dyn Write, row: &[&str]| {
        let mut s = String::new();
        for (i, (cell, w)) in row.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            if i == 0 || i == row.len() - 1 {
                s.push_str(&format!("{cell:<w$}"));
            } else {
                s.push_str(&format!("{cell:>w$}"));
            }
        }
        writeln!(out, "{}", s.trim_end())
    };
    line(out, &header)?;
    for row in &cells {
        line(out, &row.each_ref().map(String::as_str))?;
    }
    if let Some(first) = rows.first() {
        writeln!(out, "policy {}", first.card.policy_version)?;
    }
    Ok(())
}
