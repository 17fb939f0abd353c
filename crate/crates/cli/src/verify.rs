use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use dao_portal_core::catalog::SourceScan;
use dao_portal_core::verify::{verify_payload, DaoVerification, VerifyReport};
use tokio::sync::Semaphore;
use tokio::task::JoinSet;

use crate::client::ApiClient;
use crate::error::CliError;

/// Checks every DAO of `data_dir` against the payload the API serves for it.
/// Each DAO is checked against the file an import would have made current.
pub async fn verify(client: &ApiClient, data_dir: &Path, concurrency: usize) -> Result<VerifyReport, CliError> {
    let scan = SourceScan::read_dir(data_dir)?;
    let mut results: Vec<DaoVerification> = scan
        .rejected
        .iter()
        .map(|f| {
            let why = f.issues.first().map_or_else(|| "rejected".to_string(), |i| i.message.clone());
            DaoVerification::failed(
                f.dao_name.clone().unwrap_or_default(),
                None,
                f.path.clone(),
                format!("source rejected: {why}"),
            )
        })
        .collect();

    let sources = scan.latest_per_dao();
    let listed = match client.list_daos().await {
        Ok(l) => l,
        Err(e) => {
            results.extend(sources.iter().map(|d| {
                let s = &d.parsed.snapshot;
                DaoVerification::failed(s.dao_name.clone(), Some(s.chain_id), d.path.clone(), e.to_string())
            }));
            return Ok(VerifyReport::new(results));
        }
    };

    let permits = Arc::new(Semaphore::new(concurrency.max(1)));
    let mut tasks = JoinSet::new();
    for (order, doc) in sources.into_iter().enumerate() {
        let s = &doc.parsed.snapshot;
        let Some(summary) = listed.iter().find(|d| d.dao_name == s.dao_name && d.chain_id == s.chain_id) else {
            tasks.spawn(std::future::ready((
                order,
                DaoVerification::failed(
                    s.dao_name.clone(),
                    Some(s.chain_id),
                    doc.path.clone(),
                    "not served by the API",
                ),
            )));
            continue;
        };
        let (id, client, doc, permits) = (summary.dao_id, client.clone(), doc.clone(), Arc::clone(&permits));
        tasks.spawn(async move {
            let _permit = permits.acquire_owned().await.expect("semaphore is never closed");
            let s = &doc.parsed.snapshot;
            let result = match client.payload(id).await {
                Ok(payload) => verify_payload(&doc.path, &doc.parsed, &payload),
                Err(e) => {
                    DaoVerification::failed(s.dao_name.clone(), Some(s.chain_id), doc.path.clone(), e.to_string())
                }
            };
            (order, result)
        });
    }
    let mut checked = tasks.join_all().await;
    checked.sort_by_key(|(order, _)| *order);
    results.extend(checked.into_iter().map(|(_, r)| r));
    Ok(VerifyReport::new(results))
}

pub fn render_text(report: &VerifyReport, out: &mut dyn Write) -> std::io::Result<()> {
    let show = |v: &Option<serde_json::Value>| v.as_ref().map_or_else(|| "<absent>".to_string(), ToString::to_string);
    for d in &report.daos {
        let status = if d.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {} ({})", d.dao_name, d.source_path)?;
        if let Some(e) = &d.error {
            writeln!(out, "  error: {e}")?;
        }
        for m in &d.field_mismatches {
            writeln!(out, "  field {}: source {} served {}", m.field_path, show(&m.expected), show(&m.found))?;
        }
        for m in &d.score_mismatches {
            writeln!(out, "  score {}: source {} served {}", m.field, m.expected, m.found)?;
        }
    }
    let failed = report.daos.iter().filter(|d| !d.passed()).count();
    let fields: usize = report.daos.iter().map(|d| d.field_mismatches.len()).sum();
    let scores: usize = report.daos.iter().map(|d| d.score_mismatches.len()).sum();
    writeln!(
        out,
        "{} DAOs checked, {failed} failed, {fields} field mismatches, {scores} score mismatches",
        report.daos.len()
    )
}
