//! The `dao-portal` command-line tool.

pub mod args;
pub mod client;
pub mod error;
pub mod score;
pub mod verify;

use std::future::Future;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use dao_portal_api::AppState;
use dao_portal_core::catalog::{load_bundle, Catalog, FileOutcome, ImportSummary};
use dao_portal_core::fixtures;

pub use args::{Cli, Command};
pub use error::{CliError, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

use args::{GenFixturesArgs, ImportArgs, ReportFormat, ScoreArgs, ServeArgs, ServeMode, VerifyArgs};

/// Runs one command and returns its exit code.
pub async fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    let Cli { catalog_dir, data_dir, command } = cli;
    match command {
        Command::Import(a) => {
            cmd_import(&require(catalog_dir, "--catalog-dir")?, &require(data_dir, "--data-dir")?, &a, out)
        }
        Command::Serve(a) => cmd_serve(catalog_dir, &a, out, shutdown_signal()).await,
        Command::Score(a) => cmd_score(&a, out).await,
        Command::Verify(a) => cmd_verify(&require(data_dir, "--data-dir")?, &a, out).await,
        Command::GenFixtures(a) => {
            let dir = a
                .out_dir
                .clone()
                .or(data_dir)
                .ok_or_else(|| CliError::Usage("--out-dir or --data-dir is required".into()))?;
            cmd_gen_fixtures(&dir, &a, out)
        }
    }
}

fn require(path: Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    path.ok_or_else(|| CliError::Usage(format!("{flag} is required")))
}

async fn shutdown_signal() {
    if let Err(e) = tokio::signal::ctrl_c().await {
        tracing::error!(error = %e, "cannot listen for ctrl-c");
        std::future::pending::<()>().await;
    }
    tracing::info!("shutting down");
}

pub fn cmd_import(catalog_dir: &Path, data_dir: &Path, args: &ImportArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let catalog = Catalog::open(catalog_dir)?;
    let summary = catalog.import_directory(data_dir)?;
    match args.format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &summary).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        ReportFormat::Text => render_import(&summary, out)?,
    }
    Ok(if summary.rejected() > 0 { EXIT_FAILURE } else { EXIT_OK })
}

fn render_import(summary: &ImportSummary, out: &mut dyn Write) -> std::io::Result<()> {
    for f in &summary.files {
        match &f.outcome {
            FileOutcome::Rejected => {
                writeln!(out, "rejected {}", f.path)?;
                for i in &f.issues {
                    writeln!(out, "  {:?} {}: {}", i.severity, i.field_path, i.message)?;
                }
            }
            FileOutcome::Imported { dao_id, run_id } => {
                writeln!(out, "imported {} as DAO {dao_id} run {run_id}", f.path)?;
                for i in &f.issues {
                    writeln!(out, "  warning {}: {}", i.field_path, i.message)?;
                }
            }
            FileOutcome::SkippedIdentical { run_id, .. } => writeln!(out, "unchanged {} (run {run_id})", f.path)?,
        }
    }
    writeln!(
        out,
        "{} imported, {} skipped, {} rejected, {} warnings",
        summary.imported(),
        summary.skipped(),
        summary.rejected(),
        summary.warnings()
    )
}

/// Serves until `shutdown` resolves. The bound address is printed first as
/// `listening on http://ADDR`.
pub async fn cmd_serve(
    catalog_dir: Option<PathBuf>,
    args: &ServeArgs,
    out: &mut dyn Write,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<u8, CliError> {
    let mut refresher = None;
    let state = match args.mode {
        ServeMode::Demo => {
            let bundle =
                args.bundle.clone().ok_or_else(|| CliError::Usage("--bundle is required in demo mode".into()))?;
            AppState::demo(load_bundle(&bundle)?)
        }
        ServeMode::Catalog => {
            let dir = require(catalog_dir, "--catalog-dir")?;
            let catalog = Arc::new(Catalog::open_existing(dir)?);
            if args.refresh_ms > 0 {
                refresher =
                    Some(dao_portal_api::spawn_refresh(Arc::clone(&catalog), Duration::from_millis(args.refresh_ms)));
            }
            AppState::catalog(catalog)
        }
    };
    let listener = tokio::net::TcpListener::bind(args.bind).await?;
    writeln!(out, "listening on http://{}", listener.local_addr()?)?;
    out.flush()?;
    let served = dao_portal_api::serve(listener, state, shutdown).await;
    if let Some(r) = refresher {
        r.abort();
    }
    served?;
    Ok(EXIT_OK)
}

pub async fn cmd_score(args: &ScoreArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let mut scored = score::load(&args.input).await?;
    if let Some(key) = args.sort {
        score::sort_rows(&mut scored.rows, key);
    }
    score::render(&scored.rows, args.format, out)?;
    for f in &scored.rejected {
        let why = f.issues.first().map_or("", |i| i.message.as_str());
        eprintln!("rejected {}: {why}", f.path);
    }
    Ok(if scored.rejected.is_empty() { EXIT_OK } else { EXIT_FAILURE })
}

pub async fn cmd_verify(data_dir: &Path, args: &VerifyArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let client = client::ApiClient::new(&args.api_base);
    let report = verify::verify(&client, data_dir, args.concurrency).await?;
    match args.format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        ReportFormat::Text => verify::render_text(&report, out)?,
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_gen_fixtures(out_dir: &Path, args: &GenFixturesArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let written = fixtures::write_corpus(args.n, args.seed, out_dir)?;
    writeln!(out, "wrote {} snapshot files to {}", written.len(), out_dir.display())?;
    Ok(EXIT_OK)
}
