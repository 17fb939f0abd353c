use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Import, serve, score and verify DAO metric snapshots.
#[derive(Debug, Parser)]
#[command(name = "dao-portal", version)]
pub struct Cli {
    /// Run catalog directory.
    #[arg(long, global = true, env = "DAO_PORTAL_CATALOG_DIR")]
    pub catalog_dir: Option<PathBuf>,

    /// Directory of snapshot files.
    #[arg(long, global = true, env = "DAO_PORTAL_DATA_DIR")]
    pub data_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Import every snapshot file of the data directory into the catalog.
    Import(ImportArgs),
    /// Serve the read-only HTTP API.
    Serve(ServeArgs),
    /// Score DAOs from a file, a directory or a running API.
    Score(ScoreArgs),
    /// Check that the API serves exactly what the data directory holds.
    Verify(VerifyArgs),
    /// Write a seeded synthetic snapshot corpus.
    GenFixtures(GenFixturesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long, value_enum, default_value = "text", env = "DAO_PORTAL_FORMAT")]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ServeMode {
    Catalog,
    Demo,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, value_enum, default_value = "catalog", env = "DAO_PORTAL_MODE")]
    pub mode: ServeMode,

    /// Snapshot bundle for demo mode: a JSON array file or a directory.
    #[arg(long, env = "DAO_PORTAL_BUNDLE")]
    pub bundle: Option<PathBuf>,

    #[arg(long, default_value = "127.0.0.1:8000", env = "DAO_PORTAL_BIND")]
    pub bind: SocketAddr,

    /// How often the catalog is re-read for imports by other processes.
    #[arg(long, default_value_t = 2000, env = "DAO_PORTAL_REFRESH_MS")]
    pub refresh_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SortKey {
    Overall,
    Participation,
    Funds,
    Voting,
    Decentralisation,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Snapshot file, directory of snapshot files, or API base URL.
    #[arg(env = "DAO_PORTAL_INPUT")]
    pub input: String,

    #[arg(long, value_enum, default_value = "table", env = "DAO_PORTAL_FORMAT")]
    pub format: OutputFormat,

    /// Sort rows by a score, highest first.
    #[arg(long, value_enum, env = "DAO_PORTAL_SORT")]
    pub sort: Option<SortKey>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Base URL of the running API, e.g. http://127.0.0.1:8000
    #[arg(long, env = "DAO_PORTAL_API_BASE")]
    pub api_base: String,

    #[arg(long, value_enum, default_value = "text", env = "DAO_PORTAL_FORMAT")]
    pub format: ReportFormat,

    /// Maximum concurrent payload fetches.
    #[arg(long, default_value_t = 16, env = "DAO_PORTAL_CONCURRENCY")]
    pub concurrency: usize,
}

#[derive(Debug, Args)]
pub struct GenFixturesArgs {
    #[arg(long, default_value_t = 50, env = "DAO_PORTAL_N")]
    pub n: usize,

    #[arg(long, default_value_t = 7, env = "DAO_PORTAL_SEED")]
    pub seed: u64,

    /// Defaults to the data directory.
    #[arg(long, env = "DAO_PORTAL_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
}
