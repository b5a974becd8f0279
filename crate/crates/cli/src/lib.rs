//! Curve-record ingestion, verification suites and run manifests behind the
//! `ptk` binary.

pub mod ingest;
pub mod manifest;
pub mod suites;

use std::path::PathBuf;

pub use ingest::{ingest_curves, ingest_str, IngestError, Ingested};
pub use manifest::{emit_report, ReportFormat, RunManifest, SuiteCheck};
pub use suites::{run_suite, Suite, SuiteContext};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("missing fixtures: {0}")]
    MissingFixtures(String),
    #[error(transparent)]
    Core(#[from] ptk_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

pub const FIXTURES_ENV: &str = "PTK_FIXTURES";
pub const CURVES_FILE: &str = "curves.jsonl";

/// Fixture directory: `$PTK_FIXTURES` if set, else the bundled one.
pub fn fixtures_dir() -> PathBuf {
    std::env::var_os(FIXTURES_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")))
}
