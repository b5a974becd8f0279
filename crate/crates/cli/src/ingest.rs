//! Newline-delimited JSON curve records.

use std::path::Path;

use num_complex::Complex64;
use ptk_core::lattice::{reduce_tau, SiegelTau};
use ptk_core::modular::{j_invariant, QSeriesConfig};
use ptk_core::{CurveRecord, RationalJ};
use serde::Deserialize;

use crate::{CliError, Result};

#[derive(Debug, Deserialize)]
struct EmbeddingJson {
    tau_re: f64,
    tau_im: f64,
}

#[derive(Debug, Deserialize)]
struct RecordJson {
    label: String,
    degree: usize,
    embeddings: Vec<EmbeddingJson>,
    log_norm_minimal_discriminant: f64,
    j_num: Option<String>,
    j_den: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for IngestError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Default)]
pub struct Ingested {
    pub records: Vec<CurveRecord>,
    pub warnings: Vec<String>,
    pub errors: Vec<IngestError>,
}

pub fn ingest_curves(path: &Path, tol: f64) -> Result<Ingested> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    Ok(ingest_str(&text, tol))
}

/// Parses every nonblank line; invalid records are reported with their
/// 1-based line number and skipped.
pub fn ingest_str(text: &str, tol: f64) -> Ingested {
    let mut out = Ingested::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(line, line_no, tol, &mut out.warnings) {
            Ok(r) => out.records.push(r),
            Err(message) => out.errors.push(IngestError { line: line_no, message }),
        }
    }
    out
}

fn parse_record(line: &str, line_no: usize, tol: f64, warnings: &mut Vec<String>) -> std::result::Result<CurveRecord, String> {
    let raw: RecordJson = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let mut taus = Vec::with_capacity(raw.embeddings.len());
    for (k, e) in raw.embeddings.iter().enumerate() {
        let tau = match SiegelTau::with_tol(e.tau_re, e.tau_im, tol) {
            Ok(t) => t,
            Err(_) => {
                let (t, _) = reduce_tau(Complex64::new(e.tau_re, e.tau_im)).map_err(|err| format!("embedding {k}: {err}"))?;
                warnings.push(format!(
                    "line {line_no}: {}: embedding {k} tau = {} + {}i reduced to {} + {}i",
                    raw.label, e.tau_re, e.tau_im, t.re(), t.im()
                ));
                t
            }
        };
        taus.push(tau);
    }
    let j = match (&raw.j_num, &raw.j_den) {
        (Some(n), Some(d)) => Some(RationalJ::parse(n, d).map_err(|e| e.to_string())?),
        (Some(n), None) => Some(RationalJ::parse(n, "1").map_err(|e| e.to_string())?),
        (None, Some(_)) => return Err("j_den given without j_num".into()),
        (None, None) => None,
    };
    let record = CurveRecord::new(raw.label, raw.degree, taus, raw.log_norm_minimal_discriminant, j)
        .map_err(|e| e.to_string())?;
    for w in record.conjugation_warnings() {
        warnings.push(format!("line {line_no}: {w}"));
    }
    if let (Some(j), 1) = (&record.j_rational, record.degree) {
        let computed = j_invariant(record.embeddings[0], &QSeriesConfig::fundamental_domain()).map_err(|e| e.to_string())?;
        let expected = j.to_f64();
        if (computed.value - expected).norm() > 1e-6 * expected.abs().max(1.0) {
            warnings.push(format!(
                "line {line_no}: {}: j(tau) = {} disagrees with the rational j = {expected}",
                record.label, computed.value
            ));
        }
    }
    Ok(record)
}
