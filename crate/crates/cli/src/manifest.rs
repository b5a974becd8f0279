//! Run manifests and their canonical JSON / text renderings.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ptk_core::BoundReport;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub suite: String,
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub suites: Vec<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<SuiteCheck>,
    /// Absent when timing is disabled, which keeps reports byte-identical.
    pub wall_time_seconds: Option<f64>,
    /// SHA-256 of each input file, keyed by file name.
    pub input_digests: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.report.satisfied)
    }

    pub fn violated(&self) -> impl Iterator<Item = &SuiteCheck> {
        self.checks.iter().filter(|c| !c.report.satisfied)
    }

    pub fn find(&self, name: &str) -> Option<&BoundReport> {
        self.checks.iter().map(|c| &c.report).find(|r| r.name == name)
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        let mut s = String::new();
        write_canonical(&serde_json::to_value(self)?, &mut s);
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Sorted keys, no whitespace, floats with 17 significant digits.
fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) if !n.is_f64() => out.push_str(&u.to_string()),
            (_, Some(i)) if !n.is_f64() => out.push_str(&i.to_string()),
            _ => out.push_str(&format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&m[k], out);
            }
            out.push('}');
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Self::Text),
            "json" => Ok(Self::Json),
            _ => Err(CliError::Input(format!("unknown format '{s}'"))),
        }
    }
}

pub fn render_text(m: &RunManifest) -> String {
    let mut s = String::new();
    let width = m.checks.iter().map(|c| c.report.name.len()).max().unwrap_or(4).max(4);
    s.push_str(&format!(
        "{:<6} {:<13} {:<width$} {:>24} {:>24} {:>24}\n",
        "status", "suite", "name", "lhs", "rhs", "margin"
    ));
    for c in &m.checks {
        let r = &c.report;
        s.push_str(&format!(
            "{:<6} {:<13} {:<width$} {:>24.16e} {:>24.16e} {:>24.16e}\n",
            if r.satisfied { "PASS" } else { "FAIL" },
            c.suite,
            r.name,
            r.lhs,
            r.rhs,
            r.margin
        ));
    }
    let failed = m.violated().count();
    s.push_str(&format!("{} checks, {} violated", m.checks.len(), failed));
    if let Some(t) = m.wall_time_seconds {
        s.push_str(&format!(", {t:.3} s"));
    }
    s.push('\n');
    s
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(m: &RunManifest, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let body = match format {
        ReportFormat::Text => render_text(m),
        ReportFormat::Json => m.to_canonical_json()?,
    };
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| CliError::Io { path: p.to_owned(), source }),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        let mut tol = BTreeMap::new();
        tol.insert("tol".to_string(), 1e-9);
        RunManifest {
            tool_version: "0.1.0".into(),
            suites: vec!["serre".into()],
            tolerances: tol,
            checks: vec![
                SuiteCheck {
                    suite: "serre".into(),
                    report: BoundReport::new("a", 0.1, 1.0 / 3.0).with_input("p", 3.0),
                },
                SuiteCheck { suite: "serre".into(), report: BoundReport::new("nan", f64::NAN, f64::INFINITY) },
            ],
            wall_time_seconds: None,
            input_digests: BTreeMap::new(),
        }
    }

    #[test]
    fn json_round_trip() {
        let mut m = sample();
        m.checks.pop();
        let s = m.to_canonical_json().unwrap();
        assert_eq!(RunManifest::from_json(&s).unwrap(), m);
        assert_eq!(RunManifest::from_json(&s).unwrap().to_canonical_json().unwrap(), s);
        assert!(s.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn non_finite_values_survive() {
        let m = sample();
        let back = RunManifest::from_json(&m.to_canonical_json().unwrap()).unwrap();
        assert!(back.checks[1].report.lhs.is_nan());
        assert_eq!(back.checks[1].report.rhs, f64::INFINITY);
    }

    #[test]
    fn text_has_margin_column() {
        let t = render_text(&sample());
        assert!(t.lines().next().unwrap().contains("margin"));
        assert!(t.contains("FAIL"));
    }

    #[test]
    fn digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
