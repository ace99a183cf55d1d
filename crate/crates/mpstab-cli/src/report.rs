//! Output layer: deterministic summary.json, per-run metadata.json with
//! the timing information kept out of the summary, and CSV tables with
//! period decimals and complex entries as [re,im] cells.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use mpstab::C64;

use crate::CliError;

/// One named pass/fail decision. Every false verdict names the inequality
/// that failed and drives the exit code.
pub struct Verdict {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Default)]
pub struct Verdicts(pub Vec<Verdict>);

impl Verdicts {
    pub fn check(&mut self, name: &'static str, pass: bool, detail: String) {
        self.0.push(Verdict { name, pass, detail });
    }

    pub fn failures(&self) -> Vec<&Verdict> {
        self.0.iter().filter(|v| !v.pass).collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.0
                .iter()
                .map(|v| {
                    serde_json::json!({
                        "name": v.name,
                        "pass": v.pass,
                        "detail": v.detail,
                    })
                })
                .collect(),
        )
    }
}

pub struct Csv {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Csv {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }
}

fn csv_quote(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

pub fn fmt_f64(x: f64) -> String {
    // shortest round-trip decimal, period separator, locale-free
    format!("{x}")
}

pub fn fmt_complex(z: C64) -> String {
    format!("[{},{}]", z.re, z.im)
}

pub fn complex_json(z: C64) -> Value {
    serde_json::json!([z.re, z.im])
}

/// Everything a subcommand hands back; the writer puts it on disk.
pub struct Outcome {
    pub summary: Value,
    pub tables: Vec<Csv>,
    pub verdicts: Verdicts,
    /// Extra (name, content) files, already serialized.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn new(summary: Value, verdicts: Verdicts) -> Self {
        Outcome {
            summary,
            tables: Vec::new(),
            verdicts,
            files: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    subcommand: &'a str,
    unix_time_start: f64,
    wall_seconds: f64,
    workers: usize,
    version: &'a str,
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Config(format!("write {}: {e}", path.display())))
}

/// Writes summary.json (deterministic), the CSV tables, any extra files,
/// and metadata.json (timing lives here, never in the summary).
pub fn write_outcome(
    out_dir: &Path,
    subcommand: &str,
    outcome: &Outcome,
    started: SystemTime,
    workers: usize,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Config(format!("create {}: {e}", out_dir.display())))?;

    let mut summary = outcome.summary.clone();
    if let Value::Object(map) = &mut summary {
        map.insert("verdicts".into(), outcome.verdicts.to_json());
        map.insert(
            "pass".into(),
            Value::Bool(outcome.verdicts.failures().is_empty()),
        );
    }
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Run(format!("serialize summary: {e}")))?;
    write(&out_dir.join("summary.json"), &format!("{text}\n"))?;

    for table in &outcome.tables {
        let mut lines = Vec::with_capacity(table.rows.len() + 1);
        lines.push(
            table
                .header
                .iter()
                .map(|c| csv_quote(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        for row in &table.rows {
            lines.push(
                row.iter()
                    .map(|c| csv_quote(c))
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        write(
            &out_dir.join(format!("{}.csv", table.name)),
            &format!("{}\n", lines.join("\n")),
        )?;
    }

    for (name, content) in &outcome.files {
        write(&out_dir.join(name), content)?;
    }

    let start_secs = started
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let wall = SystemTime::now()
        .duration_since(started)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let meta = Metadata {
        subcommand,
        unix_time_start: start_secs,
        wall_seconds: wall,
        workers,
        version: env!("CARGO_PKG_VERSION"),
    };
    let meta_text = serde_json::to_string_pretty(&meta)
        .map_err(|e| CliError::Run(format!("serialize metadata: {e}")))?;
    write(&out_dir.join("metadata.json"), &format!("{meta_text}\n"))
}
