//! Report assembly: every report carries a manifest of the command line that
//! produced it, followed by a CSV table or a JSON body.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub type Result<T> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub parameters: Value,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: Value) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameters,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// A table with a fixed header.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

fn render_csv(manifest: &RunManifest, table: &Table) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "# command: {}", manifest.command)?;
    writeln!(out, "# version: {}", manifest.version)?;
    writeln!(out, "# parameters: {}", manifest.parameters)?;
    writeln!(out, "# timestamp: {}", manifest.timestamp)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn render_json<T: Serialize>(manifest: &RunManifest, body: &T) -> Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        manifest: &'a RunManifest,
        report: &'a T,
    }
    let mut out = serde_json::to_vec_pretty(&Doc { manifest, report: body })?;
    out.push(b'\n');
    Ok(out)
}

/// Writes the report to `out`, or to stdout when no path is given.
pub fn emit<T: Serialize>(
    manifest: &RunManifest,
    format: Format,
    table: &Table,
    body: &T,
    out: Option<&Path>,
) -> Result<()> {
    let bytes = match format {
        Format::Csv => render_csv(manifest, table)?,
        Format::Json => render_json(manifest, body)?,
    };
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}
