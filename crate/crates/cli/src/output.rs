use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Format};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Plot-ready rows plus a free-form summary.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Value,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Finite floats become numbers, everything else null.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn provenance(cfg: &ExperimentConfig) -> Value {
    json!({ "tool": "qkernel", "version": VERSION, "config": cfg })
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn open(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_header(w: &mut dyn Write, cfg: &ExperimentConfig) -> Result<(), CliError> {
    writeln!(w, "# qkernel {VERSION}")?;
    writeln!(w, "# config: {}", serde_json::to_string(cfg)?)?;
    Ok(())
}

pub fn emit(cfg: &ExperimentConfig, table: &Table) -> Result<(), CliError> {
    let mut w = open(cfg.out.as_deref())?;
    match cfg.format {
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    Value::Object(
                        table
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(k, v)| (k.to_string(), v.clone()))
                            .collect(),
                    )
                })
                .collect();
            let doc = json!({
                "provenance": provenance(cfg),
                "columns": table.columns,
                "rows": rows,
                "summary": table.summary,
            });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
        Format::Csv | Format::Binary => {
            write_header(&mut *w, cfg)?;
            writeln!(w, "{}", table.columns.join(","))?;
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(cell).collect();
                writeln!(w, "{}", cells.join(","))?;
            }
            if !table.summary.is_null() {
                writeln!(w, "# summary: {}", serde_json::to_string(&table.summary)?)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Path of the JSON provenance sidecar written next to a binary output.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_sidecar<T: Serialize>(out: &Path, cfg: &ExperimentConfig, extra: &T) -> Result<(), CliError> {
    let doc = json!({ "provenance": provenance(cfg), "summary": extra });
    std::fs::write(sidecar_path(out), serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

pub fn open_output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>, CliError> {
    open(cfg.out.as_deref())
}
