use std::path::PathBuf;

use anyhow::{Context, Result};
use serde_json::Value;

use crate::config::{Format, RunConfig};

/// A command result: structured detail plus a flat table for CSV.
pub struct Output {
    pub result: Value,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Human summary lines, printed to stderr.
    pub summary: Vec<String>,
    /// A checked property failed.
    pub failed: bool,
}

impl Output {
    pub fn new(result: Value) -> Self {
        Output {
            result,
            headers: Vec::new(),
            rows: Vec::new(),
            summary: Vec::new(),
            failed: false,
        }
    }

    pub fn table(mut self, headers: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.headers = headers.iter().map(|h| h.to_string()).collect();
        self.rows = rows;
        self
    }

    pub fn say(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn render(&self, run: &RunConfig) -> String {
        match run.settings.format {
            Format::Structured => {
                let doc = serde_json::json!({
                    "version": run.version,
                    "run_config": run,
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("json");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = format!("# readk {}\n", run.version);
                s.push_str("# run_config: ");
                s.push_str(&serde_json::to_string(run).expect("json"));
                s.push('\n');
                let mut w = csv::Writer::from_writer(Vec::new());
                if !self.headers.is_empty() {
                    w.write_record(&self.headers).expect("in-memory write");
                }
                for r in &self.rows {
                    w.write_record(r).expect("in-memory write");
                }
                s.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
                s
            }
        }
    }

    /// Writes to `out_dir/<command>.<ext>` when an output directory is set,
    /// otherwise to stdout. Returns the file written, if any.
    pub fn emit(&self, run: &RunConfig) -> Result<Option<PathBuf>> {
        let text = self.render(run);
        for line in &self.summary {
            eprintln!("{line}");
        }
        match &run.settings.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
                let path = dir.join(format!(
                    "{}.{}",
                    run.command,
                    run.settings.format.extension()
                ));
                std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
                Ok(Some(path))
            }
            None => {
                print!("{text}");
                Ok(None)
            }
        }
    }
}
