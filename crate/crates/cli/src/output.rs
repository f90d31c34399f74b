use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use qsearch_core::experiments::RunMetadata;
use qsearch_core::{PhasePolicy, RunRecord};
use serde::Serialize;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    /// Pretty-printed JSON.
    StructuredText,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Writes `text` to `out`, or stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Like [`emit`]; a file output also gets a `<stem>.meta.json` sidecar.
pub fn emit_table(out: Option<&Path>, text: &str, meta: &RunMetadata) -> Result<()> {
    emit(out, text)?;
    if let Some(path) = out {
        let side = sidecar_path(path);
        std::fs::write(&side, meta.to_json()).with_context(|| format!("writing {}", side.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct RunReport {
    source: String,
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    policy: PhasePolicy,
    #[serde(flatten)]
    record: RunRecord,
}

impl RunReport {
    pub fn new(source: String, n: usize, l: usize, policy: PhasePolicy, record: RunRecord) -> Self {
        RunReport { source, n, l, policy, record }
    }

    pub fn log_summary(&self) {
        match (self.record.chosen_steps, self.record.cost) {
            (Some(j), Some(c)) => eprintln!(
                "{}: best J = {j}, P_soln = {:.6}, C = {c:.4}",
                self.source, self.record.p_soln[j]
            ),
            _ => eprintln!("{}: no step reached a solution", self.source),
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::StructuredText => to_json(self),
            Format::Csv => Ok(self.to_csv()),
        }
    }

    /// One row per step: `step,p_soln,cost`, then `good_size_k` columns
    /// when a level profile was recorded.
    fn to_csv(&self) -> String {
        let mut out = String::from("step,p_soln,cost");
        if self.record.level_profile.is_some() {
            for k in 0..=self.n {
                let _ = write!(out, ",good_size_{k}");
            }
        }
        out.push('\n');
        for (j, p) in self.record.p_soln.iter().enumerate() {
            let cost = self.record.cost_at(j).map(|c| c.to_string()).unwrap_or_default();
            let _ = write!(out, "{j},{p},{cost}");
            if let Some(levels) = &self.record.level_profile {
                for v in &levels[j] {
                    let _ = write!(out, ",{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}
