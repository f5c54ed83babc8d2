//! JSON run reports.
//!
//! Every report has the same top-level keys:
//! `tool`, `version`, `command`, `seed`, `constants`, `config`,
//! `started_at_unix`, `stages`, `checks`, `bounds`, `results`, `outputs`.
//! `started_at_unix` and `stages[].seconds` are the only fields that vary
//! between identical runs.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use polylearn_core::{Constants, HypothesisCheck};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::matrix::{write_atomic, write_matrix};

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub constants: Constants,
    pub config: Value,
    pub started_at_unix: u64,
    pub stages: Vec<Stage>,
    pub checks: Vec<HypothesisCheck>,
    pub bounds: Map<String, Value>,
    pub results: Map<String, Value>,
    /// Files written by the run, relative to the output directory.
    pub outputs: Vec<String>,
    #[serde(skip)]
    out_dir: PathBuf,
}

impl Report {
    pub fn new(command: &str, seed: u64, constants: Constants, config: Value, out_dir: &Path) -> Self {
        let started_at_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: "polylearn",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            constants,
            config,
            started_at_unix,
            stages: Vec::new(),
            checks: Vec::new(),
            bounds: Map::new(),
            results: Map::new(),
            outputs: Vec::new(),
            out_dir: out_dir.to_path_buf(),
        }
    }

    /// Run `f` as a named, timed stage.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.push(Stage {
            name: name.to_string(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn config_set(&mut self, key: &str, value: impl Serialize) {
        if let Value::Object(m) = &mut self.config {
            m.insert(key.to_string(), to_value(value));
        }
    }

    pub fn bound(&mut self, key: &str, value: impl Serialize) {
        self.bounds.insert(key.to_string(), to_value(value));
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.to_string(), to_value(value));
    }

    pub fn checks(&mut self, checks: impl IntoIterator<Item = HypothesisCheck>) {
        self.checks.extend(checks);
    }

    pub fn write_matrix(&mut self, name: &str, m: &polylearn_core::PointMatrix) -> Result<()> {
        write_matrix(&self.out_dir.join(name), m)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.out_dir.join(name);
        let text = serde_json::to_string_pretty(value)?;
        write_atomic(&path, (text + "\n").as_bytes()).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Write `<command>.report.json` and return its path.
    pub fn finish(mut self) -> Result<PathBuf> {
        let name = format!("{}.report.json", self.command);
        let path = self.out_dir.join(&name);
        self.outputs.push(name);
        let text = serde_json::to_string_pretty(&self)?;
        write_atomic(&path, (text + "\n").as_bytes()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}
