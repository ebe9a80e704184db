//! Reproducible numerical experiments on the Heisenberg group.
//!
//! Each experiment evaluates a set of named checks and produces a JSON
//! [`Summary`] plus CSV tables and, for solver runs, binary grid snapshots.

pub mod experiments;
pub mod params;
pub mod report;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use hvisc_core::solver::{write_grid, write_slice_csv};
use thiserror::Error;

pub use experiments::{catalog, find, Experiment};
pub use params::{ParamKind, ParamSpec, Params};
pub use report::{Bound, Check, Outcome, Summary, Table};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExperimentError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("invalid parameters for `{experiment}`: {reason}")]
    InvalidParameters { experiment: String, reason: String },
}

/// Raised by experiments whose parameters parse but are out of range.
#[derive(Debug, Error)]
#[error("{0}")]
pub(crate) struct OutOfRange(pub String);

/// What to run, with which parameters, and where to put the artifacts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub name: String,
    /// Raw `key → value` strings; missing keys take the declared defaults.
    pub parameters: BTreeMap<String, String>,
    /// Summary and data files are written here when set.
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>) -> Self {
        ExperimentConfig { name: name.into(), ..Default::default() }
    }

    pub fn param(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn output_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output_dir = Some(dir.into());
        self
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<Summary> {
    let exp = find(&cfg.name).ok_or_else(|| ExperimentError::UnknownExperiment(cfg.name.clone()))?;
    let invalid = |reason: String| ExperimentError::InvalidParameters { experiment: exp.name.to_string(), reason };
    let params = Params::resolve(exp.params, &cfg.parameters).map_err(invalid)?;
    let outcome = match (exp.run)(&params) {
        Ok(o) => o,
        Err(e) => {
            return Err(match e.downcast::<OutOfRange>() {
                Ok(bad) => invalid(bad.0).into(),
                Err(e) => e.context(format!("experiment `{}` failed", exp.name)),
            })
        }
    };
    let mut summary = Summary {
        experiment: exp.name.to_string(),
        parameters: params.canonical(),
        passed: !outcome.checks.is_empty() && outcome.checks.iter().all(|c| c.passed),
        checks: outcome.checks.clone(),
        notes: outcome.notes.clone(),
        files: Vec::new(),
    };
    if let Some(dir) = &cfg.output_dir {
        summary.files = write_artifacts(dir, exp.name, &outcome)?;
        let path = dir.join(format!("{}.json", exp.name));
        fs::write(&path, summary.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(summary)
}

fn write_artifacts(dir: &Path, stem: &str, outcome: &Outcome) -> anyhow::Result<Vec<String>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    for table in &outcome.tables {
        let name = format!("{stem}-{}.csv", table.name);
        let path = dir.join(&name);
        table.write_csv(BufWriter::new(File::create(&path)?)).with_context(|| format!("writing {}", path.display()))?;
        files.push(name);
    }
    for (label, grid) in &outcome.grids {
        let base = format!("{stem}-{label}");
        write_grid(grid, &dir.join(&base)).with_context(|| format!("writing grid {base}"))?;
        let slice = format!("{base}-slice.csv");
        write_slice_csv(grid, 0.0, BufWriter::new(File::create(dir.join(&slice))?))?;
        files.extend([format!("{base}.bin"), format!("{base}.meta"), slice]);
    }
    Ok(files)
}
