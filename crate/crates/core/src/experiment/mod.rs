//! Reproducible Monte Carlo experiments driven by TOML configuration files.
//!
//! A config names one experiment, a master seed and a replicate count, and
//! may carry a section of the same name with the experiment's parameters
//! plus a `[tolerance]` table overriding the default pass thresholds:
//!
//! ```toml
//! experiment = "clt"
//! seed = 5
//! replicates = 2000
//!
//! [clt]
//! hurst = 0.7
//! alpha = 0.4
//!
//! [tolerance]
//! variance_rel = 0.15
//! ```
//!
//! Replicate `r` of every cell draws its noise from `SeedSpec(seed, r)`.
//! Replicates run on a rayon pool and are collected in index order, so the
//! output is a pure function of the config.

mod config;
mod rows;
mod runs;

use std::path::Path;

use serde::Serialize;

pub use config::{
    BiasSweep, CalibrationConvergence, Clt, ConjectureScanConfig, ConsistencyRate, ExperimentConfig,
    ExperimentKind, ExpansionResidual, HurstSweep, ScoreConsistency, SignatureCheck, TfeSweep,
};
pub use rows::{format_float, read_csv, read_rows, write_csv, write_rows, ResultRow, COLUMNS};

use crate::domain::SeedSpec;
use crate::{Error, Result};

/// One pass/fail comparison in an experiment summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `|value − target| <= tolerance`.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }

    /// `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: bound,
            tolerance: 0.0,
            pass: value <= bound,
        }
    }

    /// `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: bound,
            tolerance: 0.0,
            pass: value >= bound,
        }
    }

    /// A yes/no property, recorded as 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            target: 1.0,
            tolerance: 0.0,
            pass: ok,
        }
    }
}

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub experiment: String,
    pub seed: u64,
    pub replicates: usize,
    #[serde(skip)]
    pub rows: Vec<ResultRow>,
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `results.csv` and `summary.json` into `dir`, creating it.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_csv(&self.rows, &dir.join("results.csv"))?;
        std::fs::write(dir.join("summary.json"), self.summary_json()?)?;
        Ok(())
    }
}

/// Parses, validates and runs a config on a pool of `config.threads`
/// workers (rayon's default when unset).
pub fn run_config(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| runs::dispatch(config))
}

/// [`run_config`] on TOML text.
pub fn run_toml(text: &str) -> Result<ExperimentOutput> {
    run_config(&ExperimentConfig::from_toml(text)?)
}

/// Runs `f` for replicates `0..count` with seeds `SeedSpec(master, r)` and
/// returns the results in replicate order. Errors carry the replicate index.
pub fn replicate_map<T, F>(master: u64, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, SeedSpec) -> Result<T> + Sync,
{
    use rayon::prelude::*;
    (0..count as u64)
        .into_par_iter()
        .map(|r| {
            f(r, SeedSpec::new(master, r)).map_err(|e| Error::Replicate {
                replicate: r,
                source: Box::new(e),
            })
        })
        .collect()
}
