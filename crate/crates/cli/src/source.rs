//! Spec sources and experiment config files.
//!
//! A geometric sum comes from an inline probability list, a generator string
//! `onemax:N:K`, or a JSON file. Both JSON forms carry `"schema": 1`:
//!
//! ```json
//! {"schema": 1, "probs": [0.5, 0.25]}
//! {"schema": 1, "generator": "onemax", "n": 100, "k": 50}
//! ```

use std::fs;
use std::path::Path;

use geotail::onemax_analysis::onemax_partition;
use geotail::LevelPartition;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Where the level probabilities come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecSource {
    Probs {
        probs: Vec<f64>,
    },
    Generator {
        generator: String,
        n: u64,
        #[serde(default)]
        k: u64,
    },
}

#[derive(Debug, Deserialize)]
struct SpecFile {
    schema: u32,
    #[serde(flatten)]
    source: SpecSource,
}

impl SpecSource {
    /// Builds the no-skip level partition described by this source.
    pub fn partition(&self) -> Result<LevelPartition, CliError> {
        match self {
            SpecSource::Probs { probs } => LevelPartition::new(probs.clone(), 0, true)
                .map_err(|e| CliError::Config(format!("probs: {e}"))),
            SpecSource::Generator { generator, n, k } => {
                if generator != "onemax" {
                    return Err(CliError::Config(format!(
                        "unknown generator {generator:?}; only \"onemax\" is available"
                    )));
                }
                onemax_partition(*n, *k).map_err(|_| {
                    CliError::Config(format!(
                        "onemax generator needs 0 <= k < n, got n={n} k={k}"
                    ))
                })
            }
        }
    }

    /// OneMax problem size and start level, if the source is the generator.
    pub fn onemax(&self) -> Option<(u64, u64)> {
        match self {
            SpecSource::Generator { n, k, .. } => Some((*n, *k)),
            SpecSource::Probs { .. } => None,
        }
    }
}

/// Parses `0.5,0.25,...`.
pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .enumerate()
        .map(|(i, item)| {
            item.parse::<f64>().map_err(|_| {
                CliError::Config(format!("{what}: item {} ({item:?}) is not a number", i + 1))
            })
        })
        .collect()
}

/// Parses `onemax:N:K`, or reads a JSON spec file at that path.
pub fn parse_spec_arg(arg: &str) -> Result<SpecSource, CliError> {
    if let Some(rest) = arg.strip_prefix("onemax:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let bad = || CliError::Config(format!("generator {arg:?} must look like onemax:N:K"));
        if parts.len() != 2 {
            return Err(bad());
        }
        let n = parts[0].parse().map_err(|_| bad())?;
        let k = parts[1].parse().map_err(|_| bad())?;
        return Ok(SpecSource::Generator {
            generator: "onemax".into(),
            n,
            k,
        });
    }
    load_spec_file(Path::new(arg))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: cannot read: {e}", path.display())))
}

fn json_error(path: &Path, e: serde_json::Error) -> CliError {
    CliError::Config(format!(
        "{}:{}:{}: {}",
        path.display(),
        e.line(),
        e.column(),
        e
    ))
}

fn check_schema(path: &Path, schema: u32) -> Result<(), CliError> {
    if schema != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "{}: unsupported schema {schema}, expected {SCHEMA_VERSION}",
            path.display()
        )));
    }
    Ok(())
}

pub fn load_spec_file(path: &Path) -> Result<SpecSource, CliError> {
    let text = read(path)?;
    let file: SpecFile = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    check_schema(path, file.schema)?;
    Ok(file.source)
}

/// Process to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    RlsOnemax,
    LevelChain,
    CouponCollector,
}

/// How grid values are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// Absolute deviations from the mean.
    Delta,
    /// Multiples of `n` (OneMax / coupon collector only).
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Experiment config file. Every field may also be given on the command line,
/// where it takes precedence.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: u32,
    pub process: Option<ProcessKind>,
    pub n: Option<u64>,
    /// Fixed start level; absent means uniform initialization for RLS.
    pub k: Option<u64>,
    pub partition: Option<SpecSource>,
    pub replications: Option<u64>,
    pub master_seed: Option<u64>,
    pub grid: Option<Vec<f64>>,
    pub grid_kind: Option<GridKind>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub cap: Option<u64>,
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = read(path)?;
    let file: ConfigFile = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    check_schema(path, file.schema)?;
    Ok(file)
}

/// Grid values must be finite, nonnegative and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Config("grid is empty".into()));
    }
    for (i, &v) in grid.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::Config(format!(
                "grid value #{} = {v} must be finite and >= 0",
                i + 1
            )));
        }
        if i > 0 && v <= grid[i - 1] {
            return Err(CliError::Config(format!(
                "grid must be strictly increasing: #{} = {v} follows {}",
                i + 1,
                grid[i - 1]
            )));
        }
    }
    Ok(())
}
