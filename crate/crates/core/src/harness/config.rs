use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::io::{parse_json, read_text};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    SingleItem,
    BalancedXos,
    CorreaCristi,
    CustomPrices,
}

impl MechanismKind {
    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::SingleItem => "single-item",
            MechanismKind::BalancedXos => "balanced-xos",
            MechanismKind::CorreaCristi => "correa-cristi",
            MechanismKind::CustomPrices => "custom-prices",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// An experiment description, read from a JSON file. Relative paths are
/// resolved against the file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub instance: Option<PathBuf>,
    /// Instances for `suite`.
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    #[serde(default)]
    pub mechanism: Option<MechanismKind>,
    /// Mechanisms for `suite`.
    #[serde(default)]
    pub mechanisms: Vec<MechanismKind>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Arrival order; identity when absent.
    #[serde(default)]
    pub order: Option<Vec<usize>>,
    /// Item prices for `custom-prices` and `balance-check`.
    #[serde(default)]
    pub prices: Option<Vec<f64>>,
    /// Score generator file for `correa-cristi` and `mirror-check`.
    #[serde(default)]
    pub irsg: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,

    /// `balance-check` parameters.
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,

    /// `subgood` parameters: which support valuation and which items.
    #[serde(default)]
    pub bidder: usize,
    #[serde(default)]
    pub support: usize,
    #[serde(default)]
    pub items: Option<Vec<usize>>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,

    /// `fixed-point` parameters. `epsilon` is the grid step; when absent it
    /// is derived from `target_epsilon`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub target_epsilon: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_resolution() -> usize {
    20
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = parse_json(path, &read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        cfg.check_files()?;
        Ok(cfg)
    }

    /// Fails with an I/O error naming the first missing input. Suite
    /// instances are left to fail per row.
    pub fn check_files(&self) -> Result<()> {
        let inputs = self.instance.iter().chain(&self.irsg);
        for p in inputs {
            if !p.is_file() {
                return Err(Error::Io {
                    path: p.clone(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
                });
            }
        }
        Ok(())
    }

    /// Makes every relative path relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.instance.iter_mut().for_each(fix);
        self.instances.iter_mut().for_each(fix);
        self.irsg.iter_mut().for_each(fix);
        self.output.iter_mut().for_each(fix);
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::MonteCarlo && self.samples == Some(0) {
            return Err(Error::Parameter(
                "monte-carlo mode needs a sample count of at least 1".into(),
            ));
        }
        if let Some(p) = &self.prices {
            if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::Parameter(format!(
                    "prices {p:?} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    pub fn instance_path(&self) -> Result<&Path> {
        self.instance
            .as_deref()
            .ok_or_else(|| Error::Parameter("config names no instance".into()))
    }

    /// Monte Carlo sample count, 100 000 unless configured.
    pub fn samples_or_default(&self) -> u64 {
        self.samples.unwrap_or(100_000)
    }
}
