use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Spectral,
    Stability,
    Merging,
    Bounds,
    Simulate,
    ScanPermutations,
    WaveProfile,
    Scaling,
}

impl Analysis {
    pub const ALL: [Analysis; 8] = [
        Analysis::Spectral,
        Analysis::Stability,
        Analysis::Merging,
        Analysis::Bounds,
        Analysis::Simulate,
        Analysis::ScanPermutations,
        Analysis::WaveProfile,
        Analysis::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Spectral => "spectral",
            Analysis::Stability => "stability",
            Analysis::Merging => "merging",
            Analysis::Bounds => "bounds",
            Analysis::Simulate => "simulate",
            Analysis::ScanPermutations => "scan-permutations",
            Analysis::WaveProfile => "wave-profile",
            Analysis::Scaling => "scaling",
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Analysis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        Analysis::ALL
            .into_iter()
            .find(|a| a.name() == s || (s == "scan" && *a == Analysis::ScanPermutations))
            .ok_or_else(|| {
                let known: Vec<_> = Analysis::ALL.iter().map(|a| a.name()).collect();
                CliError::ConfigInvalid(format!("unknown analysis '{s}' (known: {})", known.join(", ")))
            })
    }
}

/// A named map (`identity`, `shift:<s>`, `random:<seed>`, a JSON file) or an
/// explicit forward vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bijection {
    Explicit(Vec<usize>),
    Named(String),
}

impl FromStr for Bijection {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if s.starts_with('[') {
            serde_json::from_str(s)
                .map(Bijection::Explicit)
                .map_err(|e| CliError::ConfigInvalid(format!("bijection vector: {e}")))
        } else {
            Ok(Bijection::Named(s.to_string()))
        }
    }
}

/// One experiment: every field has a default, a TOML document may set any of
/// them, and command-line flags override the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Zoo name or path to a kernel document.
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub bijection: Option<Bijection>,
    pub analyses: Vec<Analysis>,
    /// Not part of the recorded config, so reports do not depend on where they are written.
    #[serde(skip_serializing)]
    pub output: PathBuf,
    pub seed: u64,
    /// Merging threshold.
    pub epsilon: f64,
    pub metric: String,
    pub max_steps: u64,
    /// Largest `n` in the wave-bound dominance check.
    pub bound_horizon: u64,
    pub start: usize,
    pub steps: u64,
    pub trials: u64,
    pub samples: u64,
    pub burn_in: u64,
    pub stride: Option<u64>,
    pub count: usize,
    pub sizes: Vec<usize>,
    pub eta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: "circle".into(),
            params: BTreeMap::new(),
            bijection: None,
            analyses: vec![Analysis::Spectral, Analysis::Stability, Analysis::Merging, Analysis::Bounds],
            output: PathBuf::from("out"),
            seed: 0,
            epsilon: 0.25,
            metric: "relative-sup".into(),
            max_steps: 5_000,
            bound_horizon: 50,
            start: 0,
            steps: 30,
            trials: 100_000,
            samples: 0,
            burn_in: 1_000,
            stride: None,
            count: 50,
            sizes: Vec::new(),
            eta: (-1.0f64).exp(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(CliError::ConfigInvalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(CliError::ConfigInvalid(format!("eta must be positive, got {}", self.eta)));
        }
        if self.metric.parse::<wavechain::Metric>().is_err() {
            return Err(CliError::ConfigInvalid(format!(
                "unknown metric '{}' (use tv, relative-sup or chi-square)",
                self.metric
            )));
        }
        if self.model.trim().is_empty() {
            return Err(CliError::ConfigInvalid("model is empty".into()));
        }
        if self.stride == Some(0) {
            return Err(CliError::ConfigInvalid("stride must be positive".into()));
        }
        Ok(())
    }
}

/// `k=v` with a numeric value.
pub fn parse_param(s: &str) -> Result<(String, f64), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::ConfigInvalid(format!("parameter '{s}' is not of the form k=v")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| CliError::ConfigInvalid(format!("parameter '{k}' needs a numeric value, got '{v}'")))?;
    Ok((k.trim().to_string(), v))
}

pub fn parse_analyses(s: &str) -> Result<Vec<Analysis>, CliError> {
    let mut out: Vec<Analysis> = s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}
