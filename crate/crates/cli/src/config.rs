use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use bipartite_otoc::models::{HamiltonianSpec, ModelKind, DEFAULT_CLUSTER_TOL, MAX_CHAIN_SITES};
use bipartite_otoc::montecarlo::EnsembleKind;
use bipartite_otoc::{BipartiteDims, Factor};
use serde::{Deserialize, Serialize};

/// Raised for configuration problems; maps to exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: &str, message: impl std::fmt::Display) -> anyhow::Error {
    ConfigError(format!("{field}: {message}")).into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// `G(t)` on a time grid.
    OtocCurve,
    /// Haar / NRC / NRC⁺ / exact long-time averages.
    Estimates,
    /// Ensemble sampling of the commutator OTOC.
    Sample,
    /// Entropy production of the reduced dynamics over random pure states.
    Entropy,
    /// Reduced-channel diagnostics on a time grid.
    Channel,
    /// Estimate table over chain lengths for the three reference models.
    #[value(name = "figure1")]
    #[serde(rename = "figure1")]
    Figure1,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
}

/// Where to cut the chain: either the number of leading sites or `d_A` directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cut {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites_a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_a: Option<usize>,
}

impl Default for Cut {
    fn default() -> Self {
        Self {
            n_sites_a: Some(1),
            d_a: None,
        }
    }
}

impl Cut {
    pub fn resolve(&self, d: usize) -> anyhow::Result<BipartiteDims> {
        let d_a = match (self.n_sites_a, self.d_a) {
            (Some(n), None) => {
                if n >= usize::BITS as usize {
                    return Err(invalid("cut.n_sites_a", format!("{n} sites is too many")));
                }
                1usize << n
            }
            (None, Some(d_a)) => d_a,
            _ => return Err(invalid("cut", "set exactly one of n_sites_a and d_a")),
        };
        if d_a == 0 || !d.is_multiple_of(d_a) {
            return Err(invalid(
                "cut",
                format!("d_A = {d_a} does not divide the total dimension {d}"),
            ));
        }
        Ok(BipartiteDims::new(d_a, d / d_a)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    /// Explicit times; overrides the uniform grid when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<f64>>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_min: 0.0,
            t_max: 20.0,
            n_points: 201,
            list: None,
        }
    }
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        if let Some(list) = &self.list {
            return list.clone();
        }
        if self.n_points == 1 {
            return vec![self.t_min];
        }
        let step = (self.t_max - self.t_min) / (self.n_points - 1) as f64;
        (0..self.n_points).map(|k| self.t_min + step * k as f64).collect()
    }

    fn validate(&self) -> anyhow::Result<()> {
        if let Some(list) = &self.list {
            if list.is_empty() {
                return Err(invalid("times.list", "must not be empty"));
            }
            if list.iter().any(|t| !t.is_finite()) {
                return Err(invalid("times.list", "entries must be finite"));
            }
            if let Some(k) = list.windows(2).position(|w| w[1] <= w[0]) {
                return Err(invalid(
                    "times.list",
                    format!("not strictly increasing at entry {}", k + 1),
                ));
            }
            return Ok(());
        }
        if self.n_points == 0 {
            return Err(invalid("times.n_points", "must be ≥ 1"));
        }
        if !(self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(invalid("times", "t_min and t_max must be finite"));
        }
        if self.n_points > 1 && self.t_max <= self.t_min {
            return Err(invalid("times", "t_max must exceed t_min"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub kind: EnsembleKind,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            kind: EnsembleKind::HaarLocal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative clustering tolerance for energy levels.
    pub tol_level: f64,
    /// Relative clustering tolerance for energy gaps.
    pub tol_gap: f64,
    /// Slack for the ordering checks.
    pub eq_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_level: DEFAULT_CLUSTER_TOL,
            tol_gap: DEFAULT_CLUSTER_TOL,
            eq_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Figure1Config {
    pub n_values: Vec<usize>,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Self {
            n_values: vec![4, 5, 6, 7, 8],
        }
    }
}

/// Everything a run depends on. The file format mirrors these fields one to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub stream_id: u64,
    pub n_samples: usize,
    /// Evolution time for the single-time commands (`sample`, `entropy`).
    pub time: f64,
    /// Inverse temperature for `otoc-curve`.
    pub beta: f64,
    /// Factor kept by the reduced dynamics; the smaller one when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep: Option<Factor>,
    /// Deviation thresholds for concentration and Markov bounds.
    pub epsilons: Vec<f64>,
    /// Entanglement-deficit percentiles at which the equilibration bound is evaluated.
    pub percentiles: Vec<f64>,
    pub model: HamiltonianSpec,
    pub cut: Cut,
    pub times: TimeGrid,
    pub ensemble: EnsembleConfig,
    pub tolerances: Tolerances,
    pub figure1: Figure1Config,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Estimates,
            seed: 0,
            stream_id: 0,
            n_samples: 10_000,
            time: 1.0,
            beta: 0.0,
            keep: None,
            epsilons: vec![0.25, 0.5, 1.0],
            percentiles: vec![50.0, 90.0, 99.0],
            model: HamiltonianSpec::tfim(6, -1.05, 0.5),
            cut: Cut::default(),
            times: TimeGrid::default(),
            ensemble: EnsembleConfig::default(),
            tolerances: Tolerances::default(),
            figure1: Figure1Config::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn for_command(command: Command) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    /// Parses a TOML config. A `command` key, if present, must agree with `command`.
    pub fn from_toml(text: &str, command: Command) -> anyhow::Result<Self> {
        let raw: toml::Table = toml::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        if raw.contains_key("command") && cfg.command != command {
            bail!(ConfigError(format!(
                "command: config file is for `{}` but `{}` was requested",
                command_name(cfg.command),
                command_name(command)
            )));
        }
        cfg.command = command;
        Ok(cfg)
    }

    pub fn load(path: &Path, command: Command) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("config {}: {e}", path.display())))?;
        Self::from_toml(&text, command).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Checks every field that can be checked without building the model.
    pub fn validate(&self) -> anyhow::Result<()> {
        // figure1 builds its own models and cuts.
        if self.command != Command::Figure1 {
            self.model.validate().map_err(|e| invalid("model", e))?;
            if self.model.kind != ModelKind::CustomMatrix {
                self.cut.resolve(1usize << self.model.n_sites)?;
            } else if self.cut.n_sites_a.is_some() == self.cut.d_a.is_some() {
                return Err(invalid("cut", "set exactly one of n_sites_a and d_a"));
            }
        }
        self.times.validate()?;
        if self.n_samples == 0 {
            return Err(invalid("n_samples", "must be ≥ 1"));
        }
        if !self.time.is_finite() {
            return Err(invalid("time", "must be finite"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta", "must be finite and ≥ 0"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(invalid("epsilons", format!("{e} is not a positive finite number")));
        }
        if let Some(p) = self.percentiles.iter().find(|p| !(0.0..=100.0).contains(*p)) {
            return Err(invalid("percentiles", format!("{p} is outside [0, 100]")));
        }
        let t = &self.tolerances;
        for (name, v) in [("tol_level", t.tol_level), ("tol_gap", t.tol_gap), ("eq_tol", t.eq_tol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(&format!("tolerances.{name}"), "must be finite and ≥ 0"));
            }
        }
        if self.command == Command::Figure1 {
            if self.figure1.n_values.is_empty() {
                return Err(invalid("figure1.n_values", "must not be empty"));
            }
            if let Some(n) = self
                .figure1
                .n_values
                .iter()
                .find(|n| !(2..=MAX_CHAIN_SITES).contains(*n))
            {
                return Err(invalid(
                    "figure1.n_values",
                    format!("{n} outside 2..={MAX_CHAIN_SITES}"),
                ));
            }
        }
        Ok(())
    }
}

pub fn command_name(c: Command) -> &'static str {
    match c {
        Command::OtocCurve => "otoc-curve",
        Command::Estimates => "estimates",
        Command::Sample => "sample",
        Command::Entropy => "entropy",
        Command::Channel => "channel",
        Command::Figure1 => "figure1",
    }
}
