//! Job files: TOML, strict about unknown keys, with a canonical serialized
//! form.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use tasep_core::bethe::SpectralParams;
use tasep_core::state::{validate_state, ParticleState, RateTable};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub rates: Vec<f64>,
    pub time: f64,
    pub initial: StateSpec,
    #[serde(default)]
    pub targets: Targets,
    #[serde(default, skip_serializing_if = "SpectralSpec::is_default")]
    pub spectral: SpectralSpec,
    #[serde(default, skip_serializing_if = "OutputSpec::is_default")]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub positions: Vec<i64>,
    pub species: Vec<usize>,
}

impl StateSpec {
    pub fn to_state(&self) -> ParticleState {
        ParticleState::new(self.positions.clone(), self.species.clone())
    }
}

impl From<&ParticleState> for StateSpec {
    fn from(s: &ParticleState) -> Self {
        Self {
            positions: s.positions.clone(),
            species: s.species.clone(),
        }
    }
}

/// `"window"` or an explicit list of states.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Targets {
    #[default]
    Window,
    List(Vec<StateSpec>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawTargets {
    Keyword(String),
    List(Vec<StateSpec>),
}

impl Serialize for Targets {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Targets::Window => s.serialize_str("window"),
            Targets::List(list) => list.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Targets {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match RawTargets::deserialize(d)? {
            RawTargets::Keyword(k) if k == "window" => Ok(Targets::Window),
            RawTargets::Keyword(k) => Err(serde::de::Error::custom(format!(
                "targets must be \"window\" or a list of states, got {k:?}"
            ))),
            RawTargets::List(list) => Ok(Targets::List(list)),
        }
    }
}

/// Overrides of the spectral defaults; absent keys keep the default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_per_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adapt_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_large_n: Option<bool>,
}

impl SpectralSpec {
    fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    /// Written to stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl OutputSpec {
    fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

/// A config resolved into core types and checked.
#[derive(Debug, Clone)]
pub struct Job {
    pub rates: RateTable,
    pub time: f64,
    pub initial: ParticleState,
    /// `None` means the oracle window.
    pub targets: Option<Vec<ParticleState>>,
    pub params: SpectralParams,
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text: fixed key order, defaults omitted.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("config types always serialize")
    }

    pub fn resolve(&self) -> Result<Job, CliError> {
        let rates = RateTable::new(self.rates.clone())?;
        if !self.time.is_finite() || self.time < 0.0 {
            return Err(CliError::Config(format!(
                "time must be finite and >= 0, got {}",
                self.time
            )));
        }
        let initial = self.initial.to_state();
        validate_state(&initial, &rates)?;
        let targets = match &self.targets {
            Targets::Window => None,
            Targets::List(list) => {
                let states: Vec<ParticleState> = list.iter().map(StateSpec::to_state).collect();
                for s in &states {
                    validate_state(s, &rates)?;
                }
                Some(states)
            }
        };
        let mut params = SpectralParams::for_rates(&rates);
        let sp = &self.spectral;
        if let Some(r) = sp.radius {
            params.radius = r;
        }
        if let Some(m) = sp.nodes_per_dim {
            params.nodes_per_dim = m;
        }
        if let Some(tol) = sp.adapt_tol {
            params.adapt_tol = tol;
        }
        if let Some(m) = sp.max_nodes {
            params.max_nodes = m;
        }
        if let Some(flag) = sp.allow_large_n {
            params.allow_large_n = flag;
        }
        params.validate(&rates, self.time)?;
        Ok(Job {
            rates,
            time: self.time,
            initial,
            targets,
            params,
        })
    }
}
