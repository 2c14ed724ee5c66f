//! Run configuration: one TOML document with a section per module.
//!
//! ```toml
//! experiment = "verify"        # optional; must match the subcommand
//! seed = 7
//!
//! [grid]
//! kind = "circle"
//! n = 512
//!
//! [embedding]
//! kind = "canonical-circle"
//!
//! [family]
//! name = "von-mises"
//! kappas = [0.5, 2.0, 8.0]
//!
//! [budget]
//! max_evaluations = 50000000
//! ```
//!
//! Sections left out take their defaults. Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use ucp_core::embed::{Budget, EmbeddingSpec};
use ucp_core::grid::GridSpec;
use ucp_core::lab::{ConstantsOptions, DegenerateConfig, FamilySpec, InverseConfig, ScalingConfig, SweepOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Constants,
    Verify,
    Scaling,
    Inverse,
    Degenerate,
    Disconnected,
    N2check,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Constants,
        Experiment::Verify,
        Experiment::Scaling,
        Experiment::Inverse,
        Experiment::Degenerate,
        Experiment::Disconnected,
        Experiment::N2check,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::Constants => "constants",
            Experiment::Verify => "verify",
            Experiment::Scaling => "scaling",
            Experiment::Inverse => "inverse",
            Experiment::Degenerate => "degenerate",
            Experiment::Disconnected => "disconnected",
            Experiment::N2check => "n2check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown experiment '{0}' (expected one of constants, verify, scaling, inverse, degenerate, disconnected, n2check)")]
    UnknownExperiment(String),
    #[error("cannot read config {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("config sets experiment '{config}' but the command is '{command}'")]
    ExperimentMismatch { config: String, command: String },
    #[error("experiment '{experiment}' needs a [{section}] section")]
    MissingSection { experiment: Experiment, section: &'static str },
}

/// Everything a run depends on. The canonical JSON form of this value is
/// hashed into the run id, so two runs with equal configs are comparable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub seed: u64,
    /// Not part of the hash: where outputs go does not change them.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub embedding: Option<EmbeddingSpec>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub sweep: SweepOptions,
    #[serde(default)]
    pub constants: ConstantsOptions,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub inverse: InverseConfig,
    #[serde(default)]
    pub degenerate: DegenerateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Malformed(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Canonical serialization: JSON with sorted keys.
    pub fn canonical_json(&self) -> String {
        serde_json::to_value(self).expect("config serializes").to_string()
    }

    /// Hex SHA-256 of [`RunConfig::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// First 16 hex digits of the hash.
    pub fn run_id(&self) -> String {
        self.hash()[..16].to_string()
    }

    pub fn require_grid(&self, experiment: Experiment) -> Result<&GridSpec, ConfigError> {
        self.grid.as_ref().ok_or(ConfigError::MissingSection { experiment, section: "grid" })
    }

    pub fn require_embedding(&self, experiment: Experiment) -> Result<&EmbeddingSpec, ConfigError> {
        self.embedding.as_ref().ok_or(ConfigError::MissingSection {
            experiment,
            section: "embedding",
        })
    }

    pub fn require_family(&self, experiment: Experiment) -> Result<&FamilySpec, ConfigError> {
        self.family.as_ref().ok_or(ConfigError::MissingSection { experiment, section: "family" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg = RunConfig::parse(
            r#"
            experiment = "constants"
            seed = 3
            [grid]
            kind = "circle"
            n = 256
            [embedding]
            kind = "scaled-circle"
            L = 8.0
            [family]
            name = "von-mises"
            kappas = [1.0, 2.0]
            [budget]
            n_samples = 10
            [scaling]
            L_list = [4.0, 8.0, 16.0, 32.0, 64.0]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, Some(Experiment::Constants));
        assert_eq!(cfg.grid, Some(GridSpec::Circle { n: 256 }));
        assert_eq!(cfg.embedding, Some(EmbeddingSpec::ScaledCircle { scale: 8.0 }));
        assert_eq!(cfg.budget.n_samples, 10);
        assert_eq!(cfg.budget.n_pairs, Budget::default().n_pairs);
        assert_eq!(cfg.scaling.scales.len(), 5);
    }

    #[test]
    fn unknown_keys_and_experiments_are_rejected() {
        assert!(matches!(RunConfig::parse("sede = 1"), Err(ConfigError::Malformed(_))));
        assert!(matches!(RunConfig::parse("[grid]\nkind = \"torus\""), Err(ConfigError::Malformed(_))));
        assert!(matches!(RunConfig::parse("experiment = \"plot\""), Err(ConfigError::Malformed(_))));
        assert_eq!("plot".parse::<Experiment>(), Err(ConfigError::UnknownExperiment("plot".into())));
    }

    #[test]
    fn hash_ignores_output_dir_and_tracks_seed() {
        let a = RunConfig::parse("seed = 1\noutput_dir = \"x\"").unwrap();
        let b = RunConfig::parse("seed = 1\noutput_dir = \"y\"").unwrap();
        let c = RunConfig::parse("seed = 2").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
        assert_eq!(a.run_id(), a.hash()[..16]);
    }

    #[test]
    fn every_experiment_round_trips() {
        for e in Experiment::ALL {
            assert_eq!(e.id().parse::<Experiment>().unwrap(), e);
        }
    }
}
