use std::str::FromStr;

use qcph_core::regress::GbtParams;
use qcph_core::{AtomSet, DescriptorConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid config JSON: {0}")]
    Json(String),
    #[error("unknown atom set {0:?}")]
    UnknownAtomSet(String),
    #[error("{0}")]
    Invalid(String),
}

/// Everything a run needs besides its input files. Missing keys take the
/// defaults below; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Atom-set tags; all seventeen in their fixed order by default.
    pub atom_sets: Vec<String>,
    /// Truncation scale of the Rips filtration, Å.
    pub max_filtration: f64,
    pub betti_bins: usize,
    pub max_dim: usize,
    pub gbt: GbtParams,
    /// Seed of the cross-validation fold shuffles and of `verify`.
    pub seed: u64,
    pub folds: usize,
    pub repeats: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            atom_sets: AtomSet::ALL.iter().map(|s| s.tag().to_string()).collect(),
            max_filtration: 10.0,
            betti_bins: 100,
            max_dim: 3,
            gbt: GbtParams::default(),
            seed: 0,
            folds: 5,
            repeats: 5,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn atom_sets(&self) -> Result<Vec<AtomSet>, ConfigError> {
        self.atom_sets
            .iter()
            .map(|t| AtomSet::from_str(t).map_err(|_| ConfigError::UnknownAtomSet(t.clone())))
            .collect()
    }

    pub fn descriptor_config(&self) -> Result<DescriptorConfig, ConfigError> {
        Ok(DescriptorConfig {
            atom_sets: self.atom_sets()?,
            max_filtration: self.max_filtration,
            bins: self.betti_bins,
            max_dim: self.max_dim,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.descriptor_config()?
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.gbt.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.folds < 2 {
            return Err(ConfigError::Invalid("folds must be at least 2".into()));
        }
        if self.repeats == 0 {
            return Err(ConfigError::Invalid("repeats must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.descriptor_config().unwrap().feature_len(), 15987);
    }

    #[test]
    fn partial_gbt_block() {
        let cfg = RunConfig::from_json(r#"{"gbt":{"n_estimators":10000,"learning_rate":0.001}}"#).unwrap();
        assert_eq!(cfg.gbt, GbtParams::full_scale());
    }

    #[test]
    fn rejections() {
        assert_eq!(
            RunConfig::from_json(r#"{"atom_sets":["Pb","Xe"]}"#),
            Err(ConfigError::UnknownAtomSet("Xe".into()))
        );
        assert!(matches!(RunConfig::from_json(r#"{"betti_bins":0}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_json(r#"{"max_dim":4}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_json(r#"{"gbt":{"subsample":0}}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_json(r#"{"folds":1}"#), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::from_json(r#"{"bins":3}"#), Err(ConfigError::Json(_))));
    }
}
