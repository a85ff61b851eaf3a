//! Pipeline configuration: every threshold and seed in one flat TOML table.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::balance::BalanceConfig;
use crate::mining::MiningParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub min_support: f64,
    pub min_confidence: f64,
    pub max_antecedent_len: usize,
    pub selection_threshold: f64,
    pub cv_folds: usize,
    /// SMOTE target minority:majority ratio.
    pub smote_ratio: f64,
    pub smote_k: usize,
    pub undersample: bool,
    pub smote_seed: u64,
    pub fold_seed: u64,
    /// Train without balancing when the minority class is too small to
    /// oversample, instead of failing.
    pub allow_unbalanced: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_support: 0.05,
            min_confidence: 0.9,
            max_antecedent_len: 4,
            selection_threshold: 0.02,
            cv_folds: 10,
            smote_ratio: 1.0,
            smote_k: 5,
            undersample: false,
            smote_seed: 42,
            fold_seed: 42,
            allow_unbalanced: false,
        }
    }
}

fn fraction(key: &'static str, v: f64, allow_zero: bool) -> Result<(), ConfigError> {
    let ok = if allow_zero {
        (0.0..=1.0).contains(&v)
    } else {
        v > 0.0 && v <= 1.0
    };
    if ok {
        Ok(())
    } else {
        let range = if allow_zero { "[0, 1]" } else { "(0, 1]" };
        Err(ConfigError::Invalid {
            key,
            reason: format!("{v} is outside {range}"),
        })
    }
}

impl PipelineConfig {
    pub const KEYS: [&'static str; 11] = [
        "min_support",
        "min_confidence",
        "max_antecedent_len",
        "selection_threshold",
        "cv_folds",
        "smote_ratio",
        "smote_k",
        "undersample",
        "smote_seed",
        "fold_seed",
        "allow_unbalanced",
    ];

    pub fn validate(&self) -> Result<(), ConfigError> {
        fraction("min_support", self.min_support, false)?;
        fraction("min_confidence", self.min_confidence, true)?;
        fraction("selection_threshold", self.selection_threshold, true)?;
        fraction("smote_ratio", self.smote_ratio, false)?;
        if self.max_antecedent_len == 0 || self.max_antecedent_len > 8 {
            return Err(ConfigError::Invalid {
                key: "max_antecedent_len",
                reason: format!("{} is outside 1..=8", self.max_antecedent_len),
            });
        }
        if self.cv_folds < 2 {
            return Err(ConfigError::Invalid {
                key: "cv_folds",
                reason: "need at least 2 folds".into(),
            });
        }
        if self.smote_k == 0 {
            return Err(ConfigError::Invalid {
                key: "smote_k",
                reason: "need at least 1 neighbor".into(),
            });
        }
        Ok(())
    }

    pub fn mining_params(&self) -> MiningParams {
        MiningParams {
            min_support: self.min_support,
            min_confidence: self.min_confidence,
            max_len: self.max_antecedent_len,
        }
    }

    pub fn balance_config(&self) -> BalanceConfig {
        self.balance_config_with_seed(self.smote_seed)
    }

    pub fn balance_config_with_seed(&self, seed: u64) -> BalanceConfig {
        BalanceConfig {
            target_ratio: self.smote_ratio,
            k_neighbors: self.smote_k,
            undersample_majority: self.undersample,
            rng_seed: seed,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// The config as `# key = value` lines, for embedding in CSV outputs.
    pub fn comment_lines(&self) -> String {
        self.to_toml().lines().map(|l| format!("# {l}\n")).collect()
    }

    /// Set one key from its textual value, as given on a command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let mut table: toml::Table = toml::from_str(&self.to_toml())?;
        let key = Self::KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| ConfigError::Invalid {
                key: "?",
                reason: format!("unknown key `{key}`"),
            })?;
        let bad = |reason: String| ConfigError::Invalid { key, reason };
        let parsed = match table.get(*key) {
            Some(toml::Value::Float(_)) => toml::Value::Float(value.parse().map_err(|e| bad(format!("{value}: {e}")))?),
            Some(toml::Value::Integer(_)) => {
                toml::Value::Integer(value.parse().map_err(|e| bad(format!("{value}: {e}")))?)
            }
            Some(toml::Value::Boolean(_)) => {
                toml::Value::Boolean(value.parse().map_err(|e| bad(format!("{value}: {e}")))?)
            }
            _ => unreachable!("config keys are scalars"),
        };
        table.insert(key.to_string(), parsed);
        let updated: PipelineConfig = toml::Value::Table(table).try_into()?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_roundtrip() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = PipelineConfig::from_toml("min_support = 0.1\nsmote_seed = 7\n").unwrap();
        assert_eq!(cfg.min_support, 0.1);
        assert_eq!(cfg.smote_seed, 7);
        assert_eq!(cfg.cv_folds, 10);
    }

    #[test]
    fn rejects_unknown_and_out_of_range() {
        assert!(matches!(PipelineConfig::from_toml("bogus = 1"), Err(ConfigError::Parse(_))));
        assert!(matches!(
            PipelineConfig::from_toml("min_confidence = 1.5"),
            Err(ConfigError::Invalid { key: "min_confidence", .. })
        ));
        assert!(matches!(
            PipelineConfig::from_toml("cv_folds = 1"),
            Err(ConfigError::Invalid { key: "cv_folds", .. })
        ));
    }

    #[test]
    fn set_overrides_single_keys() {
        let mut cfg = PipelineConfig::default();
        cfg.set("selection_threshold", "0.05").unwrap();
        cfg.set("undersample", "true").unwrap();
        cfg.set("cv_folds", "5").unwrap();
        assert_eq!(cfg.selection_threshold, 0.05);
        assert!(cfg.undersample);
        assert_eq!(cfg.cv_folds, 5);
        assert!(cfg.set("cv_folds", "x").is_err());
        assert!(cfg.set("nope", "1").is_err());
        assert!(cfg.set("min_support", "0").is_err());
        assert_eq!(cfg.cv_folds, 5);
    }
}
