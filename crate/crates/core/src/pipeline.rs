//! Training: fit schema, discretize, rebalance, mine, rank and select.

use thiserror::Error;

use crate::balance::{balance, BalanceError};
use crate::classifier::{rank_rules, select_top_n, ClassifierError, LowRiskClassifier, ModelFormatError};
use crate::config::{ConfigError, PipelineConfig};
use crate::dataset::{DatasetError, MethodRecord};
use crate::discretize::{apply_all, fit_schema, FitError, SchemaFormatError};
use crate::evaluation::EvaluationError;
use crate::items::Instance;
use crate::mining::{mine_rules, AssociationRule, MiningError};
use crate::parser::ParseError;

/// Any pipeline failure, tagged with the stage it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("parse: {0}")]
    Parse(#[from] ParseError),
    #[error("dataset: {0}")]
    Dataset(#[from] DatasetError),
    #[error("discretize: {0}")]
    Discretize(#[from] FitError),
    #[error("discretize: {0}")]
    Schema(#[from] SchemaFormatError),
    #[error("balance: {0}")]
    Balance(#[from] BalanceError),
    #[error("mine: {0}")]
    Mining(#[from] MiningError),
    #[error("select: {0}")]
    Classifier(#[from] ClassifierError),
    #[error("model: {0}")]
    Model(#[from] ModelFormatError),
    #[error("evaluate: {0}")]
    Evaluation(#[from] EvaluationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceSummary {
    pub n_synthetic: usize,
    pub n_removed: usize,
    pub n_instances: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub classifier: LowRiskClassifier,
    /// Every mined rule in rank order; the classifier holds a prefix.
    pub ranked: Vec<AssociationRule>,
    /// `None` when balancing was skipped.
    pub balance: Option<BalanceSummary>,
    pub warnings: Vec<String>,
}

/// Train with the config's SMOTE seed.
pub fn train(records: &[MethodRecord], config: &PipelineConfig) -> Result<TrainOutcome, Error> {
    train_with_seed(records, config, config.smote_seed)
}

pub fn train_with_seed(records: &[MethodRecord], config: &PipelineConfig, smote_seed: u64) -> Result<TrainOutcome, Error> {
    config.validate()?;
    let schema = fit_schema(records)?;
    let original = apply_all(records, &schema);
    let mut warnings = Vec::new();

    let (mining_set, summary) = match skip_reason(&original, config.allow_unbalanced) {
        Some(reason) => {
            warnings.push(format!("balancing skipped: {reason}"));
            (original.clone(), None)
        }
        None => {
            let out = balance(&original, &config.balance_config_with_seed(smote_seed))?;
            let summary = BalanceSummary {
                n_synthetic: out.n_synthetic,
                n_removed: out.n_removed,
                n_instances: out.instances.len(),
            };
            (out.instances, Some(summary))
        }
    };

    let rules = mine_rules(&mining_set, &config.mining_params())?;
    let ranked = rank_rules(rules)?;
    let classifier = select_top_n(&schema, &ranked, &original, config.selection_threshold)?;
    if classifier.n() == 0 {
        warnings.push(format!(
            "no rule satisfies the selection threshold {} ({} candidate rules)",
            config.selection_threshold,
            ranked.len()
        ));
    }
    Ok(TrainOutcome {
        classifier,
        ranked,
        balance: summary,
        warnings,
    })
}

/// An absent class cannot be oversampled and is skipped. A single minority
/// method is skipped only if allowed; otherwise balancing reports the error.
fn skip_reason(original: &[Instance], allow_unbalanced: bool) -> Option<String> {
    let n_faulty = original.iter().filter(|i| i.label.is_faulty()).count();
    let n_clean = original.len() - n_faulty;
    if n_faulty == 0 || n_clean == 0 {
        let which = if n_faulty == 0 { "faulty" } else { "non-faulty" };
        Some(format!("training data has no {which} methods"))
    } else if allow_unbalanced && n_faulty.min(n_clean) < 2 && n_faulty != n_clean {
        Some("training data has a single minority method".to_string())
    } else {
        None
    }
}
