//! Inverse defect prediction at method level.
//!
//! The pipeline extracts per-method metrics from Java-like sources
//! ([`parser`]), turns them into binary items ([`discretize`]), rebalances
//! the training data ([`balance`]), mines association rules whose consequent
//! is `NotFaulty` ([`mining`]) and combines the most confident rules into a
//! classifier that marks methods as low fault risk ([`classifier`]).
//! [`evaluation`] runs within-project cross-validation and cross-project
//! prediction over labelled datasets ([`dataset`]).

pub mod balance;
pub mod classifier;
pub mod config;
pub mod dataset;
pub mod discretize;
pub mod evaluation;
pub mod items;
pub mod metric;
pub mod mining;
pub mod parser;
pub mod pipeline;
pub mod synthetic;

pub use balance::{balance, BalanceConfig, BalanceError, BalanceOutcome};
pub use classifier::{classify, rank_rules, select_top_n, LowRiskClassifier, Prediction, Verdict};
pub use config::PipelineConfig;
pub use dataset::{attach_labels, MethodRecord, ProjectDataset};
pub use discretize::{apply_schema, compute_tertiles, fit_schema, ItemSchema};
pub use evaluation::{compute_report, cross_project_eval, stratified_folds, within_project_eval, EvaluationReport};
pub use items::{Instance, ItemId, ItemSet, Label, Origin};
pub use metric::{CategoryId, CountMetricId, MetricVector, NumericMetricId};
pub use mining::{generate_rules, mine_frequent_antecedents, AssociationRule, ItemsetCount};
pub use pipeline::{train, Error, TrainOutcome};
