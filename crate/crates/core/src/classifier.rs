//! The low-fault-risk classifier: the top `n` rules joined by logical or.
//!
//! Rules are ranked by confidence; `n` is the longest prefix of the ranking
//! for which the share of faulty methods among the training methods matched
//! so far never exceeds the selection threshold. The share is measured on
//! the original training data, before any rebalancing.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::dataset::MethodRecord;
use crate::discretize::{self, features, item_by_name, ItemSchema, SchemaFile, SchemaFormatError};
use crate::items::{Instance, ItemSet, Origin};
use crate::mining::AssociationRule;

pub const MODEL_FORMAT: &str = "lowfault-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("duplicate rule for antecedent {0:?}")]
    DuplicateRule(ItemSet),
    #[error("selection threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("rule selection needs the original training data, got a synthetic instance")]
    SyntheticTrainingData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    LowFaultRisk,
    NoClaim,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::LowFaultRisk => "LowFaultRisk",
            Verdict::NoClaim => "NoClaim",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub method_id: String,
    pub verdict: Verdict,
    /// 1-based rank of the first matching rule; set iff low fault risk.
    pub matched_rule: Option<usize>,
}

impl Prediction {
    pub fn is_low_risk(&self) -> bool {
        self.verdict == Verdict::LowFaultRisk
    }
}

/// Total order: confidence desc, support desc, antecedent size asc, then
/// lexicographic item ids.
pub fn rule_order(a: &AssociationRule, b: &AssociationRule) -> Ordering {
    b.cmp_confidence(a)
        .then_with(|| b.cmp_support(a))
        .then_with(|| a.antecedent.len().cmp(&b.antecedent.len()))
        .then_with(|| a.antecedent.lex_cmp(&b.antecedent))
}

pub fn rank_rules(mut rules: Vec<AssociationRule>) -> Result<Vec<AssociationRule>, ClassifierError> {
    rules.sort_by(rule_order);
    if let Some(w) = rules.windows(2).find(|w| w[0].antecedent == w[1].antecedent) {
        return Err(ClassifierError::DuplicateRule(w[0].antecedent));
    }
    Ok(rules)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowRiskClassifier {
    pub schema: ItemSchema,
    /// The selected top-`n` rules in rank order.
    pub rules: Vec<AssociationRule>,
    pub selection_threshold: f64,
    /// Size of the original training set and its faulty methods.
    pub training_methods: u64,
    pub training_faulty: u64,
    /// Training methods matched by the selected rules, and the faulty ones.
    pub training_matched: u64,
    pub training_matched_faulty: u64,
    /// Number of ranked rules the selection started from.
    pub candidate_rules: usize,
}

impl LowRiskClassifier {
    pub fn n(&self) -> usize {
        self.rules.len()
    }

    pub fn training_faulty_share(&self) -> f64 {
        share(self.training_faulty, self.training_methods)
    }

    pub fn matched_faulty_share(&self) -> f64 {
        share(self.training_matched_faulty, self.training_matched)
    }

    /// 1-based rank of the first rule whose antecedent is contained in `features`.
    pub fn first_match(&self, features: ItemSet) -> Option<usize> {
        self.rules.iter().position(|r| r.matches(features)).map(|p| p + 1)
    }

    pub fn classify_features(&self, method_id: &str, features: ItemSet) -> Prediction {
        let matched_rule = self.first_match(features);
        Prediction {
            method_id: method_id.to_string(),
            verdict: if matched_rule.is_some() {
                Verdict::LowFaultRisk
            } else {
                Verdict::NoClaim
            },
            matched_rule,
        }
    }
}

fn share(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

/// Pick the longest rule prefix whose cumulative matched-set faulty share
/// stays within `threshold`, scanning until the first violation.
pub fn select_top_n(
    schema: &ItemSchema,
    ranked: &[AssociationRule],
    original_train: &[Instance],
    threshold: f64,
) -> Result<LowRiskClassifier, ClassifierError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ClassifierError::InvalidThreshold(threshold));
    }
    if original_train.iter().any(|i| i.origin == Origin::Synthetic) {
        return Err(ClassifierError::SyntheticTrainingData);
    }

    let mut matched = vec![false; original_train.len()];
    let (mut total, mut faulty) = (0u64, 0u64);
    let mut n = 0;
    let (mut kept_total, mut kept_faulty) = (0u64, 0u64);
    for (k, rule) in ranked.iter().enumerate() {
        for (i, inst) in original_train.iter().enumerate() {
            if !matched[i] && rule.matches(inst.features) {
                matched[i] = true;
                total += 1;
                if inst.label.is_faulty() {
                    faulty += 1;
                }
            }
        }
        if share(faulty, total) > threshold {
            break;
        }
        n = k + 1;
        kept_total = total;
        kept_faulty = faulty;
    }

    Ok(LowRiskClassifier {
        schema: schema.clone(),
        rules: ranked[..n].to_vec(),
        selection_threshold: threshold,
        training_methods: original_train.len() as u64,
        training_faulty: original_train.iter().filter(|i| i.label.is_faulty()).count() as u64,
        training_matched: kept_total,
        training_matched_faulty: kept_faulty,
        candidate_rules: ranked.len(),
    })
}

/// Classify a record. The record's fault label is never consulted.
pub fn classify(record: &MethodRecord, classifier: &LowRiskClassifier) -> Prediction {
    classifier.classify_features(&record.method_id, features(record, &classifier.schema))
}

#[derive(Debug, Error)]
pub enum ModelFormatError {
    #[error("model parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("not a model file (format `{0}`)")]
    WrongFormat(String),
    #[error("unsupported model version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Schema(#[from] SchemaFormatError),
    #[error("unknown item `{0}` in rule {1}")]
    UnknownItem(String, usize),
    #[error("model: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RuleEntry {
    rank: usize,
    antecedent: Vec<String>,
    n_match: u64,
    n_match_notfaulty: u64,
    n_total: u64,
    confidence: f64,
    support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    n_rules: usize,
    candidate_rules: usize,
    selection_threshold: f64,
    training_methods: u64,
    training_faulty: u64,
    training_matched: u64,
    training_matched_faulty: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<PipelineConfig>,
    schema: SchemaFile,
    #[serde(default)]
    rules: Vec<RuleEntry>,
}

impl LowRiskClassifier {
    /// Versioned text form: provenance config, schema, then the ranked rules
    /// with their integer counts.
    pub fn to_toml(&self, config: Option<&PipelineConfig>) -> String {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            n_rules: self.rules.len(),
            candidate_rules: self.candidate_rules,
            selection_threshold: self.selection_threshold,
            training_methods: self.training_methods,
            training_faulty: self.training_faulty,
            training_matched: self.training_matched,
            training_matched_faulty: self.training_matched_faulty,
            config: config.cloned(),
            schema: self.schema.to_file(),
            rules: self
                .rules
                .iter()
                .enumerate()
                .map(|(k, r)| RuleEntry {
                    rank: k + 1,
                    antecedent: discretize::itemset_names(r.antecedent),
                    n_match: r.n_match,
                    n_match_notfaulty: r.n_match_notfaulty,
                    n_total: r.n_total,
                    confidence: r.confidence(),
                    support: r.support(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("model serializes")
    }

    /// Parse a model file; returns the embedded config too, if any.
    pub fn from_toml(text: &str) -> Result<(Self, Option<PipelineConfig>), ModelFormatError> {
        let file: ModelFile = toml::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(ModelFormatError::WrongFormat(file.format));
        }
        if file.version != MODEL_VERSION {
            return Err(ModelFormatError::UnsupportedVersion(file.version));
        }
        let schema = ItemSchema::from_file(&file.schema)?;
        let mut rules = Vec::with_capacity(file.rules.len());
        for (k, entry) in file.rules.iter().enumerate() {
            let mut antecedent = ItemSet::empty();
            for name in &entry.antecedent {
                let item = item_by_name(name)
                    .filter(|i| i.index() < discretize::N_FEATURE_ITEMS)
                    .ok_or_else(|| ModelFormatError::UnknownItem(name.clone(), k + 1))?;
                antecedent.insert(item);
            }
            if antecedent.is_empty() || entry.n_match == 0 || entry.n_match_notfaulty > entry.n_match {
                return Err(ModelFormatError::Invalid(format!("rule {} is malformed", k + 1)));
            }
            rules.push(AssociationRule {
                antecedent,
                n_match: entry.n_match,
                n_match_notfaulty: entry.n_match_notfaulty,
                n_total: entry.n_total,
            });
        }
        if rules.len() != file.n_rules {
            return Err(ModelFormatError::Invalid(format!(
                "n_rules is {} but {} rules are listed",
                file.n_rules,
                rules.len()
            )));
        }
        let classifier = LowRiskClassifier {
            schema,
            rules,
            selection_threshold: file.selection_threshold,
            training_methods: file.training_methods,
            training_faulty: file.training_faulty,
            training_matched: file.training_matched,
            training_matched_faulty: file.training_matched_faulty,
            candidate_rules: file.candidate_rules,
        };
        Ok((classifier, file.config))
    }
}

pub const RULE_COLUMNS: [&str; 7] = [
    "rank",
    "antecedent",
    "n_match",
    "n_match_notfaulty",
    "support",
    "confidence",
    "selected",
];

/// Ranked rules as CSV, antecedent items joined by `;`. The first
/// `n_selected` rules are marked as part of the classifier.
pub fn write_rules_csv<W: Write>(
    mut out: W,
    preamble: &str,
    rules: &[AssociationRule],
    n_selected: usize,
) -> std::io::Result<()> {
    out.write_all(preamble.as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RULE_COLUMNS)?;
    for (k, r) in rules.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            discretize::itemset_names(r.antecedent).join(";"),
            r.n_match.to_string(),
            r.n_match_notfaulty.to_string(),
            r.support().to_string(),
            r.confidence().to_string(),
            u8::from(k < n_selected).to_string(),
        ])?;
    }
    w.flush()
}
