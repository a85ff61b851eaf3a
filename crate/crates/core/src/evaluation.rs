//! Within-project cross-validation, cross-project prediction and the
//! coverage / risk-ratio statistics reported for both.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classifier::{classify, Prediction};
use crate::config::PipelineConfig;
use crate::dataset::{MethodRecord, ProjectDataset};
use crate::pipeline::{train_with_seed, Error};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("{k} folds requested but only {records} records")]
    TooManyFolds { k: usize, records: usize },
    #[error("{predictions} predictions for {records} records")]
    CountMismatch { predictions: usize, records: usize },
    #[error("prediction {index} is for `{prediction}` but the record is `{record}`")]
    IdMismatch {
        index: usize,
        prediction: String,
        record: String,
    },
    #[error("cross-project evaluation needs at least 2 projects, got {0}")]
    TooFewProjects(usize),
    #[error("project `{0}` appears more than once")]
    DuplicateProject(String),
    #[error("evaluated method `{0}` is also in the training data")]
    Leakage(String),
}

/// Fold index per record, aligned with the dataset's record order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    pub assignment: Vec<usize>,
}

impl FoldAssignment {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn members(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }
}

/// Shuffle faulty and non-faulty records separately, then deal faulty
/// first and non-faulty second round-robin over the folds, continuing the
/// rotation between the two groups.
pub fn stratified_folds(records: &[MethodRecord], k: usize, seed: u64) -> Result<FoldAssignment, EvaluationError> {
    if k < 2 {
        return Err(EvaluationError::TooFewFolds(k));
    }
    if k > records.len() {
        return Err(EvaluationError::TooManyFolds {
            k,
            records: records.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faulty: Vec<usize> = (0..records.len()).filter(|&i| records[i].faulty).collect();
    let mut clean: Vec<usize> = (0..records.len()).filter(|&i| !records[i].faulty).collect();
    faulty.shuffle(&mut rng);
    clean.shuffle(&mut rng);
    let mut assignment = vec![0; records.len()];
    for (pos, &i) in faulty.iter().chain(&clean).enumerate() {
        assignment[i] = pos % k;
    }
    Ok(FoldAssignment { k, seed, assignment })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Fold { project: String, fold: usize },
    Aggregate { project: String },
    CrossProject { target: String },
}

impl Scope {
    pub fn kind(&self) -> &'static str {
        match self {
            Scope::Fold { .. } => "fold",
            Scope::Aggregate { .. } => "aggregate",
            Scope::CrossProject { .. } => "cross",
        }
    }

    pub fn project(&self) -> &str {
        match self {
            Scope::Fold { project, .. } | Scope::Aggregate { project } => project,
            Scope::CrossProject { target } => target,
        }
    }

    pub fn fold(&self) -> Option<usize> {
        match self {
            Scope::Fold { fold, .. } => Some(*fold),
            _ => None,
        }
    }
}

/// "x times less likely": overall fault density over the density among
/// low-fault-risk methods, kept as an exact reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskRatio {
    Finite { num: u128, den: u128 },
    Infinite,
    NotApplicable,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RiskRatio {
    /// `(faults / size) / (lfr_faults / lfr_size)`.
    pub fn from_densities(faults: u64, size: u64, lfr_faults: u64, lfr_size: u64) -> Self {
        if lfr_size == 0 || size == 0 || faults == 0 {
            return RiskRatio::NotApplicable;
        }
        if lfr_faults == 0 {
            return RiskRatio::Infinite;
        }
        let num = faults as u128 * lfr_size as u128;
        let den = size as u128 * lfr_faults as u128;
        let g = gcd(num, den);
        RiskRatio::Finite {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            RiskRatio::Finite { num, den } => Some(*num as f64 / *den as f64),
            RiskRatio::Infinite => Some(f64::INFINITY),
            RiskRatio::NotApplicable => None,
        }
    }

    /// True if the ratio is defined and at least `bound`.
    pub fn at_least(&self, bound: f64) -> bool {
        self.value().is_some_and(|v| v >= bound)
    }

    pub fn fraction(&self) -> String {
        match self {
            RiskRatio::Finite { num, den } => format!("{num}/{den}"),
            RiskRatio::Infinite => "inf".into(),
            RiskRatio::NotApplicable => "n/a".into(),
        }
    }
}

impl fmt::Display for RiskRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) if v.is_finite() => write!(f, "{v:.3}"),
            Some(_) => f.write_str("inf"),
            None => f.write_str("n/a"),
        }
    }
}

/// Medians of per-fold percentages, carried by aggregate reports only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldMedians {
    pub pct_methods_lfr: f64,
    pub pct_sloc_lfr: f64,
    pub pct_faults_in_lfr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub scope: Scope,
    pub n_methods: u64,
    pub n_lfr_methods: u64,
    pub sloc_total: u64,
    pub sloc_lfr: u64,
    pub n_faulty: u64,
    pub n_faulty_in_lfr: u64,
    pub medians: Option<FoldMedians>,
}

fn pct(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

impl EvaluationReport {
    pub fn empty(scope: Scope) -> Self {
        EvaluationReport {
            scope,
            n_methods: 0,
            n_lfr_methods: 0,
            sloc_total: 0,
            sloc_lfr: 0,
            n_faulty: 0,
            n_faulty_in_lfr: 0,
            medians: None,
        }
    }

    pub fn pct_methods_lfr(&self) -> f64 {
        pct(self.n_lfr_methods, self.n_methods)
    }

    pub fn pct_sloc_lfr(&self) -> f64 {
        pct(self.sloc_lfr, self.sloc_total)
    }

    pub fn pct_faults_in_lfr(&self) -> f64 {
        pct(self.n_faulty_in_lfr, self.n_faulty)
    }

    pub fn risk_ratio_methods(&self) -> RiskRatio {
        RiskRatio::from_densities(self.n_faulty, self.n_methods, self.n_faulty_in_lfr, self.n_lfr_methods)
    }

    pub fn risk_ratio_sloc(&self) -> RiskRatio {
        if self.n_lfr_methods == 0 {
            return RiskRatio::NotApplicable;
        }
        RiskRatio::from_densities(self.n_faulty, self.sloc_total, self.n_faulty_in_lfr, self.sloc_lfr)
    }

    fn add_counts(&mut self, other: &EvaluationReport) {
        self.n_methods += other.n_methods;
        self.n_lfr_methods += other.n_lfr_methods;
        self.sloc_total += other.sloc_total;
        self.sloc_lfr += other.sloc_lfr;
        self.n_faulty += other.n_faulty;
        self.n_faulty_in_lfr += other.n_faulty_in_lfr;
    }
}

/// Count coverage and faults from one prediction per record, in order.
pub fn compute_report(
    scope: Scope,
    predictions: &[Prediction],
    records: &[MethodRecord],
) -> Result<EvaluationReport, EvaluationError> {
    if predictions.len() != records.len() {
        return Err(EvaluationError::CountMismatch {
            predictions: predictions.len(),
            records: records.len(),
        });
    }
    let mut report = EvaluationReport::empty(scope);
    for (index, (p, r)) in predictions.iter().zip(records).enumerate() {
        if p.method_id != r.method_id {
            return Err(EvaluationError::IdMismatch {
                index,
                prediction: p.method_id.clone(),
                record: r.method_id.clone(),
            });
        }
        let sloc = u64::from(r.sloc());
        report.n_methods += 1;
        report.sloc_total += sloc;
        report.n_faulty += u64::from(r.faulty);
        if p.is_low_risk() {
            report.n_lfr_methods += 1;
            report.sloc_lfr += sloc;
            report.n_faulty_in_lfr += u64::from(r.faulty);
        }
    }
    Ok(report)
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Pooled counts over `reports`, plus medians of their percentages.
pub fn aggregate(scope: Scope, reports: &[EvaluationReport]) -> EvaluationReport {
    let mut agg = EvaluationReport::empty(scope);
    for r in reports {
        agg.add_counts(r);
    }
    let collect = |f: fn(&EvaluationReport) -> f64| reports.iter().map(f).collect::<Vec<_>>();
    agg.medians = Some(FoldMedians {
        pct_methods_lfr: median(&collect(EvaluationReport::pct_methods_lfr)),
        pct_sloc_lfr: median(&collect(EvaluationReport::pct_sloc_lfr)),
        pct_faults_in_lfr: median(&collect(EvaluationReport::pct_faults_in_lfr)),
    });
    agg
}

#[derive(Debug, Clone)]
pub struct WithinProjectResult {
    pub folds: Vec<EvaluationReport>,
    pub aggregate: EvaluationReport,
    /// Rules selected in each fold.
    pub n_rules: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CrossProjectResult {
    pub targets: Vec<EvaluationReport>,
    pub n_rules: Vec<usize>,
    pub warnings: Vec<String>,
}

type Key<'a> = (&'a str, &'a str);

fn key(r: &MethodRecord) -> Key<'_> {
    (r.project.as_str(), r.method_id.as_str())
}

fn assert_disjoint(train: &[MethodRecord], test: &[MethodRecord]) -> Result<(), EvaluationError> {
    let seen: HashSet<Key> = train.iter().map(key).collect();
    match test.iter().find(|r| seen.contains(&key(r))) {
        Some(r) => Err(EvaluationError::Leakage(format!("{}/{}", r.project, r.method_id))),
        None => Ok(()),
    }
}

/// Derive a per-run seed from the base seed and a run index.
fn run_seed(base: u64, run: usize) -> u64 {
    base ^ (run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn train_and_report(
    train: &[MethodRecord],
    test: &[MethodRecord],
    scope: Scope,
    config: &PipelineConfig,
    smote_seed: u64,
) -> Result<(EvaluationReport, usize, Vec<String>), Error> {
    assert_disjoint(train, test)?;
    let outcome = train_with_seed(train, config, smote_seed)?;
    let predictions: Vec<Prediction> = test.iter().map(|r| classify(r, &outcome.classifier)).collect();
    let report = compute_report(scope, &predictions, test)?;
    Ok((report, outcome.classifier.n(), outcome.warnings))
}

/// Stratified k-fold cross-validation within one project.
pub fn within_project_eval(dataset: &ProjectDataset, config: &PipelineConfig) -> Result<WithinProjectResult, Error> {
    config.validate()?;
    let folds = stratified_folds(&dataset.records, config.cv_folds, config.fold_seed)?;
    let mut reports = Vec::with_capacity(folds.k);
    let mut n_rules = Vec::with_capacity(folds.k);
    let mut warnings = Vec::new();
    for fold in 0..folds.k {
        let (test, train): (Vec<_>, Vec<_>) = dataset
            .records
            .iter()
            .zip(&folds.assignment)
            .partition(|(_, f)| **f == fold);
        let test: Vec<MethodRecord> = test.into_iter().map(|(r, _)| r.clone()).collect();
        let train: Vec<MethodRecord> = train.into_iter().map(|(r, _)| r.clone()).collect();
        let scope = Scope::Fold {
            project: dataset.project.clone(),
            fold,
        };
        let (report, n, w) = train_and_report(&train, &test, scope, config, run_seed(config.smote_seed, fold))?;
        warnings.extend(w.into_iter().map(|w| format!("{} fold {fold}: {w}", dataset.project)));
        reports.push(report);
        n_rules.push(n);
    }
    let aggregate = aggregate(
        Scope::Aggregate {
            project: dataset.project.clone(),
        },
        &reports,
    );
    Ok(WithinProjectResult {
        folds: reports,
        aggregate,
        n_rules,
        warnings,
    })
}

/// Leave-one-project-out: each project is classified by a model trained on
/// all the others.
pub fn cross_project_eval(datasets: &[ProjectDataset], config: &PipelineConfig) -> Result<CrossProjectResult, Error> {
    config.validate()?;
    if datasets.len() < 2 {
        return Err(EvaluationError::TooFewProjects(datasets.len()).into());
    }
    let mut names = HashSet::new();
    for d in datasets {
        if !names.insert(d.project.as_str()) {
            return Err(EvaluationError::DuplicateProject(d.project.clone()).into());
        }
    }
    let mut targets = Vec::with_capacity(datasets.len());
    let mut n_rules = Vec::with_capacity(datasets.len());
    let mut warnings = Vec::new();
    for (t, target) in datasets.iter().enumerate() {
        let pool: Vec<MethodRecord> = datasets
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != t)
            .flat_map(|(_, d)| d.records.iter().cloned())
            .collect();
        let scope = Scope::CrossProject {
            target: target.project.clone(),
        };
        let (report, n, w) = train_and_report(&pool, &target.records, scope, config, config.smote_seed)?;
        warnings.extend(w.into_iter().map(|w| format!("target {}: {w}", target.project)));
        targets.push(report);
        n_rules.push(n);
    }
    Ok(CrossProjectResult {
        targets,
        n_rules,
        warnings,
    })
}

pub const REPORT_COLUMNS: [&str; 18] = [
    "scope",
    "project",
    "fold",
    "n_methods",
    "n_lfr_methods",
    "pct_methods_lfr",
    "sloc_total",
    "sloc_lfr",
    "pct_sloc_lfr",
    "n_faulty",
    "n_faulty_in_lfr",
    "pct_faults_in_lfr",
    "risk_ratio_methods",
    "risk_ratio_methods_exact",
    "risk_ratio_sloc",
    "risk_ratio_sloc_exact",
    "median_pct_methods_lfr",
    "median_pct_sloc_lfr",
];

fn row(r: &EvaluationReport) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
    vec![
        r.scope.kind().to_string(),
        r.scope.project().to_string(),
        r.scope.fold().map(|f| f.to_string()).unwrap_or_default(),
        r.n_methods.to_string(),
        r.n_lfr_methods.to_string(),
        format!("{:.6}", r.pct_methods_lfr()),
        r.sloc_total.to_string(),
        r.sloc_lfr.to_string(),
        format!("{:.6}", r.pct_sloc_lfr()),
        r.n_faulty.to_string(),
        r.n_faulty_in_lfr.to_string(),
        format!("{:.6}", r.pct_faults_in_lfr()),
        r.risk_ratio_methods().to_string(),
        r.risk_ratio_methods().fraction(),
        r.risk_ratio_sloc().to_string(),
        r.risk_ratio_sloc().fraction(),
        opt(r.medians.map(|m| m.pct_methods_lfr)),
        opt(r.medians.map(|m| m.pct_sloc_lfr)),
    ]
}

/// One CSV row per report; `preamble` lines (already `#`-prefixed) go first.
pub fn write_reports_csv<W: Write>(mut out: W, preamble: &str, reports: &[EvaluationReport]) -> std::io::Result<()> {
    out.write_all(preamble.as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        w.write_record(row(r))?;
    }
    w.flush()
}

/// Fixed-width table with the same counts as the CSV.
pub fn render_table(reports: &[EvaluationReport]) -> String {
    let header = [
        "scope", "project", "fold", "methods", "lfr", "%methods", "sloc", "sloc_lfr", "%sloc", "faulty", "faulty_lfr",
        "%faults", "rr_methods", "rr_sloc",
    ];
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.scope.kind().to_string(),
                r.scope.project().to_string(),
                r.scope.fold().map(|f| f.to_string()).unwrap_or_else(|| "-".into()),
                r.n_methods.to_string(),
                r.n_lfr_methods.to_string(),
                format!("{:.1}", 100.0 * r.pct_methods_lfr()),
                r.sloc_total.to_string(),
                r.sloc_lfr.to_string(),
                format!("{:.1}", 100.0 * r.pct_sloc_lfr()),
                r.n_faulty.to_string(),
                r.n_faulty_in_lfr.to_string(),
                format!("{:.1}", 100.0 * r.pct_faults_in_lfr()),
                r.risk_ratio_methods().to_string(),
                r.risk_ratio_sloc().to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (s, w))| if c < 2 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&header.map(String::from));
    for r in &rows {
        out.push_str(&line(r));
    }
    out
}
