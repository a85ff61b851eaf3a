mod common;

use lowfault_core::evaluation::{RiskRatio, Scope};
use lowfault_core::synthetic::{generate_corpus, CorpusConfig};
use lowfault_core::{
    classify, compute_report, cross_project_eval, train, within_project_eval, EvaluationReport, MethodRecord,
    PipelineConfig, ProjectDataset,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_corpus(n_projects: usize) -> Vec<ProjectDataset> {
    let cfg = CorpusConfig {
        n_projects,
        methods_per_project: (300, 400),
        seed: 11,
        ..Default::default()
    };
    generate_corpus(&cfg).into_iter().map(|p| p.dataset).collect()
}

fn counts(r: &EvaluationReport) -> [u64; 6] {
    [r.n_methods, r.n_lfr_methods, r.sloc_total, r.sloc_lfr, r.n_faulty, r.n_faulty_in_lfr]
}

#[test]
fn within_project_gives_ten_folds_and_a_pooled_aggregate() {
    let ds = &small_corpus(1)[0];
    let result = within_project_eval(ds, &PipelineConfig::default()).unwrap();
    assert_eq!(result.folds.len(), 10);
    assert_eq!(result.n_rules.len(), 10);
    for (f, r) in result.folds.iter().enumerate() {
        assert_eq!(r.scope, Scope::Fold { project: ds.project.clone(), fold: f });
        common::report_consistent(r).unwrap();
    }
    let agg = &result.aggregate;
    assert_eq!(agg.scope, Scope::Aggregate { project: ds.project.clone() });
    let mut pooled = [0u64; 6];
    for r in &result.folds {
        for (p, c) in pooled.iter_mut().zip(counts(r)) {
            *p += c;
        }
    }
    assert_eq!(pooled, counts(agg));
    assert_eq!(agg.n_methods, ds.len() as u64);
    assert!(agg.medians.is_some());
}

#[test]
fn evaluation_is_deterministic() {
    let corpus = small_corpus(3);
    let cfg = PipelineConfig::default();
    let a = within_project_eval(&corpus[0], &cfg).unwrap();
    let b = within_project_eval(&corpus[0], &cfg).unwrap();
    assert_eq!(a.folds, b.folds);
    assert_eq!(a.aggregate, b.aggregate);
    let x = cross_project_eval(&corpus, &cfg).unwrap();
    let y = cross_project_eval(&corpus, &cfg).unwrap();
    assert_eq!(x.targets, y.targets);
}

#[test]
fn cross_project_has_one_row_per_target() {
    let corpus = small_corpus(3);
    let result = cross_project_eval(&corpus, &PipelineConfig::default()).unwrap();
    assert_eq!(result.targets.len(), 3);
    for (r, ds) in result.targets.iter().zip(&corpus) {
        assert_eq!(r.scope, Scope::CrossProject { target: ds.project.clone() });
        assert_eq!(r.n_methods, ds.len() as u64);
    }
}

#[test]
fn twin_projects_match_a_self_test() {
    let original = small_corpus(1).remove(0);
    let twin_records: Vec<MethodRecord> = original
        .records
        .iter()
        .cloned()
        .map(|mut r| {
            r.project = "twin".into();
            r
        })
        .collect();
    let twin = ProjectDataset::new("twin", twin_records);
    let cfg = PipelineConfig::default();
    let cross = cross_project_eval(&[original.clone(), twin], &cfg).unwrap();

    let outcome = train(&original.records, &cfg).unwrap();
    let predictions: Vec<_> = original.records.iter().map(|r| classify(r, &outcome.classifier)).collect();
    let own = compute_report(Scope::Aggregate { project: original.project.clone() }, &predictions, &original.records)
        .unwrap();
    for target in &cross.targets {
        assert_eq!(counts(target), counts(&own));
    }
}

#[test]
fn a_classifier_that_never_fires_reports_not_applicable() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ds = ProjectDataset::new("p", common::random_records(&mut rng, "p", 100, 0.2));
    let cfg = PipelineConfig {
        selection_threshold: 0.0,
        min_confidence: 1.0,
        min_support: 1.0,
        ..Default::default()
    };
    let result = within_project_eval(&ds, &cfg).unwrap();
    assert!(result.n_rules.iter().all(|n| *n == 0));
    let agg = result.aggregate;
    assert_eq!(agg.pct_methods_lfr(), 0.0);
    assert_eq!(agg.risk_ratio_methods(), RiskRatio::NotApplicable);
    assert_eq!(agg.risk_ratio_sloc(), RiskRatio::NotApplicable);
}

#[test]
fn folds_without_faults_skip_balancing_with_a_warning() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut records = common::random_records(&mut rng, "p", 40, 0.0);
    records[3].faulty = true;
    let ds = ProjectDataset::new("p", records);
    let strict = PipelineConfig {
        cv_folds: 2,
        ..Default::default()
    };
    assert!(within_project_eval(&ds, &strict).is_err());
    let lenient = PipelineConfig {
        allow_unbalanced: true,
        ..strict
    };
    let result = within_project_eval(&ds, &lenient).unwrap();
    assert!(result.warnings.iter().any(|w| w.contains("no faulty")));
    assert!(result.warnings.iter().any(|w| w.contains("single minority")));
    assert_eq!(result.aggregate.n_methods, 40);
}

#[test]
fn training_pools_never_hold_target_methods() {
    let corpus = small_corpus(3);
    for (t, target) in corpus.iter().enumerate() {
        let pool = common::ids(corpus.iter().enumerate().filter(|(i, _)| *i != t).flat_map(|(_, d)| &d.records));
        let held_out = common::ids(&target.records);
        assert!(pool.is_disjoint(&held_out));
    }
}
