//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use lowfault_core::evaluation::EvaluationReport;
use lowfault_core::items::{Instance, ItemId, ItemSet, Label};
use lowfault_core::metric::{CategoryId, CountMetricId, MetricVector, NumericMetricId};
use lowfault_core::mining::ItemsetCount;
use lowfault_core::MethodRecord;
use rand::Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

/// Every non-empty antecedent of at most `max_len` of the first `n_items`
/// feature items whose count together with `NotFaulty` reaches the support.
pub fn powerset_frequent(instances: &[Instance], n_items: usize, min_support: f64, max_len: usize) -> Vec<ItemsetCount> {
    let n = instances.len() as u64;
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << n_items) {
        if mask.count_ones() as usize > max_len {
            continue;
        }
        let items = ItemSet::from_bits(mask);
        let matching: Vec<&Instance> = instances.iter().filter(|i| items.is_subset_of(i.features)).collect();
        let nf = matching.iter().filter(|i| i.label == Label::NotFaulty).count() as u64;
        if n > 0 && nf as f64 / n as f64 >= min_support {
            out.push(ItemsetCount {
                items,
                n_match: matching.len() as u64,
                n_match_notfaulty: nf,
                n_total: n,
            });
        }
    }
    out.sort_by(|a, b| a.items.canonical_cmp(&b.items));
    out
}

pub fn random_instances(rng: &mut impl Rng, n: usize, n_items: usize, density: f64, fault_rate: f64) -> Vec<Instance> {
    (0..n)
        .map(|k| {
            let features: ItemSet = (0..n_items as u8).filter(|_| rng.random_bool(density)).map(ItemId).collect();
            Instance::real(features, Label::from_faulty(rng.random_bool(fault_rate)), format!("i{k}"))
        })
        .collect()
}

/// Tertiles by counting: `t1` is the least value with at least `n/3` values
/// at or below it, `t2` the least with at least `2n/3`.
pub fn tertiles_by_counting(values: &[u32]) -> (u32, u32) {
    let mut distinct: Vec<u32> = values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let n = values.len() as f64;
    let least = |share: f64| {
        *distinct
            .iter()
            .find(|&&v| values.iter().filter(|&&x| x <= v).count() as f64 >= n * share - 1e-9)
            .unwrap()
    };
    (least(1.0 / 3.0), least(2.0 / 3.0))
}

pub fn random_metrics(rng: &mut impl Rng) -> MetricVector {
    let mut m = MetricVector::default();
    for id in NumericMetricId::ALL {
        let cap = [60, 20, 6, 6, 40][id.index()];
        m.set_numeric(*id, rng.random_range(0..=cap));
    }
    for id in CountMetricId::ALL {
        let v = if rng.random_bool(0.4) { 0 } else { rng.random_range(1..=8) };
        m.set_count(*id, v);
    }
    for c in CategoryId::ALL {
        m.categories.set(*c, rng.random_bool(0.2));
    }
    m
}

pub fn random_records(rng: &mut impl Rng, project: &str, n: usize, fault_rate: f64) -> Vec<MethodRecord> {
    (0..n)
        .map(|i| {
            let mut r = MethodRecord::new(project, format!("{project}.m{i}"), random_metrics(rng));
            r.faulty = rng.random_bool(fault_rate);
            r
        })
        .collect()
}

/// Every instance set of one class is a-set ∩ b-set ⊆ s ⊆ a ∪ b for some
/// pair of originals.
pub fn contained_in_some_pair(s: ItemSet, originals: &[ItemSet]) -> bool {
    originals.iter().any(|a| {
        originals
            .iter()
            .any(|b| a.intersection(*b).is_subset_of(s) && s.is_subset_of(a.union(*b)))
    })
}

/// Fold-size and per-fold faulty-count bounds of a stratified assignment.
pub fn stratification_ok(faulty: &[bool], assignment: &[usize], k: usize) -> Result<(), String> {
    let mut sizes = vec![0usize; k];
    let mut bad = vec![0usize; k];
    for (f, &is_faulty) in assignment.iter().zip(faulty) {
        sizes[*f] += 1;
        bad[*f] += usize::from(is_faulty);
    }
    let spread = |v: &[usize]| v.iter().max().unwrap() - v.iter().min().unwrap();
    if spread(&sizes) > 1 {
        return Err(format!("fold sizes {sizes:?}"));
    }
    // Exact proportionality would put n_faulty/k in each fold.
    let n_faulty = faulty.iter().filter(|f| **f).count() as f64;
    let share = n_faulty / k as f64;
    if bad.iter().any(|&b| (b as f64 - share).abs() >= 1.0 + 1e-9) {
        return Err(format!("faulty per fold {bad:?}, expected about {share:.2}"));
    }
    Ok(())
}

/// Percentages must follow from the integer counts of the same report.
pub fn report_consistent(r: &EvaluationReport) -> Result<(), String> {
    let frac = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let checks = [
        ("pct_methods_lfr", r.pct_methods_lfr(), frac(r.n_lfr_methods, r.n_methods)),
        ("pct_sloc_lfr", r.pct_sloc_lfr(), frac(r.sloc_lfr, r.sloc_total)),
        ("pct_faults_in_lfr", r.pct_faults_in_lfr(), frac(r.n_faulty_in_lfr, r.n_faulty)),
    ];
    for (name, got, want) in checks {
        if got != want {
            return Err(format!("{name}: {got} vs {want}"));
        }
    }
    if r.n_lfr_methods > r.n_methods || r.n_faulty_in_lfr > r.n_faulty || r.sloc_lfr > r.sloc_total {
        return Err("LFR counts exceed totals".into());
    }
    if r.n_faulty_in_lfr > r.n_lfr_methods {
        return Err("more LFR faults than LFR methods".into());
    }
    if let Some(v) = r.risk_ratio_methods().value().filter(|v| v.is_finite()) {
        let want = (r.n_faulty as f64 / r.n_methods as f64) / (r.n_faulty_in_lfr as f64 / r.n_lfr_methods as f64);
        if (v - want).abs() > 1e-9 * want.max(1.0) {
            return Err(format!("risk ratio {v} vs {want}"));
        }
    }
    Ok(())
}

pub fn ids<'a>(records: impl IntoIterator<Item = &'a MethodRecord>) -> HashSet<(String, String)> {
    records
        .into_iter()
        .map(|r| (r.project.clone(), r.method_id.clone()))
        .collect()
}

/// One expected row of the hand-computed snippet table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedMetrics {
    pub method_id: String,
    pub values: BTreeMap<String, u32>,
    pub categories: Vec<String>,
}

pub fn read_expected_snippets() -> Vec<ExpectedMetrics> {
    let path = fixture_dir().join("snippets_expected.csv");
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|row| {
            let row = row.unwrap();
            let mut values = BTreeMap::new();
            for (h, v) in headers.iter().zip(row.iter()).skip(1) {
                if h != "categories" {
                    values.insert(h.to_string(), v.parse().unwrap());
                }
            }
            let categories = row[headers.len() - 1]
                .split('|')
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            ExpectedMetrics {
                method_id: row[0].to_string(),
                values,
                categories,
            }
        })
        .collect()
}

/// Analyze every snippet and compare with the table; returns mismatches.
pub fn snippet_mismatches() -> Vec<String> {
    use lowfault_core::parser::analyze_source;

    let dir = fixture_dir().join("snippets");
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut actual: BTreeMap<String, MetricVector> = BTreeMap::new();
    for path in &files {
        let name = path.file_name().unwrap().to_str().unwrap();
        let src = std::fs::read_to_string(path).unwrap();
        for m in analyze_source(&src, name).unwrap() {
            actual.insert(m.span.method_id(), m.metrics);
        }
    }
    let expected = read_expected_snippets();
    let mut problems = Vec::new();
    if files.len() != 12 {
        problems.push(format!("{} snippet files, expected 12", files.len()));
    }
    let expected_ids: HashSet<&str> = expected.iter().map(|e| e.method_id.as_str()).collect();
    for id in actual.keys() {
        if !expected_ids.contains(id.as_str()) {
            problems.push(format!("unexpected method {id}"));
        }
    }
    for e in &expected {
        let Some(m) = actual.get(&e.method_id) else {
            problems.push(format!("missing method {}", e.method_id));
            continue;
        };
        for id in NumericMetricId::ALL {
            let want = e.values[id.column()];
            if m.numeric(*id) != want {
                problems.push(format!("{} {}: {} != {want}", e.method_id, id.column(), m.numeric(*id)));
            }
        }
        for id in CountMetricId::ALL {
            let want = e.values[id.column()];
            if m.count(*id) != want {
                problems.push(format!("{} {}: {} != {want}", e.method_id, id.column(), m.count(*id)));
            }
        }
        let got: Vec<String> = m.categories.iter().map(|c| c.name().to_string()).collect();
        let mut want = e.categories.clone();
        want.sort();
        let mut got_sorted = got.clone();
        got_sorted.sort();
        if got_sorted != want {
            problems.push(format!("{} categories: {got:?} != {want:?}", e.method_id));
        }
    }
    problems
}
