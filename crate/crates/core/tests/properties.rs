mod common;

use std::collections::HashSet;

use lowfault_core::balance::ceil_ratio;
use lowfault_core::dataset::{read_records, write_records};
use lowfault_core::discretize::{features, no_item, tertile_item};
use lowfault_core::evaluation::stratified_folds;
use lowfault_core::parser::analyze_source;
use lowfault_core::{
    attach_labels, balance, classify, compute_tertiles, fit_schema, generate_rules, mine_frequent_antecedents,
    rank_rules, select_top_n, BalanceConfig, CountMetricId, Instance, ItemSet, Label, LowRiskClassifier,
    NumericMetricId, Origin, PipelineConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A statement template with the loop count and decision flag it contributes.
struct Fragment {
    text: &'static str,
    loops: u32,
    decision: bool,
}

const FRAGMENTS: &[Fragment] = &[
    Fragment { text: "int v = x + 1;", loops: 0, decision: false },
    Fragment { text: "log(\"STR\");", loops: 0, decision: false },
    Fragment { text: "char c = '{';", loops: 0, decision: false },
    Fragment { text: "total = total * 2;", loops: 0, decision: false },
    Fragment { text: "if (x > 0) {\n y = 1;\n}", loops: 0, decision: true },
    Fragment { text: "if (a && b) { call(\"STR\"); }", loops: 0, decision: true },
    Fragment { text: "y = x > 0 ? 1 : 2;", loops: 0, decision: true },
    Fragment { text: "switch (x) {\n case 1: y = 2; break;\n default: y = 3;\n}", loops: 0, decision: true },
    Fragment { text: "for (int i = 0; i < n; i++) {\n s += i;\n}", loops: 1, decision: true },
    Fragment { text: "for (String e : items) { use(e); }", loops: 1, decision: true },
    Fragment { text: "while (k < 10) {\n k++;\n}", loops: 1, decision: true },
    Fragment { text: "do {\n k--;\n} while (k > 0);", loops: 1, decision: true },
];

const KEYWORD_SOUP: &[&str] = &["if", "for", "while", "do", "case", "?", "&&", "||", "return", "{", "}", "throw", "try", "(int)"];

struct GeneratedClass {
    source: String,
    loops: Vec<u32>,
    decisions: Vec<bool>,
}

fn generate_class(picks: &[Vec<usize>], soup: &[usize]) -> GeneratedClass {
    let soup_text = |k: usize| {
        (0..3)
            .map(|j| KEYWORD_SOUP[soup[(k + j) % soup.len()] % KEYWORD_SOUP.len()])
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut source = String::from("class Gen {\n");
    let mut loops = Vec::new();
    let mut decisions = Vec::new();
    for (m, body) in picks.iter().enumerate() {
        source.push_str(&format!("  void m{m}(int x) {{\n"));
        let mut l = 0;
        let mut d = false;
        for (s, &f) in body.iter().enumerate() {
            let frag = &FRAGMENTS[f];
            source.push_str("    ");
            source.push_str(&frag.text.replace("STR", &soup_text(m + s)));
            source.push('\n');
            l += frag.loops;
            d |= frag.decision;
        }
        source.push_str("  }\n\n");
        loops.push(l);
        decisions.push(d);
    }
    source.push_str("}\n");
    GeneratedClass { source, loops, decisions }
}

/// Add keyword-laden comments after every `;` and `{` outside literals and at
/// the end of every line, keeping the line layout.
fn salt_with_comments(source: &str, soup: &str) -> String {
    let mut out = String::new();
    let mut in_str = false;
    let mut in_char = false;
    for ch in source.chars() {
        if ch == '\n' {
            out.push_str(&format!(" // {soup}"));
        }
        out.push(ch);
        match ch {
            '"' if !in_char => in_str = !in_str,
            '\'' if !in_str => in_char = !in_char,
            ';' | '{' if !in_str && !in_char => out.push_str(&format!(" /* {soup} */ ")),
            _ => {}
        }
    }
    out
}

fn class_strategy() -> impl Strategy<Value = (Vec<Vec<usize>>, Vec<usize>)> {
    (
        prop::collection::vec(prop::collection::vec(0..FRAGMENTS.len(), 0..6), 1..5),
        prop::collection::vec(any::<usize>(), 1..8),
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn extraction_is_deterministic((picks, soup) in class_strategy()) {
        let g = generate_class(&picks, &soup);
        let a = analyze_source(&g.source, "Gen.java").unwrap();
        let b = analyze_source(&g.source, "Gen.java").unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn literals_and_comments_never_change_metrics((picks, soup) in class_strategy(), other in prop::collection::vec(any::<usize>(), 1..8)) {
        let g = generate_class(&picks, &soup);
        let plain: Vec<_> = analyze_source(&g.source, "Gen.java").unwrap().into_iter().map(|m| m.metrics).collect();
        let h = generate_class(&picks, &other);
        let resoup: Vec<_> = analyze_source(&h.source, "Gen.java").unwrap().into_iter().map(|m| m.metrics).collect();
        prop_assert_eq!(&plain, &resoup);
        let salted = salt_with_comments(&g.source, "if for while ? && case");
        let commented: Vec<_> = analyze_source(&salted, "Gen.java").unwrap().into_iter().map(|m| m.metrics).collect();
        prop_assert_eq!(&plain, &commented);
    }

    #[test]
    fn sloc_sums_to_at_most_the_nonblank_lines((picks, soup) in class_strategy()) {
        let g = generate_class(&picks, &soup);
        let methods = analyze_source(&g.source, "Gen.java").unwrap();
        let total: u32 = methods.iter().map(|m| m.metrics.numeric(NumericMetricId::Sloc)).sum();
        let nonblank = g.source.lines().filter(|l| !l.trim().is_empty()).count() as u32;
        prop_assert!(total <= nonblank);
        let n_lines = g.source.lines().count();
        for m in &methods {
            prop_assert!(m.span.start_line <= m.span.end_line && m.span.end_line <= n_lines);
        }
    }

    #[test]
    fn loops_and_cyclomatic_follow_the_fragments((picks, soup) in class_strategy()) {
        let g = generate_class(&picks, &soup);
        let methods = analyze_source(&g.source, "Gen.java").unwrap();
        prop_assert_eq!(methods.len(), picks.len());
        let names: HashSet<String> = methods.iter().map(|m| m.span.qualified_name.clone()).collect();
        prop_assert_eq!(names.len(), methods.len());
        for (i, m) in methods.iter().enumerate() {
            let cc = m.metrics.numeric(NumericMetricId::CyclomaticComplexity);
            prop_assert!(cc >= 1);
            prop_assert_eq!(cc == 1, !g.decisions[i], "method {} cyclomatic {}", i, cc);
            prop_assert_eq!(m.metrics.count(CountMetricId::Loops), g.loops[i]);
            prop_assert!(m.metrics.numeric(NumericMetricId::Sloc) >= 1);
        }
    }

    #[test]
    fn tertiles_match_counting(values in prop::collection::vec(0u32..50, 1..80)) {
        let (t1, t2) = compute_tertiles(&values).unwrap();
        prop_assert!(t1 <= t2);
        prop_assert_eq!((t1, t2), common::tertiles_by_counting(&values));
    }

    #[test]
    fn discretized_records_partition_and_mark_zeros(seed in any::<u64>(), n in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records = common::random_records(&mut rng, "p", n, 0.2);
        let schema = fit_schema(&records).unwrap();
        for r in &records {
            let items = features(r, &schema);
            for m in NumericMetricId::ALL {
                let bins: Vec<usize> = (0..3).filter(|b| items.contains(tertile_item(*m, *b))).collect();
                prop_assert_eq!(bins, vec![schema.boundaries(*m).bin(r.metrics.numeric(*m))]);
            }
            for c in CountMetricId::ALL {
                prop_assert_eq!(items.contains(no_item(*c)), r.metrics.count(*c) == 0);
            }
        }
        for m in NumericMetricId::ALL {
            let t = schema.boundaries(*m);
            for a in &records {
                for b in &records {
                    let (va, vb) = (a.metrics.numeric(*m), b.metrics.numeric(*m));
                    if va <= vb {
                        prop_assert!(t.bin(va) <= t.bin(vb));
                    }
                }
            }
        }
    }

    #[test]
    fn smote_keeps_its_laws(seed in any::<u64>(), n in 2usize..40, fault in 0.05f64..0.6, ratio in 0.05f64..=1.0, k in 1usize..6, under in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let instances = common::random_instances(&mut rng, n, 12, 0.4, fault);
        let config = BalanceConfig { target_ratio: ratio, k_neighbors: k, undersample_majority: under, rng_seed: rng.random() };
        let Ok(out) = balance(&instances, &config) else {
            return Ok(());
        };
        prop_assert_eq!(&balance(&instances, &config).unwrap(), &out);
        let minority_before: Vec<ItemSet> = instances.iter().filter(|i| i.label == out.minority).map(|i| i.features).collect();
        let majority_after = out.instances.iter().filter(|i| i.label != out.minority).count();
        let minority_after = out.instances.len() - majority_after;
        prop_assert_eq!(minority_after, minority_before.len().max(ceil_ratio(ratio, majority_after)));
        for s in out.instances.iter().filter(|i| i.origin == Origin::Synthetic) {
            prop_assert_eq!(s.label, out.minority);
            prop_assert!(s.method_id.is_none());
            prop_assert!(common::contained_in_some_pair(s.features, &minority_before));
        }
    }

    #[test]
    fn mining_equals_enumeration(seed in any::<u64>(), n in 0usize..30, n_items in 1usize..10, ms in 1u32..=10, max_len in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let instances = common::random_instances(&mut rng, n, n_items, 0.5, 0.3);
        let ms = ms as f64 * 0.05;
        let got = mine_frequent_antecedents(&instances, ms, max_len);
        prop_assert_eq!(&got, &common::powerset_frequent(&instances, n_items, ms, max_len));
        for a in &got {
            for b in &got {
                if a.items.is_subset_of(b.items) {
                    prop_assert!(b.n_match <= a.n_match && b.n_match_notfaulty <= a.n_match_notfaulty);
                }
            }
        }
        for r in generate_rules(&got, 0.0).unwrap() {
            prop_assert!((0.0..=1.0).contains(&r.confidence()));
            prop_assert!(!r.antecedent.is_empty());
            prop_assert!(r.n_match_notfaulty <= r.n_match && r.n_match <= n as u64);
        }
    }

    #[test]
    fn selection_is_sound_and_label_blind(seed in any::<u64>(), threshold in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records = common::random_records(&mut rng, "p", 80, 0.2);
        let schema = fit_schema(&records).unwrap();
        let original: Vec<Instance> = records
            .iter()
            .map(|r| Instance::real(features(r, &schema), Label::from_faulty(r.faulty), r.method_id.clone()))
            .collect();
        let counts = mine_frequent_antecedents(&original, 0.1, 3);
        let ranked = rank_rules(generate_rules(&counts, 0.7).unwrap()).unwrap();
        let clf = select_top_n(&schema, &ranked, &original, threshold).unwrap();

        let mut covered = vec![false; original.len()];
        for rule in &ranked[..clf.n()] {
            let before = covered.clone();
            for (c, i) in covered.iter_mut().zip(&original) {
                *c |= rule.antecedent.is_subset_of(i.features);
            }
            prop_assert!(before.iter().zip(&covered).all(|(b, c)| !b || *c));
            let total = covered.iter().filter(|c| **c).count();
            let bad = covered.iter().zip(&original).filter(|(c, i)| **c && i.label.is_faulty()).count();
            prop_assert!(total == 0 || bad as f64 / total as f64 <= threshold);
        }
        for r in &records {
            let mut flipped = r.clone();
            flipped.faulty = !r.faulty;
            prop_assert_eq!(classify(r, &clf), classify(&flipped, &clf));
        }

        let cfg = PipelineConfig::default();
        let (loaded, embedded) = LowRiskClassifier::from_toml(&clf.to_toml(Some(&cfg))).unwrap();
        prop_assert_eq!(embedded, Some(cfg));
        let held_out = common::random_records(&mut rng, "q", 40, 0.2);
        for r in &held_out {
            prop_assert_eq!(classify(r, &clf), classify(r, &loaded));
        }
    }

    #[test]
    fn folds_are_stratified(seed in any::<u64>(), n in 2usize..200, fault in 0.0f64..0.6, k in 2usize..=10) {
        prop_assume!(k <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records = common::random_records(&mut rng, "p", n, fault);
        let a = stratified_folds(&records, k, seed).unwrap();
        let faulty: Vec<bool> = records.iter().map(|r| r.faulty).collect();
        prop_assert_eq!(common::stratification_ok(&faulty, &a.assignment, k), Ok(()));
    }

    #[test]
    fn csv_round_trip_is_byte_stable(seed in any::<u64>(), n in 0usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records = common::random_records(&mut rng, "p", n, 0.3);
        let mut first = Vec::new();
        write_records(&mut first, &records).unwrap();
        let back = read_records(&first[..]).unwrap();
        prop_assert_eq!(&back, &records);
        let mut second = Vec::new();
        write_records(&mut second, &back).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn labels_are_idempotent_and_order_free(seed in any::<u64>(), picks in prop::collection::vec(0usize..30, 0..20)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = common::random_records(&mut rng, "p", 20, 0.0);
        let labels: Vec<String> = picks.iter().map(|i| format!("p.m{i}")).collect();
        let mut reversed = labels.clone();
        reversed.reverse();
        let mut b = a.clone();
        attach_labels(&mut a, &labels);
        let once = a.clone();
        attach_labels(&mut a, &labels);
        attach_labels(&mut b, &reversed);
        prop_assert_eq!(&a, &once);
        prop_assert_eq!(&a, &b);
        let wanted: HashSet<&String> = labels.iter().collect();
        for r in &a {
            prop_assert_eq!(r.faulty, wanted.contains(&r.method_id));
        }
    }
}
