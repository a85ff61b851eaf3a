//! Seeded generator of labelled multi-project corpora with a planted
//! low-fault-risk pattern.
//!
//! Each method is drawn from an archetype. The trivial archetypes (getters,
//! setters, empty methods, delegations, simple constructors) form the
//! low-fault-risk (LFR) group. Within each group, `round(rate * size)`
//! methods chosen at random are faulty, so the planted rates hold exactly.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{MethodRecord, ProjectDataset};
use crate::metric::{CategoryId, CountMetricId, MetricVector, NumericMetricId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Archetype {
    Getter,
    Setter,
    Empty,
    Delegation,
    Constructor,
    Branchy,
    Worker,
}

impl Archetype {
    pub const ALL: [Archetype; 7] = [
        Archetype::Getter,
        Archetype::Setter,
        Archetype::Empty,
        Archetype::Delegation,
        Archetype::Constructor,
        Archetype::Branchy,
        Archetype::Worker,
    ];

    pub fn is_lfr(self) -> bool {
        !matches!(self, Archetype::Branchy | Archetype::Worker)
    }

    pub fn name(self) -> &'static str {
        match self {
            Archetype::Getter => "get",
            Archetype::Setter => "set",
            Archetype::Empty => "noop",
            Archetype::Delegation => "forward",
            Archetype::Constructor => "init",
            Archetype::Branchy => "check",
            Archetype::Worker => "process",
        }
    }

    /// Relative frequency within a project, in percent.
    fn weight(self) -> u32 {
        match self {
            Archetype::Getter => 14,
            Archetype::Setter => 9,
            Archetype::Empty => 4,
            Archetype::Delegation => 8,
            Archetype::Constructor => 5,
            Archetype::Branchy => 12,
            Archetype::Worker => 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub n_projects: usize,
    /// Methods per project are drawn uniformly from this inclusive range.
    pub methods_per_project: (usize, usize),
    pub lfr_fault_rate: f64,
    pub other_fault_rate: f64,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            n_projects: 6,
            methods_per_project: (1900, 2100),
            lfr_fault_rate: 0.005,
            other_fault_rate: 0.10,
            seed: 42,
        }
    }
}

pub const PROJECT_NAMES: [&str; 8] = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"];

#[derive(Debug, Clone)]
pub struct SyntheticProject {
    pub dataset: ProjectDataset,
    /// Archetype of each record, aligned with `dataset.records`.
    pub archetypes: Vec<Archetype>,
}

impl SyntheticProject {
    pub fn lfr_mask(&self) -> Vec<bool> {
        self.archetypes.iter().map(|a| a.is_lfr()).collect()
    }
}

pub fn project_name(i: usize) -> String {
    match PROJECT_NAMES.get(i) {
        Some(n) => n.to_string(),
        None => format!("project{i}"),
    }
}

pub fn generate_corpus(config: &CorpusConfig) -> Vec<SyntheticProject> {
    (0..config.n_projects)
        .map(|p| {
            let seed = config.seed ^ (p as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (lo, hi) = config.methods_per_project;
            let n = rng.random_range(lo..=hi.max(lo));
            generate_project(&project_name(p), n, config, &mut rng)
        })
        .collect()
}

pub fn generate_project(name: &str, n: usize, config: &CorpusConfig, rng: &mut impl Rng) -> SyntheticProject {
    let total: u32 = Archetype::ALL.iter().map(|a| a.weight()).sum();
    let mut records = Vec::with_capacity(n);
    let mut archetypes = Vec::with_capacity(n);
    for i in 0..n {
        let mut pick = rng.random_range(0..total);
        let arch = *Archetype::ALL
            .iter()
            .find(|a| {
                if pick < a.weight() {
                    true
                } else {
                    pick -= a.weight();
                    false
                }
            })
            .expect("weights cover the range");
        let metrics = sample_metrics(arch, rng);
        let class = format!("{}{}", capitalize(name), i / 25);
        let method_id = format!(
            "src/{name}/{class}.java::{class}.{}{i}({})",
            arch.name(),
            metrics.numeric(NumericMetricId::NumParameters)
        );
        records.push(MethodRecord::new(name, method_id, metrics));
        archetypes.push(arch);
    }
    for (lfr, rate) in [(true, config.lfr_fault_rate), (false, config.other_fault_rate)] {
        let group: Vec<usize> = (0..n).filter(|&i| archetypes[i].is_lfr() == lfr).collect();
        let n_faulty = (rate * group.len() as f64).round() as usize;
        for k in index::sample(rng, group.len(), n_faulty.min(group.len())) {
            records[group[k]].faulty = true;
        }
    }
    SyntheticProject {
        dataset: ProjectDataset::new(name, records),
        archetypes,
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn maybe(rng: &mut impl Rng, p: f64, lo: u32, hi: u32) -> u32 {
    if rng.random_bool(p) {
        rng.random_range(lo..=hi)
    } else {
        0
    }
}

fn sample_metrics(arch: Archetype, rng: &mut impl Rng) -> MetricVector {
    use CountMetricId as C;
    use NumericMetricId as N;

    let mut m = MetricVector::default();
    let set = |m: &mut MetricVector, sloc, cc, nest, params, stmts| {
        m.set_numeric(N::Sloc, sloc);
        m.set_numeric(N::CyclomaticComplexity, cc);
        m.set_numeric(N::MaxNestingDepth, nest);
        m.set_numeric(N::NumParameters, params);
        m.set_numeric(N::NumStatements, stmts);
    };
    match arch {
        Archetype::Getter => {
            set(&mut m, 3, 1, 0, 0, 1);
            m.set_count(C::Returns, 1);
            m.categories.insert(CategoryId::Getter);
        }
        Archetype::Setter => {
            set(&mut m, 3, 1, 0, 1, 1);
            m.categories.insert(CategoryId::Setter);
        }
        Archetype::Empty => {
            let params = rng.random_range(0..=2);
            set(&mut m, rng.random_range(1..=2), 1, 0, params, 0);
            m.categories.insert(CategoryId::Empty);
        }
        Archetype::Delegation => {
            let params = rng.random_range(0..=3);
            set(&mut m, 3, 1, 0, params, 1);
            m.set_count(C::Returns, rng.random_range(0..=1));
            m.categories.insert(CategoryId::Delegation);
        }
        Archetype::Constructor => {
            let params = rng.random_range(0..=4);
            let stmts = rng.random_range(1..=params.max(1));
            set(&mut m, stmts + 2, 1, 0, params, stmts);
            m.categories.insert(CategoryId::Constructor);
        }
        Archetype::Branchy => {
            let conditions = rng.random_range(1..=2);
            let logical = maybe(rng, 0.3, 1, 2);
            let stmts = rng.random_range(2..=5);
            let params = rng.random_range(0..=2);
            set(&mut m, rng.random_range(5..=12), 1 + conditions + logical, 1, params, stmts);
            m.set_count(C::Conditions, conditions);
            m.set_count(C::LogicalOperators, logical);
            m.set_count(C::Returns, rng.random_range(1..=2));
            m.set_count(C::ArithmeticOperators, maybe(rng, 0.5, 1, 3));
            m.set_count(C::LocalVariables, rng.random_range(1..=2));
            m.set_count(C::Throws, maybe(rng, 0.15, 1, 1));
        }
        Archetype::Worker => {
            let loops = maybe(rng, 0.75, 1, 3);
            let conditions = rng.random_range(1..=6);
            let cases = maybe(rng, 0.1, 2, 8);
            let logical = maybe(rng, 0.4, 1, 4);
            let tries = maybe(rng, 0.2, 1, 2);
            let sloc = rng.random_range(8..=80);
            let stmts = rng.random_range(sloc / 3..=sloc * 3 / 4);
            let params = rng.random_range(0..=4);
            let nest = 1 + (loops + conditions).min(3) / 2 + rng.random_range(0..=1);
            set(&mut m, sloc, 1 + loops + conditions + cases + logical + tries, nest, params, stmts);
            m.set_count(C::Loops, loops);
            m.set_count(C::Conditions, conditions);
            m.set_count(C::SwitchCases, cases);
            m.set_count(C::TryBlocks, tries);
            m.set_count(C::Returns, maybe(rng, 0.95, 1, 3));
            m.set_count(C::Throws, maybe(rng, 0.2, 1, 2));
            m.set_count(C::Casts, maybe(rng, 0.2, 1, 3));
            m.set_count(C::LogicalOperators, logical);
            m.set_count(C::ArithmeticOperators, maybe(rng, 0.85, 1, 10));
            m.set_count(C::LocalVariables, rng.random_range(1..=6));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_seeded() {
        let cfg = CorpusConfig {
            n_projects: 2,
            methods_per_project: (100, 120),
            ..Default::default()
        };
        let a = generate_corpus(&cfg);
        let b = generate_corpus(&cfg);
        assert_eq!(a[1].dataset, b[1].dataset);
        assert_ne!(a[0].dataset.records, a[1].dataset.records);
        assert_eq!(a[0].dataset.project, "alpha");
    }

    #[test]
    fn method_ids_are_unique_and_sizes_in_range() {
        let corpus = generate_corpus(&CorpusConfig::default());
        assert_eq!(corpus.len(), 6);
        for p in &corpus {
            let n = p.dataset.len();
            assert!((1900..=2100).contains(&n));
            let ids: std::collections::HashSet<_> = p.dataset.records.iter().map(|r| &r.method_id).collect();
            assert_eq!(ids.len(), n);
            let lfr = p.lfr_mask().iter().filter(|x| **x).count();
            assert!(lfr * 100 > n * 34 && lfr * 100 < n * 46, "lfr share {lfr}/{n}");
        }
    }

    #[test]
    fn fault_rates_follow_archetypes() {
        let cfg = CorpusConfig {
            lfr_fault_rate: 0.0,
            other_fault_rate: 1.0,
            ..Default::default()
        };
        for p in generate_corpus(&cfg) {
            for (r, a) in p.dataset.records.iter().zip(&p.archetypes) {
                assert_eq!(r.faulty, !a.is_lfr());
            }
        }
    }
}
