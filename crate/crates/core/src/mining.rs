//! Apriori mining of rules `{items} -> {NotFaulty}`.
//!
//! Support of an antecedent is counted together with the fixed consequent:
//! an itemset is frequent when the share of instances containing all of its
//! items *and* labelled `NotFaulty` reaches `min_support`. Counting uses a
//! vertical layout (item -> instance bitset) and bitset intersection.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::items::{Instance, ItemId, ItemSet, Label};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningParams {
    pub min_support: f64,
    pub min_confidence: f64,
    pub max_len: usize,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            min_support: 0.05,
            min_confidence: 0.9,
            max_len: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MiningError {
    #[error("antecedent {0:?} matches no instance")]
    ZeroMatch(ItemSet),
}

/// Support counts of one antecedent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ItemsetCount {
    pub items: ItemSet,
    /// Instances containing every item.
    pub n_match: u64,
    /// Of those, the ones labelled `NotFaulty`.
    pub n_match_notfaulty: u64,
    /// Size of the instance set the counts refer to.
    pub n_total: u64,
}

/// `antecedent -> NotFaulty` with the integer counts behind its measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssociationRule {
    pub antecedent: ItemSet,
    pub n_match: u64,
    pub n_match_notfaulty: u64,
    pub n_total: u64,
}

impl AssociationRule {
    /// Share of all instances that match the antecedent and are not faulty.
    pub fn support(&self) -> f64 {
        self.n_match_notfaulty as f64 / self.n_total as f64
    }

    /// Share of matching instances that are not faulty: the rule's precision.
    pub fn confidence(&self) -> f64 {
        self.n_match_notfaulty as f64 / self.n_match as f64
    }

    /// Exact comparison of confidences by cross-multiplication.
    pub fn cmp_confidence(&self, other: &Self) -> Ordering {
        let a = self.n_match_notfaulty as u128 * other.n_match as u128;
        let b = other.n_match_notfaulty as u128 * self.n_match as u128;
        a.cmp(&b)
    }

    pub fn cmp_support(&self, other: &Self) -> Ordering {
        let a = self.n_match_notfaulty as u128 * other.n_total as u128;
        let b = other.n_match_notfaulty as u128 * self.n_total as u128;
        a.cmp(&b)
    }

    pub fn matches(&self, features: ItemSet) -> bool {
        self.antecedent.is_subset_of(features)
    }
}

/// Whether `count` out of `n` reaches `min_support`.
pub fn meets_support(count: u64, n: u64, min_support: f64) -> bool {
    n > 0 && count as f64 / n as f64 >= min_support
}

#[derive(Debug, Clone)]
struct Bitset(Vec<u64>);

impl Bitset {
    fn zeros(n: usize) -> Self {
        Bitset(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bitset) -> Bitset {
        Bitset(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn count_and(&self, other: &Bitset) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }
}

struct Level {
    itemsets: Vec<(ItemSet, Bitset)>,
}

/// Every itemset whose counting was attempted, for inspection in tests.
#[derive(Debug, Clone, Default)]
pub struct MiningTrace {
    pub counted: Vec<ItemSet>,
}

/// Frequent antecedents of size `1..=max_len`, in canonical order (size, then
/// lexicographic item ids).
pub fn mine_frequent_antecedents(instances: &[Instance], min_support: f64, max_len: usize) -> Vec<ItemsetCount> {
    mine_traced(instances, min_support, max_len, &mut MiningTrace::default())
}

pub fn mine_traced(
    instances: &[Instance],
    min_support: f64,
    max_len: usize,
    trace: &mut MiningTrace,
) -> Vec<ItemsetCount> {
    let n = instances.len();
    let n_total = n as u64;
    if n == 0 || max_len == 0 {
        return Vec::new();
    }

    let universe = instances
        .iter()
        .fold(ItemSet::empty(), |acc, i| acc.union(i.features));
    let mut columns: Vec<Option<Bitset>> = vec![None; ItemSet::CAPACITY];
    let mut not_faulty = Bitset::zeros(n);
    for item in universe {
        columns[item.index()] = Some(Bitset::zeros(n));
    }
    for (t, inst) in instances.iter().enumerate() {
        for item in inst.features {
            columns[item.index()].as_mut().unwrap().set(t);
        }
        if inst.label == Label::NotFaulty {
            not_faulty.set(t);
        }
    }

    let mut out = Vec::new();
    let mut level = Level { itemsets: Vec::new() };
    for item in universe {
        let set = ItemSet::single(item);
        trace.counted.push(set);
        let col = columns[item.index()].as_ref().unwrap();
        let nf = col.count_and(&not_faulty);
        if meets_support(nf, n_total, min_support) {
            out.push(ItemsetCount {
                items: set,
                n_match: col.count(),
                n_match_notfaulty: nf,
                n_total,
            });
            level.itemsets.push((set, col.clone()));
        }
    }

    let mut size = 1;
    while size < max_len && level.itemsets.len() > 1 {
        let frequent: HashSet<ItemSet> = level.itemsets.iter().map(|(s, _)| *s).collect();
        let mut next = Level { itemsets: Vec::new() };
        for a in 0..level.itemsets.len() {
            let (set_a, bits_a) = &level.itemsets[a];
            let last_a = set_a.last().unwrap();
            let prefix = {
                let mut p = *set_a;
                p.remove(last_a);
                p
            };
            for b in a + 1..level.itemsets.len() {
                let (set_b, _) = &level.itemsets[b];
                let last_b = set_b.last().unwrap();
                let mut prefix_b = *set_b;
                prefix_b.remove(last_b);
                if prefix_b != prefix {
                    // Sorted level: equal prefixes are contiguous.
                    break;
                }
                let candidate = set_a.with(last_b);
                if !all_subsets_frequent(candidate, &frequent) {
                    continue;
                }
                trace.counted.push(candidate);
                let bits = bits_a.and(columns[last_b.index()].as_ref().unwrap());
                let nf = bits.count_and(&not_faulty);
                if meets_support(nf, n_total, min_support) {
                    out.push(ItemsetCount {
                        items: candidate,
                        n_match: bits.count(),
                        n_match_notfaulty: nf,
                        n_total,
                    });
                    next.itemsets.push((candidate, bits));
                }
            }
        }
        level = next;
        size += 1;
    }

    out.sort_by(|a, b| a.items.canonical_cmp(&b.items));
    out
}

fn all_subsets_frequent(candidate: ItemSet, frequent: &HashSet<ItemSet>) -> bool {
    candidate.iter().all(|item: ItemId| {
        let mut sub = candidate;
        sub.remove(item);
        frequent.contains(&sub)
    })
}

/// One rule per frequent antecedent whose confidence reaches `min_confidence`.
pub fn generate_rules(counts: &[ItemsetCount], min_confidence: f64) -> Result<Vec<AssociationRule>, MiningError> {
    let mut rules = Vec::new();
    for c in counts {
        if c.n_match == 0 {
            return Err(MiningError::ZeroMatch(c.items));
        }
        let rule = AssociationRule {
            antecedent: c.items,
            n_match: c.n_match,
            n_match_notfaulty: c.n_match_notfaulty,
            n_total: c.n_total,
        };
        if rule.confidence() >= min_confidence {
            rules.push(rule);
        }
    }
    Ok(rules)
}

/// Mine frequent antecedents and turn them into rules in one call.
pub fn mine_rules(instances: &[Instance], params: &MiningParams) -> Result<Vec<AssociationRule>, MiningError> {
    let counts = mine_frequent_antecedents(instances, params.min_support, params.max_len);
    generate_rules(&counts, params.min_confidence)
}
