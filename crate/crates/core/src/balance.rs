//! SMOTE over binary item sets.
//!
//! A synthetic minority instance is built from a random minority base and
//! one of the base's `k` nearest minority neighbors (Hamming distance on
//! feature items, ties broken by input order). For each feature item the
//! synthetic instance copies the membership of the base or of the neighbor
//! with probability ½ each, which is the 0/1 counterpart of interpolating
//! between the two points and rounding.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::items::{Instance, Label};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceConfig {
    /// Desired minority:majority ratio after balancing, in (0, 1].
    pub target_ratio: f64,
    pub k_neighbors: usize,
    /// Also drop a random part of the majority class before oversampling.
    pub undersample_majority: bool,
    pub rng_seed: u64,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            target_ratio: 1.0,
            k_neighbors: 5,
            undersample_majority: false,
            rng_seed: 42,
        }
    }
}

impl BalanceConfig {
    pub fn validate(&self) -> Result<(), BalanceError> {
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(BalanceError::InvalidConfig(format!(
                "target ratio {} is outside (0, 1]",
                self.target_ratio
            )));
        }
        if self.k_neighbors == 0 {
            return Err(BalanceError::InvalidConfig("k_neighbors must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BalanceError {
    #[error("invalid balance config: {0}")]
    InvalidConfig(String),
    #[error("need at least 2 {minority:?} instances to synthesize {required}, have {available}")]
    InsufficientMinority {
        minority: Label,
        available: usize,
        required: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceOutcome {
    /// Retained originals in input order, then the synthetic instances.
    pub instances: Vec<Instance>,
    pub minority: Label,
    pub n_synthetic: usize,
    pub n_removed: usize,
}

/// `ceil(ratio * n)`, tolerant of representation error in `ratio`
/// (0.3 * 10 is 3, not 4).
pub fn ceil_ratio(ratio: f64, n: usize) -> usize {
    let x = ratio * n as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Majority size kept by undersampling: halfway between the current size
/// and the size at which the minority already meets the target ratio.
fn undersampled_majority(n_major: usize, n_minor: usize, ratio: f64) -> usize {
    let balanced = (n_minor as f64 / ratio - 1e-9).ceil().max(0.0) as usize;
    if n_major > balanced {
        balanced + (n_major - balanced) / 2
    } else {
        n_major
    }
}

/// Rebalance training instances.
///
/// The minority class is the rarer label (`Faulty` on a tie). The number of
/// synthetic instances is `max(0, ceil(ratio * |majority|) - |minority|)`.
pub fn balance(train: &[Instance], config: &BalanceConfig) -> Result<BalanceOutcome, BalanceError> {
    config.validate()?;
    let n_faulty = train.iter().filter(|i| i.label == Label::Faulty).count();
    let n_clean = train.len() - n_faulty;
    let minority = if n_faulty <= n_clean {
        Label::Faulty
    } else {
        Label::NotFaulty
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let minor_idx: Vec<usize> = (0..train.len()).filter(|&i| train[i].label == minority).collect();
    let major_idx: Vec<usize> = (0..train.len()).filter(|&i| train[i].label != minority).collect();

    let mut keep = vec![true; train.len()];
    let mut n_major = major_idx.len();
    if config.undersample_majority {
        let target = undersampled_majority(n_major, minor_idx.len(), config.target_ratio);
        let n_drop = n_major - target;
        for k in index::sample(&mut rng, n_major, n_drop) {
            keep[major_idx[k]] = false;
        }
        n_major = target;
    }
    let n_removed = train.len() - keep.iter().filter(|k| **k).count();

    let required = ceil_ratio(config.target_ratio, n_major).saturating_sub(minor_idx.len());
    if required > 0 && minor_idx.len() < 2 {
        return Err(BalanceError::InsufficientMinority {
            minority,
            available: minor_idx.len(),
            required,
        });
    }

    let mut instances: Vec<Instance> = train
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(i, _)| i.clone())
        .collect();

    if required > 0 {
        let neighbors = nearest_neighbors(train, &minor_idx, config.k_neighbors);
        instances.reserve(required);
        for _ in 0..required {
            let b = rng.random_range(0..minor_idx.len());
            let candidates = &neighbors[b];
            let n = candidates[rng.random_range(0..candidates.len())];
            let base = train[minor_idx[b]].features;
            let other = train[minor_idx[n]].features;
            let mut features = base.intersection(other);
            for item in base.symmetric_difference(other) {
                let from_base = rng.random_bool(0.5);
                let source = if from_base { base } else { other };
                if source.contains(item) {
                    features.insert(item);
                }
            }
            instances.push(Instance::synthetic(features, minority));
        }
    }

    Ok(BalanceOutcome {
        instances,
        minority,
        n_synthetic: required,
        n_removed,
    })
}

/// For each minority instance (position in `minor_idx`), the positions of its
/// `k` nearest other minority instances.
fn nearest_neighbors(train: &[Instance], minor_idx: &[usize], k: usize) -> Vec<Vec<usize>> {
    let k = k.min(minor_idx.len() - 1);
    minor_idx
        .iter()
        .enumerate()
        .map(|(a, &ia)| {
            let fa = train[ia].features;
            let mut others: Vec<(u32, usize)> = minor_idx
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(b, &ib)| (fa.hamming(train[ib].features), b))
                .collect();
            others.sort_unstable();
            others.truncate(k);
            others.into_iter().map(|(_, b)| b).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::items::{ItemId, Origin};

    fn inst(items: &[u8], label: Label, id: usize) -> Instance {
        Instance::real(items.iter().map(|&i| ItemId(i)).collect(), label, format!("m{id}"))
    }

    fn dataset(n_clean: usize, n_faulty: usize) -> Vec<Instance> {
        let mut v = Vec::new();
        for i in 0..n_clean {
            v.push(inst(&[0, (i % 5) as u8 + 1], Label::NotFaulty, i));
        }
        for i in 0..n_faulty {
            v.push(inst(&[10, (i % 3) as u8 + 11], Label::Faulty, 100 + i));
        }
        v
    }

    #[test]
    fn already_balanced_is_identity() {
        let data = dataset(8, 8);
        let out = balance(&data, &BalanceConfig::default()).unwrap();
        assert_eq!(out.instances, data);
        assert_eq!(out.n_synthetic, 0);
    }

    #[test]
    fn eight_to_two_gets_six_synthetic() {
        let data = dataset(8, 2);
        let out = balance(&data, &BalanceConfig::default()).unwrap();
        assert_eq!(out.n_synthetic, 6);
        assert_eq!(out.instances.len(), 16);
        assert_eq!(&out.instances[..10], &data[..]);
        for s in &out.instances[10..] {
            assert_eq!(s.label, Label::Faulty);
            assert_eq!(s.origin, Origin::Synthetic);
            assert!(s.method_id.is_none());
        }
    }

    #[test]
    fn too_few_minority() {
        let data = dataset(8, 1);
        assert!(matches!(
            balance(&data, &BalanceConfig::default()),
            Err(BalanceError::InsufficientMinority { available: 1, required: 7, .. })
        ));
    }

    #[test]
    fn invalid_config() {
        let data = dataset(4, 4);
        for cfg in [
            BalanceConfig { target_ratio: 0.0, ..Default::default() },
            BalanceConfig { target_ratio: 1.5, ..Default::default() },
            BalanceConfig { k_neighbors: 0, ..Default::default() },
        ] {
            assert!(matches!(balance(&data, &cfg), Err(BalanceError::InvalidConfig(_))));
        }
    }

    #[test]
    fn undersampling_drops_majority_then_fills() {
        let data = dataset(20, 4);
        let cfg = BalanceConfig { undersample_majority: true, ..Default::default() };
        let out = balance(&data, &cfg).unwrap();
        // Balanced majority size is 4; keep 4 + (20 - 4) / 2 = 12.
        assert_eq!(out.n_removed, 8);
        assert_eq!(out.n_synthetic, 8);
        let clean = out.instances.iter().filter(|i| i.label == Label::NotFaulty).count();
        assert_eq!(clean, 12);
    }

    #[test]
    fn ratio_arithmetic_is_exact_for_decimal_ratios() {
        assert_eq!(ceil_ratio(0.3, 10), 3);
        assert_eq!(ceil_ratio(0.5, 7), 4);
        assert_eq!(ceil_ratio(1.0, 0), 0);
    }

    #[test]
    fn neighbors_break_ties_by_order() {
        let data = vec![
            inst(&[1], Label::Faulty, 0),
            inst(&[2], Label::Faulty, 1),
            inst(&[3], Label::Faulty, 2),
            inst(&[1, 4], Label::Faulty, 3),
        ];
        let nn = nearest_neighbors(&data, &[0, 1, 2, 3], 2);
        assert_eq!(nn[0], vec![3, 1]);
        assert_eq!(nn[1], vec![0, 2]);
    }
}
