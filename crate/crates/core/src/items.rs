//! Binary items and compact item sets.
//!
//! Every binary attribute produced by discretization is an [`ItemId`], an
//! index into the item table of an [`ItemSchema`](crate::discretize::ItemSchema).
//! Sets of items are stored as a 64-bit mask, which bounds the item universe
//! at [`ItemSet::CAPACITY`] items.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemId(pub u8);

impl ItemId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A set of items as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ItemSet(u64);

impl ItemSet {
    pub const CAPACITY: usize = 64;

    pub const fn empty() -> Self {
        ItemSet(0)
    }

    pub const fn from_bits(bits: u64) -> Self {
        ItemSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn single(item: ItemId) -> Self {
        ItemSet(1u64 << item.0)
    }

    pub fn insert(&mut self, item: ItemId) {
        debug_assert!(item.index() < Self::CAPACITY);
        self.0 |= 1u64 << item.0;
    }

    pub fn remove(&mut self, item: ItemId) {
        self.0 &= !(1u64 << item.0);
    }

    pub fn with(mut self, item: ItemId) -> Self {
        self.insert(item);
        self
    }

    pub fn contains(self, item: ItemId) -> bool {
        self.0 & (1u64 << item.0) != 0
    }

    pub fn is_subset_of(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & other.0)
    }

    pub fn difference(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & !other.0)
    }

    pub fn symmetric_difference(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 ^ other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Items in ascending id order.
    pub fn iter(self) -> ItemIter {
        ItemIter(self.0)
    }

    pub fn last(self) -> Option<ItemId> {
        if self.0 == 0 {
            None
        } else {
            Some(ItemId(63 - self.0.leading_zeros() as u8))
        }
    }

    /// Hamming distance between two sets.
    pub fn hamming(self, other: ItemSet) -> u32 {
        (self.0 ^ other.0).count_ones()
    }

    /// Canonical itemset order: by size, then lexicographically over the
    /// ascending item id sequence.
    pub fn canonical_cmp(&self, other: &ItemSet) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.lex_cmp(other))
    }

    /// Lexicographic comparison of the ascending item id sequences.
    pub fn lex_cmp(&self, other: &ItemSet) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl FromIterator<ItemId> for ItemSet {
    fn from_iter<I: IntoIterator<Item = ItemId>>(iter: I) -> Self {
        let mut set = ItemSet::empty();
        for item in iter {
            set.insert(item);
        }
        set
    }
}

impl IntoIterator for ItemSet {
    type Item = ItemId;
    type IntoIter = ItemIter;

    fn into_iter(self) -> ItemIter {
        self.iter()
    }
}

pub struct ItemIter(u64);

impl Iterator for ItemIter {
    type Item = ItemId;

    fn next(&mut self) -> Option<ItemId> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(ItemId(tz as u8))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for ItemIter {}

/// Class label of a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Faulty,
    NotFaulty,
}

impl Label {
    pub fn from_faulty(faulty: bool) -> Self {
        if faulty {
            Label::Faulty
        } else {
            Label::NotFaulty
        }
    }

    pub fn is_faulty(self) -> bool {
        self == Label::Faulty
    }

    pub fn other(self) -> Self {
        match self {
            Label::Faulty => Label::NotFaulty,
            Label::NotFaulty => Label::Faulty,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Faulty => "Faulty",
            Label::NotFaulty => "NotFaulty",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    Real,
    Synthetic,
}

/// A method (or synthetic minority sample) as a set of binary feature items
/// plus its label.
///
/// The label is kept apart from the feature bits so that exactly one of
/// `Faulty`/`NotFaulty` holds by construction; [`Instance::items_with_label`]
/// renders the full item set when the schema's label item ids are known.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub features: ItemSet,
    pub label: Label,
    pub origin: Origin,
    pub method_id: Option<String>,
}

impl Instance {
    pub fn real(features: ItemSet, label: Label, method_id: impl Into<String>) -> Self {
        Instance {
            features,
            label,
            origin: Origin::Real,
            method_id: Some(method_id.into()),
        }
    }

    pub fn synthetic(features: ItemSet, label: Label) -> Self {
        Instance {
            features,
            label,
            origin: Origin::Synthetic,
            method_id: None,
        }
    }

    pub fn items_with_label(&self, faulty_item: ItemId, not_faulty_item: ItemId) -> ItemSet {
        match self.label {
            Label::Faulty => self.features.with(faulty_item),
            Label::NotFaulty => self.features.with(not_faulty_item),
        }
    }
}
