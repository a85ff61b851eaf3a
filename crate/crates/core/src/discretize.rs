//! Discretization of raw metrics into binary items.
//!
//! Numeric metrics are split at their training-set tertiles into `_Low`,
//! `_Mid` and `_High` items. Each construct count becomes a single "has-no"
//! item (`NoLoops` fires iff the loop count is zero). Categories pass through.
//!
//! The item table is fixed and ordered:
//!
//! | ids     | items                                       |
//! |---------|---------------------------------------------|
//! | 0..15   | `<Numeric>_Low`, `_Mid`, `_High` per metric |
//! | 15..25  | `No<Count>` per count metric                |
//! | 25..31  | `Is<Category>` per category                 |
//! | 31, 32  | `Faulty`, `NotFaulty`                       |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::MethodRecord;
use crate::items::{Instance, ItemId, ItemSet, Label};
use crate::metric::{CategoryId, CountMetricId, NumericMetricId};

pub const BINS: [&str; 3] = ["Low", "Mid", "High"];

const COUNT_BASE: usize = NumericMetricId::COUNT * 3;
const CATEGORY_BASE: usize = COUNT_BASE + CountMetricId::COUNT;
const LABEL_BASE: usize = CATEGORY_BASE + CategoryId::COUNT;

/// Total number of items, labels included.
pub const N_ITEMS: usize = LABEL_BASE + 2;
/// Number of feature (non-label) items.
pub const N_FEATURE_ITEMS: usize = LABEL_BASE;

pub const FAULTY_ITEM: ItemId = ItemId(LABEL_BASE as u8);
pub const NOT_FAULTY_ITEM: ItemId = ItemId(LABEL_BASE as u8 + 1);

pub fn tertile_item(metric: NumericMetricId, bin: usize) -> ItemId {
    debug_assert!(bin < 3);
    ItemId((metric.index() * 3 + bin) as u8)
}

pub fn no_item(metric: CountMetricId) -> ItemId {
    ItemId((COUNT_BASE + metric.index()) as u8)
}

pub fn category_item(category: CategoryId) -> ItemId {
    ItemId((CATEGORY_BASE + category.index()) as u8)
}

pub fn label_item(label: Label) -> ItemId {
    match label {
        Label::Faulty => FAULTY_ITEM,
        Label::NotFaulty => NOT_FAULTY_ITEM,
    }
}

/// Human-readable item name, e.g. `SLOC_Mid`, `NoLoops`, `IsGetter`.
pub fn item_name(item: ItemId) -> String {
    let i = item.index();
    if i < COUNT_BASE {
        format!("{}_{}", NumericMetricId::ALL[i / 3].name(), BINS[i % 3])
    } else if i < CATEGORY_BASE {
        format!("No{}", CountMetricId::ALL[i - COUNT_BASE].name())
    } else if i < LABEL_BASE {
        format!("Is{}", CategoryId::ALL[i - CATEGORY_BASE].name())
    } else if item == FAULTY_ITEM {
        Label::Faulty.name().to_string()
    } else if item == NOT_FAULTY_ITEM {
        Label::NotFaulty.name().to_string()
    } else {
        format!("{item}")
    }
}

pub fn item_by_name(name: &str) -> Option<ItemId> {
    (0..N_ITEMS as u8).map(ItemId).find(|&i| item_name(i) == name)
}

/// Names of an item set's members in ascending id order.
pub fn itemset_names(set: ItemSet) -> Vec<String> {
    set.iter().map(item_name).collect()
}

/// Tertile boundaries of one numeric metric. `collapsed` marks `t1 == t2`,
/// where the middle bin is unreachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tertiles {
    pub t1: u32,
    pub t2: u32,
    pub collapsed: bool,
}

impl Tertiles {
    pub fn new(t1: u32, t2: u32) -> Self {
        Tertiles {
            t1,
            t2,
            collapsed: t1 == t2,
        }
    }

    /// 0 = Low (`v <= t1`), 1 = Mid (`t1 < v <= t2`), 2 = High (`v > t2`).
    pub fn bin(&self, v: u32) -> usize {
        if v <= self.t1 {
            0
        } else if v <= self.t2 {
            1
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FitError {
    #[error("cannot compute tertiles of an empty list")]
    EmptyValues,
    #[error("cannot fit a schema on an empty training set")]
    EmptyTrainingSet,
}

#[derive(Debug, Error)]
pub enum SchemaFormatError {
    #[error("schema parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("schema: {0}")]
    Invalid(String),
}

/// Nearest-rank tertiles: with the values sorted ascending, `t1` is the value
/// at rank `ceil(n/3)` and `t2` the value at rank `ceil(2n/3)` (1-based).
pub fn compute_tertiles(values: &[u32]) -> Result<(u32, u32), FitError> {
    if values.is_empty() {
        return Err(FitError::EmptyValues);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let r1 = n.div_ceil(3);
    let r2 = (2 * n).div_ceil(3);
    Ok((sorted[r1 - 1], sorted[r2 - 1]))
}

/// Fitted mapping from raw metrics to items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemSchema {
    boundaries: [Tertiles; NumericMetricId::COUNT],
}

impl ItemSchema {
    pub fn from_boundaries(boundaries: [Tertiles; NumericMetricId::COUNT]) -> Self {
        ItemSchema { boundaries }
    }

    pub fn boundaries(&self, metric: NumericMetricId) -> Tertiles {
        self.boundaries[metric.index()]
    }

    pub fn n_items(&self) -> usize {
        N_ITEMS
    }

    pub fn faulty_item(&self) -> ItemId {
        FAULTY_ITEM
    }

    pub fn not_faulty_item(&self) -> ItemId {
        NOT_FAULTY_ITEM
    }

    pub fn to_file(&self) -> SchemaFile {
        let numeric = NumericMetricId::ALL
            .iter()
            .map(|m| (m.name().to_string(), self.boundaries(*m)))
            .collect();
        SchemaFile {
            counts: CountMetricId::ALL
                .iter()
                .map(|m| (m.name().to_string(), item_name(no_item(*m))))
                .collect(),
            categories: CategoryId::ALL
                .iter()
                .map(|c| (c.name().to_string(), item_name(category_item(*c))))
                .collect(),
            labels: vec![item_name(FAULTY_ITEM), item_name(NOT_FAULTY_ITEM)],
            numeric,
        }
    }

    pub fn from_file(file: &SchemaFile) -> Result<Self, SchemaFormatError> {
        let mut boundaries = [Tertiles::new(0, 0); NumericMetricId::COUNT];
        for m in NumericMetricId::ALL {
            let t = file
                .numeric
                .get(m.name())
                .ok_or_else(|| SchemaFormatError::Invalid(format!("missing numeric metric {m}")))?;
            if t.t1 > t.t2 {
                return Err(SchemaFormatError::Invalid(format!("{m}: t1 > t2")));
            }
            if t.collapsed != (t.t1 == t.t2) {
                return Err(SchemaFormatError::Invalid(format!("{m}: inconsistent collapsed flag")));
            }
            boundaries[m.index()] = *t;
        }
        if file.numeric.len() != NumericMetricId::COUNT {
            return Err(SchemaFormatError::Invalid("unknown numeric metric".into()));
        }
        let expected = ItemSchema { boundaries }.to_file();
        if expected.counts != file.counts || expected.categories != file.categories || expected.labels != file.labels {
            return Err(SchemaFormatError::Invalid("item table does not match this version".into()));
        }
        Ok(ItemSchema { boundaries })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("schema serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, SchemaFormatError> {
        let file: SchemaFile = toml::from_str(text)?;
        Self::from_file(&file)
    }
}

/// Serialized form of a schema. Maps are key-sorted, so output is
/// deterministic.
///
/// - `numeric.<Metric>.{t1,t2,collapsed}`: tertile boundaries
/// - `counts.<Metric>`: the derived "has-no" item name
/// - `categories.<Category>`: the pass-through item name
/// - `labels`: the two label item names
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaFile {
    pub labels: Vec<String>,
    pub categories: BTreeMap<String, String>,
    pub counts: BTreeMap<String, String>,
    pub numeric: BTreeMap<String, Tertiles>,
}

/// Fit tertile boundaries on training records only.
pub fn fit_schema(training: &[MethodRecord]) -> Result<ItemSchema, FitError> {
    if training.is_empty() {
        return Err(FitError::EmptyTrainingSet);
    }
    let mut boundaries = [Tertiles::new(0, 0); NumericMetricId::COUNT];
    for m in NumericMetricId::ALL {
        let values: Vec<u32> = training.iter().map(|r| r.metrics.numeric(*m)).collect();
        let (t1, t2) = compute_tertiles(&values)?;
        boundaries[m.index()] = Tertiles::new(t1, t2);
    }
    Ok(ItemSchema { boundaries })
}

/// Feature items of a record under a fitted schema.
pub fn features(record: &MethodRecord, schema: &ItemSchema) -> ItemSet {
    let mut set = ItemSet::empty();
    for m in NumericMetricId::ALL {
        let bin = schema.boundaries(*m).bin(record.metrics.numeric(*m));
        set.insert(tertile_item(*m, bin));
    }
    for c in CountMetricId::ALL {
        if record.metrics.count(*c) == 0 {
            set.insert(no_item(*c));
        }
    }
    for c in CategoryId::ALL {
        if record.metrics.has(*c) {
            set.insert(category_item(*c));
        }
    }
    set
}

/// Map a record to an instance with a schema fitted elsewhere.
pub fn apply_schema(record: &MethodRecord, schema: &ItemSchema) -> Instance {
    Instance::real(
        features(record, schema),
        Label::from_faulty(record.faulty),
        record.method_id.clone(),
    )
}

pub fn apply_all(records: &[MethodRecord], schema: &ItemSchema) -> Vec<Instance> {
    records.iter().map(|r| apply_schema(r, schema)).collect()
}
