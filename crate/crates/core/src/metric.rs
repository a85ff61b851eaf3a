//! The per-method metric vocabulary.
//!
//! Three families: numeric software-analysis metrics (discretized into
//! tertiles), construct counts (turned into "has-no" items) and boolean
//! method categories (passed through unchanged).
//!
//! The category predicates and the exact metric list are stand-ins chosen
//! for this toolkit; see the README for their definitions.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! metric_enum {
    (
        $(#[$meta:meta])*
        $name:ident { $($variant:ident => ($label:literal, $column:literal)),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const COUNT: usize = [$($name::$variant),+].len();

            pub fn index(self) -> usize {
                self as usize
            }

            /// Display name, also the stem of derived item names.
            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }

            /// Column name in the metrics CSV.
            pub fn column(self) -> &'static str {
                match self {
                    $($name::$variant => $column),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

metric_enum! {
    NumericMetricId {
        Sloc => ("SLOC", "sloc"),
        CyclomaticComplexity => ("CyclomaticComplexity", "cyclomatic"),
        MaxNestingDepth => ("MaxNestingDepth", "max_nesting"),
        NumParameters => ("NumParameters", "num_params"),
        NumStatements => ("NumStatements", "num_statements"),
    }
}

metric_enum! {
    CountMetricId {
        Loops => ("Loops", "cnt_loops"),
        Conditions => ("Conditions", "cnt_conditions"),
        SwitchCases => ("SwitchCases", "cnt_switch_cases"),
        TryBlocks => ("TryBlocks", "cnt_try"),
        Returns => ("Returns", "cnt_returns"),
        Throws => ("Throws", "cnt_throws"),
        Casts => ("Casts", "cnt_casts"),
        LogicalOperators => ("LogicalOperators", "cnt_logical"),
        ArithmeticOperators => ("ArithmeticOperators", "cnt_arith"),
        LocalVariables => ("LocalVariables", "cnt_locals"),
    }
}

metric_enum! {
    CategoryId {
        Getter => ("Getter", "cat_getter"),
        Setter => ("Setter", "cat_setter"),
        Constructor => ("Constructor", "cat_constructor"),
        Empty => ("Empty", "cat_empty"),
        Delegation => ("Delegation", "cat_delegation"),
        EqualsHashCodeToString => ("EqualsHashCodeToString", "cat_eqhash"),
    }
}

/// Set of method categories, one bit per [`CategoryId`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CategorySet(u8);

impl CategorySet {
    pub fn empty() -> Self {
        CategorySet(0)
    }

    pub fn insert(&mut self, category: CategoryId) {
        self.0 |= 1 << category.index();
    }

    pub fn remove(&mut self, category: CategoryId) {
        self.0 &= !(1 << category.index());
    }

    pub fn set(&mut self, category: CategoryId, on: bool) {
        if on {
            self.insert(category);
        } else {
            self.remove(category);
        }
    }

    pub fn contains(self, category: CategoryId) -> bool {
        self.0 & (1 << category.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = CategoryId> {
        CategoryId::ALL.iter().copied().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<CategoryId> for CategorySet {
    fn from_iter<I: IntoIterator<Item = CategoryId>>(iter: I) -> Self {
        let mut set = CategorySet::empty();
        for c in iter {
            set.insert(c);
        }
        set
    }
}

/// Raw metrics of one method. Every metric of the fixed set is always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MetricVector {
    pub numeric: [u32; NumericMetricId::COUNT],
    pub counts: [u32; CountMetricId::COUNT],
    pub categories: CategorySet,
}

impl MetricVector {
    pub fn numeric(&self, id: NumericMetricId) -> u32 {
        self.numeric[id.index()]
    }

    pub fn count(&self, id: CountMetricId) -> u32 {
        self.counts[id.index()]
    }

    pub fn has(&self, id: CategoryId) -> bool {
        self.categories.contains(id)
    }

    pub fn set_numeric(&mut self, id: NumericMetricId, value: u32) {
        self.numeric[id.index()] = value;
    }

    pub fn set_count(&mut self, id: CountMetricId, value: u32) {
        self.counts[id.index()] = value;
    }

    pub fn sloc(&self) -> u32 {
        self.numeric(NumericMetricId::Sloc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_families_have_fixed_sizes() {
        assert_eq!(NumericMetricId::COUNT, 5);
        assert_eq!(CountMetricId::COUNT, 10);
        assert_eq!(CategoryId::COUNT, 6);
        for (i, m) in CountMetricId::ALL.iter().enumerate() {
            assert_eq!(m.index(), i);
        }
    }

    #[test]
    fn category_set_roundtrip() {
        let mut s = CategorySet::empty();
        s.insert(CategoryId::Getter);
        s.insert(CategoryId::Delegation);
        assert!(s.contains(CategoryId::Getter));
        assert!(!s.contains(CategoryId::Setter));
        let v: Vec<_> = s.iter().collect();
        assert_eq!(v, vec![CategoryId::Getter, CategoryId::Delegation]);
        s.set(CategoryId::Getter, false);
        assert!(!s.contains(CategoryId::Getter));
    }
}
