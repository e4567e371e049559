//! Leaf sets and splits.
//!
//! A tree on `N + 1` leaves has leaf `0` designated as the root. Every edge
//! cuts the leaf set in two, and we store the side that does *not* contain the
//! root as a bitmask over leaf indices `1..=N`. Two splits are then compatible
//! exactly when their sides are nested or disjoint, which is a couple of
//! bitwise operations.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of leaves, root included.
pub const MAX_LEAVES: usize = 64;

/// Ordered set of leaf labels; index 0 is the root leaf.
#[derive(Clone, Debug)]
pub struct LeafSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for LeafSet {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for LeafSet {}

impl LeafSet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidLeafSet(format!(
                "need at least 2 leaves, got {}",
                labels.len()
            )));
        }
        if labels.len() > MAX_LEAVES {
            return Err(Error::InvalidLeafSet(format!(
                "at most {MAX_LEAVES} leaves are supported, got {}",
                labels.len()
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidLeafSet("empty leaf label".into()));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateTaxon(label.clone()));
            }
        }
        Ok(LeafSet { labels, index })
    }

    /// Leaves labelled `"0"`, `"1"`, ..., `"n"`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..=n).map(|i| i.to_string()).collect())
    }

    /// Builds a leaf set from a `label -> index` map. Indices must be exactly `0..len`.
    pub fn from_index_map(map: &HashMap<String, usize>) -> Result<Self> {
        let mut labels = vec![String::new(); map.len()];
        for (label, &i) in map {
            if i >= labels.len() || !labels[i].is_empty() {
                return Err(Error::InvalidLeafSet(format!(
                    "leaf map indices must be a permutation of 0..{}, bad index {i} for {label:?}",
                    map.len()
                )));
            }
            labels[i] = label.clone();
        }
        Self::new(labels)
    }

    /// `N`: number of non-root leaves.
    pub fn n(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn root_label(&self) -> &str {
        &self.labels[0]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Bitmask with bits `1..=N` set.
    pub fn full_mask(&self) -> u64 {
        let n = self.n();
        if n >= 63 {
            u64::MAX & !1
        } else {
            ((1u64 << (n + 1)) - 1) & !1
        }
    }

    /// The split whose non-root side is every non-root leaf, i.e. the root's pendant edge.
    pub fn root_split(&self) -> Split {
        Split(self.full_mask())
    }

    /// Builds a split from either side of the bipartition, given as leaf indices.
    pub fn split_from_indices(&self, side: &[usize]) -> Result<Split> {
        let mut mask = 0u64;
        for &i in side {
            if i > self.n() {
                return Err(Error::InvalidSplit(format!("leaf index {i} out of range")));
            }
            mask |= 1u64 << i;
        }
        self.split_from_mask(mask)
    }

    /// Builds a split from either side of the bipartition, given as leaf labels.
    pub fn split_from_labels<S: AsRef<str>>(&self, side: &[S]) -> Result<Split> {
        let idx = side
            .iter()
            .map(|l| {
                self.index_of(l.as_ref())
                    .ok_or_else(|| Error::InvalidSplit(format!("unknown leaf {:?}", l.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        self.split_from_indices(&idx)
    }

    /// Normalizes a bitmask over all leaves (bit 0 = root) to canonical form.
    pub fn split_from_mask(&self, mask: u64) -> Result<Split> {
        let all = self.full_mask() | 1;
        if mask & !all != 0 {
            return Err(Error::InvalidSplit(format!("mask {mask:#x} has bits outside the leaf set")));
        }
        let side = if mask & 1 == 1 { all ^ mask } else { mask };
        if side == 0 {
            return Err(Error::InvalidSplit("a split needs two nonempty sides".into()));
        }
        Ok(Split(side))
    }

    /// Whether `s` is a valid split over this leaf set.
    pub fn contains_split(&self, s: Split) -> bool {
        s.0 != 0 && s.0 & !self.full_mask() == 0
    }

    pub fn is_pendant(&self, s: Split) -> bool {
        s.size() == 1 || s.0 == self.full_mask()
    }

    pub fn is_internal(&self, s: Split) -> bool {
        let k = s.size();
        k >= 2 && (k as usize) < self.n()
    }

    /// Maximum number of internal splits, `N - 2`.
    pub fn max_internal(&self) -> usize {
        self.n().saturating_sub(2)
    }

    /// Human-readable form listing the non-root side, e.g. `{B,C}`.
    pub fn format_split(&self, s: Split) -> String {
        let mut out = String::from("{");
        for (k, i) in s.leaves().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(self.labels.get(i).map(String::as_str).unwrap_or("?"));
        }
        out.push('}');
        out
    }

    /// Every possible split over this leaf set (`2^N - 1` of them). Only sensible for small `N`.
    pub fn all_splits(&self) -> impl Iterator<Item = Split> + '_ {
        let n = self.n() as u32;
        (1u64..(1u64 << n)).map(|m| Split(m << 1))
    }
}

/// A bipartition of the leaf set, stored as the side not containing the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Split(pub(crate) u64);

impl Split {
    /// Raw constructor; callers are responsible for the mask being a valid non-root side.
    pub const fn from_bits(bits: u64) -> Self {
        Split(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn size(self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains_leaf(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    /// Leaf indices on the non-root side, ascending.
    pub fn leaves(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(i)
            }
        })
    }

    #[inline]
    pub fn compatible_with(self, other: Split) -> bool {
        compatible(self, other)
    }
}

/// Two splits can coexist in a tree iff one of the four side intersections is
/// empty. Both complements contain the root, so only three cases remain.
#[inline]
pub fn compatible(a: Split, b: Split) -> bool {
    let both = a.0 & b.0;
    both == 0 || both == a.0 || both == b.0
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.leaves().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t5() -> LeafSet {
        LeafSet::numbered(5).unwrap()
    }

    #[test]
    fn compatibility_examples() {
        let l = t5();
        let s23 = l.split_from_indices(&[2, 3]).unwrap();
        let s234 = l.split_from_indices(&[2, 3, 4]).unwrap();
        let s345 = l.split_from_indices(&[3, 4, 5]).unwrap();
        assert!(compatible(s23, s234));
        assert!(compatible(s23, s23));
        assert!(!compatible(s23, s345));
    }

    #[test]
    fn root_side_is_normalized() {
        let l = t5();
        let a = l.split_from_indices(&[0, 1]).unwrap();
        let b = l.split_from_indices(&[2, 3, 4, 5]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.leaves().collect::<Vec<_>>(), vec![2, 3, 4, 5]);
        assert!(l.is_internal(a));
    }

    #[test]
    fn degenerate_splits_rejected() {
        let l = t5();
        assert!(l.split_from_mask(0).is_err());
        assert!(l.split_from_mask(0b111111).is_err());
        assert!(l.split_from_mask(1 << 9).is_err());
    }

    #[test]
    fn pendant_classification() {
        let l = t5();
        assert!(l.is_pendant(l.split_from_indices(&[3]).unwrap()));
        assert!(l.is_pendant(l.split_from_indices(&[0]).unwrap()));
        assert!(!l.is_internal(l.root_split()));
        assert_eq!(l.format_split(l.split_from_indices(&[2, 3]).unwrap()), "{2,3}");
    }

    #[test]
    fn split_count_is_two_to_the_n_minus_one() {
        for n in 1..=10 {
            let l = LeafSet::numbered(n).unwrap();
            let count = l.all_splits().filter(|s| l.contains_split(*s)).count();
            assert_eq!(count, (1usize << n) - 1);
        }
    }

    #[test]
    fn pendant_is_compatible_with_everything() {
        let l = LeafSet::numbered(6).unwrap();
        let all: Vec<_> = l.all_splits().collect();
        for &p in all.iter().filter(|s| l.is_pendant(**s)) {
            for &s in &all {
                assert!(compatible(p, s));
            }
        }
    }

    #[test]
    fn leaf_map_round_trip() {
        let mut map = HashMap::new();
        map.insert("r".to_string(), 0);
        map.insert("b".to_string(), 2);
        map.insert("a".to_string(), 1);
        let l = LeafSet::from_index_map(&map).unwrap();
        assert_eq!(l.labels(), &["r", "a", "b"]);
        map.insert("c".to_string(), 7);
        assert!(LeafSet::from_index_map(&map).is_err());
    }
}
