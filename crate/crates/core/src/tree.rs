//! Phylogenetic trees as points of tree-space.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::split::{compatible, LeafSet, Split};

/// Absolute tolerance used when comparing edge lengths of two trees.
pub const LENGTH_TOLERANCE: f64 = 1e-12;

/// Whether pendant (leaf) edges take part in norms and distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PendantMode {
    Include,
    #[default]
    Ignore,
}

impl std::str::FromStr for PendantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "include" => Ok(PendantMode::Include),
            "ignore" => Ok(PendantMode::Ignore),
            other => Err(Error::InvalidConfig(format!("unknown pendant mode {other:?}"))),
        }
    }
}

/// A tree: a set of pairwise compatible splits with strictly positive lengths.
///
/// Edges are kept sorted by split bits so lookups are binary searches and two
/// trees with the same edges compare equal field by field.
#[derive(Clone, Debug, PartialEq)]
pub struct PhyloTree {
    leaves: Arc<LeafSet>,
    edges: Vec<(Split, f64)>,
}

impl PhyloTree {
    /// Validates and builds a tree.
    pub fn new(leaves: Arc<LeafSet>, edges: impl IntoIterator<Item = (Split, f64)>) -> Result<Self> {
        let mut edges: Vec<(Split, f64)> = edges.into_iter().collect();
        for &(s, len) in &edges {
            if !leaves.contains_split(s) {
                return Err(Error::InvalidSplit(format!(
                    "split {s} is not valid for {} leaves",
                    leaves.len()
                )));
            }
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::NonPositiveLength {
                    split: leaves.format_split(s),
                    length: len,
                });
            }
        }
        edges.sort_unstable_by_key(|e| e.0);
        for w in edges.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateSplit(leaves.format_split(w[0].0)));
            }
        }
        let internal: Vec<Split> = edges
            .iter()
            .map(|e| e.0)
            .filter(|s| leaves.is_internal(*s))
            .collect();
        for (i, &a) in internal.iter().enumerate() {
            for &b in &internal[i + 1..] {
                if !compatible(a, b) {
                    return Err(Error::IncompatibleSplits(
                        leaves.format_split(a),
                        leaves.format_split(b),
                    ));
                }
            }
        }
        if internal.len() > leaves.max_internal() {
            return Err(Error::TooManySplits {
                got: internal.len(),
                max: leaves.max_internal(),
            });
        }
        Ok(PhyloTree { leaves, edges })
    }

    /// Builds a tree from edges already known to be valid, compatible and positive.
    pub(crate) fn from_sorted_unchecked(leaves: Arc<LeafSet>, edges: Vec<(Split, f64)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(edges.iter().all(|e| e.1 > 0.0));
        PhyloTree { leaves, edges }
    }

    pub(crate) fn from_unsorted_unchecked(leaves: Arc<LeafSet>, mut edges: Vec<(Split, f64)>) -> Self {
        edges.sort_unstable_by_key(|e| e.0);
        Self::from_sorted_unchecked(leaves, edges)
    }

    /// Star tree with no edges at all.
    pub fn star(leaves: Arc<LeafSet>) -> Self {
        PhyloTree {
            leaves,
            edges: Vec::new(),
        }
    }

    pub fn leaves(&self) -> &Arc<LeafSet> {
        &self.leaves
    }

    pub fn same_leaves(&self, other: &PhyloTree) -> bool {
        Arc::ptr_eq(&self.leaves, &other.leaves) || *self.leaves == *other.leaves
    }

    /// All edges, sorted by split.
    pub fn edges(&self) -> &[(Split, f64)] {
        &self.edges
    }

    pub fn internal_edges(&self) -> impl Iterator<Item = (Split, f64)> + '_ {
        self.edges.iter().copied().filter(|e| self.leaves.is_internal(e.0))
    }

    pub fn pendant_edges(&self) -> impl Iterator<Item = (Split, f64)> + '_ {
        self.edges.iter().copied().filter(|e| self.leaves.is_pendant(e.0))
    }

    /// Length of `s` in this tree, zero when absent.
    pub fn length(&self, s: Split) -> f64 {
        match self.edges.binary_search_by_key(&s, |e| e.0) {
            Ok(i) => self.edges[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn contains(&self, s: Split) -> bool {
        self.edges.binary_search_by_key(&s, |e| e.0).is_ok()
    }

    pub fn num_internal(&self) -> usize {
        self.internal_edges().count()
    }

    pub fn is_resolved(&self) -> bool {
        self.num_internal() == self.leaves.max_internal()
    }

    pub fn topology(&self) -> TopologyId {
        TopologyId::new(self.internal_edges().map(|e| e.0))
    }

    /// Topology keeping only internal edges longer than `min_length`.
    pub fn topology_above(&self, min_length: f64) -> TopologyId {
        TopologyId::new(self.internal_edges().filter(|e| e.1 > min_length).map(|e| e.0))
    }

    /// Euclidean norm of the edge-length vector.
    pub fn norm(&self, mode: PendantMode) -> f64 {
        self.edges
            .iter()
            .filter(|e| mode == PendantMode::Include || self.leaves.is_internal(e.0))
            .map(|e| e.1 * e.1)
            .sum::<f64>()
            .sqrt()
    }

    pub fn total_internal_length(&self) -> f64 {
        self.internal_edges().map(|e| e.1).sum()
    }

    /// Same tree with every pendant edge removed.
    pub fn without_pendants(&self) -> PhyloTree {
        PhyloTree {
            leaves: self.leaves.clone(),
            edges: self.internal_edges().collect(),
        }
    }

    /// Same split set, and every length within `tol`.
    pub fn approx_eq(&self, other: &PhyloTree, tol: f64) -> bool {
        self.same_leaves(other)
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() <= tol)
    }

    /// Like [`approx_eq`](Self::approx_eq) but splits shorter than `tol` may be missing on either side.
    pub fn approx_eq_lengths(&self, other: &PhyloTree, tol: f64) -> bool {
        if !self.same_leaves(other) {
            return false;
        }
        let check = |a: &PhyloTree, b: &PhyloTree| {
            a.edges.iter().all(|&(s, l)| (l - b.length(s)).abs() <= tol)
        };
        check(self, other) && check(other, self)
    }
}

impl fmt::Display for PhyloTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::newick::write_newick(self))
    }
}

/// The set of internal splits of a tree, identifying its orthant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TopologyId {
    splits: Vec<Split>,
}

impl TopologyId {
    pub fn new(splits: impl IntoIterator<Item = Split>) -> Self {
        let mut splits: Vec<Split> = splits.into_iter().collect();
        splits.sort_unstable();
        splits.dedup();
        TopologyId { splits }
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    /// Compact machine key: hex masks joined by `:`; `star` for no splits.
    pub fn key(&self) -> String {
        if self.splits.is_empty() {
            return "star".into();
        }
        self.splits
            .iter()
            .map(|s| format!("{:x}", s.bits()))
            .collect::<Vec<_>>()
            .join(":")
    }

    /// Readable form, e.g. `{B,C}{D,E}`.
    pub fn describe(&self, leaves: &LeafSet) -> String {
        if self.splits.is_empty() {
            return "star".into();
        }
        self.splits.iter().map(|s| leaves.format_split(*s)).collect()
    }
}

/// Rooted view of a split system: every clade (non-root side of a split, every
/// singleton leaf, and the full set) with its parent and children.
#[derive(Clone, Debug)]
pub(crate) struct CladeTree {
    pub masks: Vec<u64>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub root: usize,
}

impl CladeTree {
    /// `masks` may contain duplicates, singletons and the full mask; they are added if missing.
    pub fn build(full: u64, masks: impl IntoIterator<Item = u64>) -> CladeTree {
        let mut all: Vec<u64> = masks.into_iter().filter(|&m| m != 0).collect();
        all.push(full);
        let mut m = full;
        while m != 0 {
            all.push(m & m.wrapping_neg());
            m &= m - 1;
        }
        // Larger clades first; ties cannot nest so their order is irrelevant.
        all.sort_unstable_by(|a, b| b.count_ones().cmp(&a.count_ones()).then(a.cmp(b)));
        all.dedup();
        let n = all.len();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for i in 1..n {
            // Smallest earlier clade containing this one.
            let mut best: Option<usize> = None;
            for j in (0..i).rev() {
                if all[i] & all[j] == all[i] && all[j] != all[i] {
                    match best {
                        Some(b) if all[b].count_ones() <= all[j].count_ones() => {}
                        _ => best = Some(j),
                    }
                    break;
                }
            }
            let p = best.expect("full mask contains every clade");
            parent[i] = Some(p);
            children[p].push(i);
        }
        for c in &mut children {
            c.sort_unstable_by_key(|&i| all[i]);
        }
        CladeTree {
            masks: all,
            parent,
            children,
            root: 0,
        }
    }

    pub fn of_tree(tree: &PhyloTree) -> CladeTree {
        CladeTree::build(
            tree.leaves().full_mask(),
            tree.edges().iter().map(|e| e.0.bits()),
        )
    }

    pub fn find(&self, mask: u64) -> Option<usize> {
        self.masks.iter().position(|&m| m == mask)
    }
}
