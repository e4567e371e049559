//! Kingman and multispecies coalescent trees.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::rng;
use crate::split::{LeafSet, Split};
use crate::tree::{CladeTree, PhyloTree};

/// Default population-size parameter of the multispecies coalescent.
pub const DEFAULT_THETA: f64 = 1.0;

/// A lineage: the leaves below it and the time of its lower node.
#[derive(Clone, Copy, Debug)]
struct Lineage {
    mask: u64,
    time: f64,
}

fn pairs(k: usize) -> f64 {
    (k * (k - 1)) as f64 / 2.0
}

/// Merges two uniformly chosen lineages at time `t`, recording their edges.
fn merge_random<R: Rng + ?Sized>(lineages: &mut Vec<Lineage>, t: f64, edges: &mut Vec<(u64, f64)>, rng: &mut R) {
    let k = lineages.len();
    let i = rng.random_range(0..k);
    let mut j = rng.random_range(0..k - 1);
    if j >= i {
        j += 1;
    }
    let (a, b) = (lineages[i], lineages[j]);
    edges.push((a.mask, t - a.time));
    edges.push((b.mask, t - b.time));
    let (lo, hi) = (i.min(j), i.max(j));
    lineages.swap_remove(hi);
    lineages.swap_remove(lo);
    lineages.push(Lineage {
        mask: a.mask | b.mask,
        time: t,
    });
}

fn assemble(leaves: &Arc<LeafSet>, edges: Vec<(u64, f64)>) -> Result<PhyloTree> {
    let edges = edges
        .into_iter()
        .filter(|e| e.1 > 0.0)
        .map(|(m, len)| (Split::from_bits(m), len))
        .collect::<Vec<_>>();
    PhyloTree::new(leaves.clone(), edges)
}

/// Kingman coalescent tree on leaves `"0".."n_taxa"`, with `"0"` as the root
/// leaf attached at the coalescent root.
pub fn kingman_tree(n_taxa: usize, seed: u64) -> Result<PhyloTree> {
    let leaves = Arc::new(LeafSet::numbered(n_taxa)?);
    kingman_tree_with(&leaves, &mut rng::stream(seed, &[]))
}

/// Kingman coalescent over the non-root leaves of `leaves`: at `k` lineages
/// the waiting time is exponential with rate `C(k, 2)` and a uniform pair merges.
pub fn kingman_tree_with<R: Rng + ?Sized>(leaves: &Arc<LeafSet>, rng: &mut R) -> Result<PhyloTree> {
    if leaves.n() < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "the coalescent needs at least 2 taxa, got {}",
            leaves.n()
        )));
    }
    let mut lineages: Vec<Lineage> = (1..=leaves.n())
        .map(|i| Lineage {
            mask: 1 << i,
            time: 0.0,
        })
        .collect();
    let mut edges = Vec::with_capacity(2 * leaves.n());
    let mut t = 0.0;
    while lineages.len() > 1 {
        let rate = pairs(lineages.len());
        t += Exp::new(rate).expect("positive rate").sample(rng);
        merge_random(&mut lineages, t, &mut edges, rng);
    }
    assemble(leaves, edges)
}

/// Gene tree from the multispecies coalescent inside `species`, one lineage per
/// species. Within a branch `k` lineages coalesce at rate `C(k, 2) / theta`;
/// lineages that reach the root keep coalescing without bound.
pub fn constrained_gene_tree(species: &PhyloTree, theta: f64, seed: u64) -> Result<PhyloTree> {
    constrained_gene_tree_with(species, theta, &mut rng::stream(seed, &[]))
}

pub fn constrained_gene_tree_with<R: Rng + ?Sized>(species: &PhyloTree, theta: f64, rng: &mut R) -> Result<PhyloTree> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("theta must be positive, got {theta}")));
    }
    let leaves = species.leaves();
    if leaves.n() < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "the coalescent needs at least 2 taxa, got {}",
            leaves.n()
        )));
    }
    let clades = CladeTree::of_tree(species);
    let mut edges = Vec::with_capacity(2 * leaves.n());
    // Post-order: clades are sorted by decreasing size, so children come later.
    let n = clades.masks.len();
    let mut passed: Vec<Vec<Lineage>> = vec![Vec::new(); n];
    let mut top: Vec<f64> = vec![0.0; n];
    for c in (0..n).rev() {
        let mask = clades.masks[c];
        let (mut lineages, start) = if clades.children[c].is_empty() {
            (
                vec![Lineage {
                    mask,
                    time: 0.0,
                }],
                0.0,
            )
        } else {
            let mut l = Vec::new();
            let mut start: f64 = 0.0;
            for &ch in &clades.children[c] {
                l.append(&mut passed[ch]);
                start = start.max(top[ch]);
            }
            (l, start)
        };
        let end = if c == clades.root {
            f64::INFINITY
        } else {
            start + species.length(Split::from_bits(mask))
        };
        let mut t = start;
        while lineages.len() > 1 {
            let rate = pairs(lineages.len()) / theta;
            t += Exp::new(rate).expect("positive rate").sample(rng);
            if t > end {
                break;
            }
            merge_random(&mut lineages, t, &mut edges, rng);
        }
        top[c] = end;
        passed[c] = lineages;
    }
    assemble(leaves, edges)
}
