//! Topology rearrangements and random walks on tree-space.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::split::Split;
use crate::tree::{CladeTree, PhyloTree};

/// The four subtrees around internal clade `e`: its two children and its
/// sibling (the fourth is everything else).
fn nni_parts(clades: &CladeTree, e: u64) -> Result<(u64, u64, u64)> {
    let c = clades
        .find(e)
        .ok_or_else(|| Error::InvalidEdge(format!("clade {e:#x} is not in the tree")))?;
    let p = clades.parent[c].ok_or_else(|| Error::InvalidEdge("the root has no interchange".into()))?;
    let (kids, sibs) = (&clades.children[c], &clades.children[p]);
    if kids.len() != 2 || sibs.len() != 2 {
        return Err(Error::InvalidEdge(format!(
            "both ends of edge {e:#x} must have degree three"
        )));
    }
    let sib = if sibs[0] == c { sibs[1] } else { sibs[0] };
    Ok((clades.masks[kids[0]], clades.masks[kids[1]], clades.masks[sib]))
}

/// The clade replacing `e` under interchange `choice` (0 or 1).
fn nni_replacement(clades: &CladeTree, e: u64, choice: usize) -> Result<u64> {
    let (a, b, sib) = nni_parts(clades, e)?;
    match choice {
        0 => Ok(a | sib),
        1 => Ok(b | sib),
        _ => Err(Error::ParameterOutOfRange(format!("interchange choice must be 0 or 1, got {choice}"))),
    }
}

fn check_internal(tree: &PhyloTree, edge: Split) -> Result<()> {
    if !tree.leaves().is_internal(edge) || !tree.contains(edge) {
        return Err(Error::InvalidEdge(format!(
            "{} is not an internal edge of the tree",
            tree.leaves().format_split(edge)
        )));
    }
    Ok(())
}

/// Nearest-neighbour interchange across `edge`. The two alternatives swap one
/// child of the edge with its sibling; the new split gets `new_length`.
pub fn nni(tree: &PhyloTree, edge: Split, choice: usize, new_length: f64) -> Result<PhyloTree> {
    check_internal(tree, edge)?;
    let clades = CladeTree::of_tree(tree);
    let replacement = nni_replacement(&clades, edge.bits(), choice)?;
    let edges = tree
        .edges()
        .iter()
        .map(|&(s, len)| if s == edge { (Split::from_bits(replacement), new_length) } else { (s, len) });
    PhyloTree::new(tree.leaves().clone(), edges)
}

/// Internal edges of `tree` admitting an interchange.
pub fn nni_edges(tree: &PhyloTree) -> Vec<Split> {
    let clades = CladeTree::of_tree(tree);
    tree.internal_edges()
        .map(|e| e.0)
        .filter(|e| nni_parts(&clades, e.bits()).is_ok())
        .collect()
}

/// A uniformly chosen interchange.
pub fn random_nni<R: Rng + ?Sized>(tree: &PhyloTree, new_length: f64, rng: &mut R) -> Result<PhyloTree> {
    let edges = nni_edges(tree);
    if edges.is_empty() {
        return Err(Error::InvalidEdge("the tree has no edge admitting an interchange".into()));
    }
    let e = edges[rng.random_range(0..edges.len())];
    nni(tree, e, rng.random_range(0..2), new_length)
}

/// Subtree prune and regraft: detaches the subtree below `prune` and attaches
/// it to the middle of the edge above clade `graft`. Splits already in the
/// tree keep their lengths and new splits get `new_length`.
///
/// Both arguments name the non-root side of an edge; `graft` may be the root
/// split, meaning the edge to the root leaf.
pub fn spr(tree: &PhyloTree, prune: Split, graft: Split, new_length: f64) -> Result<PhyloTree> {
    let out = spr_unchecked(tree, prune, graft, new_length)?;
    if out.topology() == tree.topology() {
        return Err(Error::InvalidGraft("the regraft reproduces the original topology".into()));
    }
    Ok(out)
}

fn spr_unchecked(tree: &PhyloTree, prune: Split, graft: Split, new_length: f64) -> Result<PhyloTree> {
    let leaves = tree.leaves();
    let full = leaves.full_mask();
    let clades = CladeTree::of_tree(tree);
    let (s, g) = (prune.bits(), graft.bits());
    if s == full || clades.find(s).is_none() {
        return Err(Error::InvalidEdge(format!("{} cannot be pruned", leaves.format_split(prune))));
    }
    if clades.find(g).is_none() {
        return Err(Error::InvalidGraft(format!("{} is not an edge of the tree", leaves.format_split(graft))));
    }
    if g & s == g {
        return Err(Error::InvalidGraft("graft edge lies inside the pruned subtree".into()));
    }
    let g = g & !s;
    let mut masks: HashSet<u64> = HashSet::new();
    for &c in &clades.masks {
        let m = if c & s == c {
            c
        } else {
            let pruned = c & !s;
            if pruned & g == g {
                pruned | s
            } else {
                pruned
            }
        };
        masks.insert(m);
    }
    masks.insert(g);
    let mut edges = Vec::with_capacity(masks.len());
    for m in masks {
        let split = Split::from_bits(m);
        let len = tree.length(split);
        if len > 0.0 {
            edges.push((split, len));
        } else if leaves.is_internal(split) {
            edges.push((split, new_length));
        }
    }
    PhyloTree::new(leaves.clone(), edges)
}

/// Every `(prune, graft)` pair whose regraft changes the topology.
pub fn spr_moves(tree: &PhyloTree) -> Vec<(Split, Split)> {
    let clades = CladeTree::of_tree(tree);
    let full = tree.leaves().full_mask();
    let mut moves = Vec::new();
    let topo = tree.topology();
    for &s in &clades.masks {
        if s == full {
            continue;
        }
        for &g in &clades.masks {
            if g & s == g {
                continue;
            }
            let (ps, pg) = (Split::from_bits(s), Split::from_bits(g));
            if spr_unchecked(tree, ps, pg, 1.0).is_ok_and(|t| t.topology() != topo) {
                moves.push((ps, pg));
            }
        }
    }
    moves
}

/// A move chosen uniformly among the valid `(prune, graft)` pairs.
pub fn random_spr<R: Rng + ?Sized>(tree: &PhyloTree, new_length: f64, rng: &mut R) -> Result<PhyloTree> {
    let moves = spr_moves(tree);
    if moves.is_empty() {
        return Err(Error::InvalidGraft("the tree admits no prune and regraft move".into()));
    }
    let (p, g) = moves[rng.random_range(0..moves.len())];
    spr(tree, p, g, new_length)
}

/// Gaussian random walk on internal edge lengths.
///
/// Polytomies are first resolved at random with zero-length edges. Each step
/// adds N(0, step_size²) to every internal edge in turn; a length that would
/// become negative is reflected to its absolute value and the split is
/// replaced by one of the three splits meeting at that face (itself or its two
/// interchanges), uniformly. Pendant edges are untouched.
pub fn random_walk<R: Rng + ?Sized>(tree: &PhyloTree, steps: usize, step_size: f64, rng: &mut R) -> Result<PhyloTree> {
    if !(step_size >= 0.0) || !step_size.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("step size must be nonnegative, got {step_size}")));
    }
    let leaves = tree.leaves();
    let full = leaves.full_mask();
    let mut internal: Vec<(u64, f64)> = tree.internal_edges().map(|(s, l)| (s.bits(), l)).collect();
    resolve_randomly(full, &mut internal, rng);
    if step_size > 0.0 {
        let noise = Normal::new(0.0, step_size).expect("valid normal");
        for _ in 0..steps {
            for i in 0..internal.len() {
                let x = internal[i].1 + noise.sample(rng);
                if x >= 0.0 {
                    internal[i].1 = x;
                    continue;
                }
                internal[i].1 = -x;
                let choice = rng.random_range(0..3);
                if choice < 2 {
                    let clades = CladeTree::build(full, internal.iter().map(|e| e.0));
                    internal[i].0 = nni_replacement(&clades, internal[i].0, choice)?;
                }
            }
        }
    }
    let edges = internal
        .into_iter()
        .filter(|e| e.1 > 0.0)
        .map(|(m, l)| (Split::from_bits(m), l))
        .chain(tree.pendant_edges());
    PhyloTree::new(leaves.clone(), edges)
}

/// Adds zero-length internal clades until every node has two children.
fn resolve_randomly<R: Rng + ?Sized>(full: u64, internal: &mut Vec<(u64, f64)>, rng: &mut R) {
    let clades = CladeTree::build(full, internal.iter().map(|e| e.0));
    for kids in &clades.children {
        let mut kids: Vec<u64> = kids.iter().map(|&k| clades.masks[k]).collect();
        while kids.len() > 2 {
            let i = rng.random_range(0..kids.len());
            let a = kids.swap_remove(i);
            let j = rng.random_range(0..kids.len());
            let b = kids.swap_remove(j);
            internal.push((a | b, 0.0));
            kids.push(a | b);
        }
    }
}
