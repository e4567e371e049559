//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use treespace::split::{compatible, LeafSet, Split};
use treespace::tree::PhyloTree;

pub fn leaves(n: usize) -> Arc<LeafSet> {
    Arc::new(LeafSet::numbered(n).unwrap())
}

/// Random rooted topology by merging random pairs of clades, each internal
/// edge kept with probability `keep`, lengths uniform on `[lo, hi)`.
pub fn random_tree<R: Rng>(rng: &mut R, leaves: &Arc<LeafSet>, keep: f64, lo: f64, hi: f64, pendants: bool) -> PhyloTree {
    let n = leaves.n();
    let mut clades: Vec<u64> = (1..=n).map(|i| 1u64 << i).collect();
    let mut edges = Vec::new();
    while clades.len() > 1 {
        let i = rng.random_range(0..clades.len());
        let a = clades.swap_remove(i);
        let j = rng.random_range(0..clades.len());
        let b = clades.swap_remove(j);
        let merged = a | b;
        clades.push(merged);
        if clades.len() > 1 && rng.random::<f64>() < keep {
            edges.push((Split::from_bits(merged), rng.random_range(lo..hi)));
        }
    }
    if pendants {
        for i in 0..=n {
            let s = leaves.split_from_indices(&[i]).unwrap();
            edges.push((s, rng.random_range(lo..hi)));
        }
    }
    PhyloTree::new(leaves.clone(), edges).unwrap()
}

/// Tree in the same topology as `t` with fresh random internal lengths.
pub fn relength<R: Rng>(rng: &mut R, t: &PhyloTree, lo: f64, hi: f64) -> PhyloTree {
    let edges = t.edges().iter().map(|&(s, _)| (s, rng.random_range(lo..hi)));
    PhyloTree::new(t.leaves().clone(), edges).unwrap()
}

/// Squared geodesic length (internal edges only) by exhaustive search over
/// every ordered pair of partitions satisfying path validity and the
/// nondecreasing ratio condition. Written without reference to the library's
/// geodesic code; only splits and compatibility are shared.
pub fn oracle_distance_sq(x: &PhyloTree, y: &PhyloTree) -> f64 {
    let xs: Vec<(Split, f64)> = x.internal_edges().collect();
    let ys: Vec<(Split, f64)> = y.internal_edges().collect();
    let mut common = 0.0;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &(s, l) in &xs {
        match ys.iter().find(|e| e.0 == s) {
            Some(&(_, m)) => common += (l - m) * (l - m),
            None if ys.iter().all(|e| compatible(s, e.0)) => common += l * l,
            None => a.push((s, l)),
        }
    }
    for &(s, l) in &ys {
        if xs.iter().any(|e| e.0 == s) {
            continue;
        }
        if xs.iter().all(|e| compatible(s, e.0)) {
            common += l * l;
        } else {
            b.push((s, l));
        }
    }
    if a.is_empty() {
        return common;
    }
    let mut best = f64::INFINITY;
    for legs in 1..=a.len().min(b.len()) {
        for la in surjections(a.len(), legs) {
            for lb in surjections(b.len(), legs) {
                // Splits of B added in leg i must be compatible with A-splits
                // still present, i.e. those removed in later legs.
                let valid = (0..b.len()).all(|bi| {
                    (0..a.len()).all(|ai| la[ai] <= lb[bi] || compatible(a[ai].0, b[bi].0))
                });
                if !valid {
                    continue;
                }
                let mut na = vec![0.0; legs];
                let mut nb = vec![0.0; legs];
                for (k, &(_, l)) in a.iter().enumerate() {
                    na[la[k]] += l * l;
                }
                for (k, &(_, l)) in b.iter().enumerate() {
                    nb[lb[k]] += l * l;
                }
                let ratios: Vec<f64> = (0..legs).map(|j| na[j].sqrt() / nb[j].sqrt()).collect();
                if ratios.windows(2).any(|w| w[0] > w[1] * (1.0 + 1e-12)) {
                    continue;
                }
                let len: f64 = (0..legs).map(|j| (na[j].sqrt() + nb[j].sqrt()).powi(2)).sum();
                best = best.min(len);
            }
        }
    }
    common + best
}

/// All maps from `0..n` onto `0..k`.
fn surjections(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    loop {
        let mut seen = vec![false; k];
        cur.iter().for_each(|&c| seen[c] = true);
        if seen.iter().all(|&s| s) {
            out.push(cur.clone());
        }
        let mut i = 0;
        while i < n {
            cur[i] += 1;
            if cur[i] < k {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

/// The worked five-leaf configuration. A tree in its three orthants is
/// described by coordinates (ξ1, ξ2, ξ3): ξ1 > 0 is split {2,3}, ξ1 < 0 is
/// {3,4,5}; ξ2 > 0 is {4,5}, ξ2 < 0 is {2,3,4}; ξ3 is {0,1}.
pub struct Fixture {
    pub leaves: Arc<LeafSet>,
    pub s23: Split,
    pub s345: Split,
    pub s45: Split,
    pub s234: Split,
    pub s01: Split,
}

impl Fixture {
    pub fn new() -> Self {
        let leaves = leaves(5);
        let s = |side: &[usize]| leaves.split_from_indices(side).unwrap();
        Fixture {
            s23: s(&[2, 3]),
            s345: s(&[3, 4, 5]),
            s45: s(&[4, 5]),
            s234: s(&[2, 3, 4]),
            s01: s(&[0, 1]),
            leaves,
        }
    }

    pub fn tree(&self, xi: [f64; 3]) -> PhyloTree {
        assert!(!(xi[0] < 0.0 && xi[1] < 0.0), "({}, {}) is not in the configuration", xi[0], xi[1]);
        let mut edges = Vec::new();
        if xi[0] > 0.0 {
            edges.push((self.s23, xi[0]));
        } else if xi[0] < 0.0 {
            edges.push((self.s345, -xi[0]));
        }
        if xi[1] > 0.0 {
            edges.push((self.s45, xi[1]));
        } else if xi[1] < 0.0 {
            edges.push((self.s234, -xi[1]));
        }
        if xi[2] > 0.0 {
            edges.push((self.s01, xi[2]));
        }
        PhyloTree::new(self.leaves.clone(), edges).unwrap()
    }

    pub fn coords(&self, t: &PhyloTree) -> [f64; 3] {
        for (s, _) in t.internal_edges() {
            assert!(
                [self.s23, self.s345, self.s45, self.s234, self.s01].contains(&s),
                "split {s} is outside the configuration"
            );
        }
        [
            t.length(self.s23) - t.length(self.s345),
            t.length(self.s45) - t.length(self.s234),
            t.length(self.s01),
        ]
    }

    pub fn vertices(&self) -> Vec<PhyloTree> {
        vec![
            self.tree([1.0, 1.0, 2.0]),
            self.tree([-2.0, 1.0, 1.0]),
            self.tree([1.0, -2.0, 1.0]),
        ]
    }
}

/// Weighted mean of the vertices where the surface is flat.
pub fn planar_formula(p: [f64; 3]) -> [f64; 3] {
    [p[0] - 2.0 * p[1] + p[2], p[0] + p[1] - 2.0 * p[2], 1.0 + p[0]]
}

/// Weighted mean in the region where the geodesic to v1 or v2 passes through
/// the codimension-2 face, valid for `p0 < 2 p1` on the v1 side.
pub fn kinked_formula(p: [f64; 3]) -> [f64; 3] {
    let f = (p[1] + p[0]) / (p[0] - 2.0 * p[1]);
    let r = p[2] * 5f64.sqrt();
    [
        p[0] - 2.0 * p[1] + r * (1.0 + f * f).powf(-0.5),
        p[0] + p[1] - r * (1.0 + f.powi(-2)).powf(-0.5),
        1.0 + p[0],
    ]
}

pub fn pick<'a, R: Rng, T>(rng: &mut R, items: &'a [T]) -> &'a T {
    items.choose(rng).unwrap()
}
