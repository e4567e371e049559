//! Geodesics between trees.
//!
//! The geodesic from `x` to `y` is described by its support: splits present
//! in both trees (or in one tree and compatible with everything in the other)
//! change length linearly, and the remaining splits of `x` are removed in
//! groups `A_1, ..., A_l` while the remaining splits of `y` appear in groups
//! `B_1, ..., B_l`. The support is found by starting from the cone path (one
//! group each) and repeatedly splitting a pair whenever a minimum-weight
//! vertex cover of its incompatibility graph certifies a shorter path.

mod flow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::split::{compatible, Split};
use crate::tree::{PendantMode, PhyloTree};

/// A cover of weight at or above this is treated as "no refinement".
const COVER_THRESHOLD: f64 = 1.0 - 1e-12;

/// Lengths below this are dropped when materializing points on a geodesic.
pub const LENGTH_CUTOFF: f64 = 1e-12;

/// One leg of a geodesic: the splits removed (`a`) and added (`b`) together.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Leg {
    pub a: Vec<(Split, f64)>,
    pub b: Vec<(Split, f64)>,
}

impl Leg {
    pub fn a_norm(&self) -> f64 {
        self.a.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    pub fn b_norm(&self) -> f64 {
        self.b.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    /// Fraction of the way along the geodesic at which this leg's topology change happens.
    pub fn switch_time(&self) -> f64 {
        let a = self.a_norm();
        a / (a + self.b_norm())
    }
}

/// A split carried along the whole geodesic with its source and target lengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommonEdge {
    pub split: Split,
    pub source: f64,
    pub target: f64,
}

/// Ordered support of a geodesic. Pendant edges are kept apart from the
/// internal common edges; they never change topology.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicSupport {
    pub legs: Vec<Leg>,
    pub common: Vec<CommonEdge>,
    pub pendants: Vec<CommonEdge>,
}

impl GeodesicSupport {
    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    /// Squared length contributed by the internal part of the support.
    pub fn internal_length_sq(&self) -> f64 {
        let legs: f64 = self
            .legs
            .iter()
            .map(|l| {
                let s = l.a_norm() + l.b_norm();
                s * s
            })
            .sum();
        let common: f64 = self.common.iter().map(|c| (c.source - c.target).powi(2)).sum();
        legs + common
    }

    pub fn pendant_length_sq(&self) -> f64 {
        self.pendants.iter().map(|c| (c.source - c.target).powi(2)).sum()
    }

    pub fn length(&self, mode: PendantMode) -> f64 {
        let mut d2 = self.internal_length_sq();
        if mode == PendantMode::Include {
            d2 += self.pendant_length_sq();
        }
        d2.sqrt()
    }

    /// Support of the geodesic traversed backwards.
    pub fn reversed(&self) -> GeodesicSupport {
        let flip = |c: &CommonEdge| CommonEdge {
            split: c.split,
            source: c.target,
            target: c.source,
        };
        GeodesicSupport {
            legs: self
                .legs
                .iter()
                .rev()
                .map(|l| Leg {
                    a: l.b.clone(),
                    b: l.a.clone(),
                })
                .collect(),
            common: self.common.iter().map(flip).collect(),
            pendants: self.pendants.iter().map(flip).collect(),
        }
    }

    pub fn signature(&self) -> SupportSignature {
        let sorted = |v: &[(Split, f64)]| {
            let mut s: Vec<Split> = v.iter().map(|e| e.0).collect();
            s.sort_unstable();
            s
        };
        SupportSignature {
            a: self.legs.iter().map(|l| sorted(&l.a)).collect(),
            b: self.legs.iter().map(|l| sorted(&l.b)).collect(),
            common: self.common.iter().map(|c| c.split).collect(),
        }
    }
}

/// Hashable identity of a support, ignoring lengths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSignature {
    pub a: Vec<Vec<Split>>,
    pub b: Vec<Vec<Split>>,
    pub common: Vec<Split>,
}

/// A geodesic segment between two trees.
#[derive(Clone, Debug)]
pub struct Geodesic {
    source: PhyloTree,
    target: PhyloTree,
    support: GeodesicSupport,
    mode: PendantMode,
    length: f64,
}

impl Geodesic {
    pub fn new(source: &PhyloTree, target: &PhyloTree, mode: PendantMode) -> Result<Self> {
        let support = compute_support(source, target)?;
        let length = support.length(mode);
        Ok(Geodesic {
            source: source.clone(),
            target: target.clone(),
            support,
            mode,
            length,
        })
    }

    pub fn source(&self) -> &PhyloTree {
        &self.source
    }

    pub fn target(&self) -> &PhyloTree {
        &self.target
    }

    pub fn support(&self) -> &GeodesicSupport {
        &self.support
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn pendant_mode(&self) -> PendantMode {
        self.mode
    }

    /// The point a fraction `t` of the way from source to target.
    pub fn point_at(&self, t: f64) -> Result<PhyloTree> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ParameterOutOfRange(format!("t = {t} is outside [0, 1]")));
        }
        if t == 0.0 {
            return Ok(self.source.clone());
        }
        if t == 1.0 {
            return Ok(self.target.clone());
        }
        Ok(interpolate(&self.source, &self.support, t))
    }

    /// Whether at most one edge contracts or expands at a time.
    pub fn is_simple(&self) -> Result<bool> {
        if !self.source.is_resolved() || !self.target.is_resolved() {
            return Err(Error::NotFullyResolved);
        }
        Ok(self.support.legs.iter().all(|l| l.a.len() == 1 && l.b.len() == 1))
    }

    pub fn reversed(&self) -> Geodesic {
        Geodesic {
            source: self.target.clone(),
            target: self.source.clone(),
            support: self.support.reversed(),
            mode: self.mode,
            length: self.length,
        }
    }
}

fn interpolate(source: &PhyloTree, support: &GeodesicSupport, t: f64) -> PhyloTree {
    let mut edges = Vec::with_capacity(source.edges().len());
    let lerp = |c: &CommonEdge| (1.0 - t) * c.source + t * c.target;
    for c in support.common.iter().chain(&support.pendants) {
        let l = lerp(c);
        if l > LENGTH_CUTOFF {
            edges.push((c.split, l));
        }
    }
    for leg in &support.legs {
        let a = leg.a_norm();
        let b = leg.b_norm();
        let shrink = ((1.0 - t) * a - t * b) / a;
        if shrink > 0.0 {
            for &(s, l) in &leg.a {
                if l * shrink > LENGTH_CUTOFF {
                    edges.push((s, l * shrink));
                }
            }
        } else {
            let grow = (t * b - (1.0 - t) * a) / b;
            for &(s, l) in &leg.b {
                if l * grow > LENGTH_CUTOFF {
                    edges.push((s, l * grow));
                }
            }
        }
    }
    PhyloTree::from_unsorted_unchecked(source.leaves().clone(), edges)
}

/// The point a fraction `t` along the geodesic from `x` to `y`.
pub fn point_on_geodesic(x: &PhyloTree, y: &PhyloTree, t: f64) -> Result<PhyloTree> {
    Geodesic::new(x, y, PendantMode::Ignore)?.point_at(t)
}

/// The point a fraction `t` from `x` towards `y`, and the length of the full geodesic.
/// Cheaper than building a [`Geodesic`] because neither tree is cloned.
pub fn step_toward(x: &PhyloTree, y: &PhyloTree, t: f64, mode: PendantMode) -> Result<(PhyloTree, f64)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ParameterOutOfRange(format!("t = {t} is outside [0, 1]")));
    }
    let support = compute_support(x, y)?;
    let len = support.length(mode);
    let point = if t == 0.0 {
        x.clone()
    } else if t == 1.0 {
        y.clone()
    } else {
        interpolate(x, &support, t)
    };
    Ok((point, len))
}

pub fn distance(x: &PhyloTree, y: &PhyloTree, mode: PendantMode) -> Result<f64> {
    Ok(distance_sq(x, y, mode)?.sqrt())
}

pub fn distance_sq(x: &PhyloTree, y: &PhyloTree, mode: PendantMode) -> Result<f64> {
    if !x.same_leaves(y) {
        return Err(Error::LeafSetMismatch);
    }
    let mut d2 = Internal::new(x, y).solve().length_sq();
    if mode == PendantMode::Include {
        d2 += pendant_diffs(x, y).map(|(_, a, b)| (a - b).powi(2)).sum::<f64>();
    }
    Ok(d2)
}

pub fn compute_support(x: &PhyloTree, y: &PhyloTree) -> Result<GeodesicSupport> {
    if !x.same_leaves(y) {
        return Err(Error::LeafSetMismatch);
    }
    let solved = Internal::new(x, y).solve();
    let p = &solved.problem;
    let legs = solved
        .legs
        .iter()
        .map(|(a, b)| Leg {
            a: a.iter().map(|&i| p.a[i]).collect(),
            b: b.iter().map(|&j| p.b[j]).collect(),
        })
        .collect();
    let pendants = pendant_diffs(x, y)
        .map(|(split, source, target)| CommonEdge { split, source, target })
        .collect();
    Ok(GeodesicSupport {
        legs,
        common: p.common.clone(),
        pendants,
    })
}

pub fn support_signature(x: &PhyloTree, y: &PhyloTree) -> Result<SupportSignature> {
    Ok(compute_support(x, y)?.signature())
}

fn pendant_diffs<'a>(x: &'a PhyloTree, y: &'a PhyloTree) -> impl Iterator<Item = (Split, f64, f64)> + 'a {
    let mut splits: Vec<Split> = x
        .pendant_edges()
        .chain(y.pendant_edges())
        .map(|e| e.0)
        .collect();
    splits.sort_unstable();
    splits.dedup();
    splits.into_iter().map(move |s| (s, x.length(s), y.length(s)))
}

/// Internal-edge geodesic problem: common edges plus the sets to be swapped.
struct Internal {
    common: Vec<CommonEdge>,
    a: Vec<(Split, f64)>,
    b: Vec<(Split, f64)>,
    /// `incompat[i]`: bitmask over `b` of splits incompatible with `a[i]`.
    incompat: Vec<u64>,
}

struct Solved {
    problem: Internal,
    legs: Vec<(Vec<usize>, Vec<usize>)>,
}

impl Solved {
    fn length_sq(&self) -> f64 {
        let p = &self.problem;
        let mut d2: f64 = p.common.iter().map(|c| (c.source - c.target).powi(2)).sum();
        for (a, b) in &self.legs {
            let na: f64 = a.iter().map(|&i| p.a[i].1 * p.a[i].1).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|&j| p.b[j].1 * p.b[j].1).sum::<f64>().sqrt();
            d2 += (na + nb) * (na + nb);
        }
        d2
    }
}

impl Internal {
    fn new(x: &PhyloTree, y: &PhyloTree) -> Internal {
        let xs: Vec<(Split, f64)> = x.internal_edges().collect();
        let ys: Vec<(Split, f64)> = y.internal_edges().collect();
        let mut common = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let (mut i, mut j) = (0, 0);
        let compatible_with_all = |s: Split, other: &[(Split, f64)]| other.iter().all(|o| compatible(s, o.0));
        while i < xs.len() || j < ys.len() {
            let take_x = j >= ys.len() || (i < xs.len() && xs[i].0 < ys[j].0);
            let take_y = i >= xs.len() || (j < ys.len() && ys[j].0 < xs[i].0);
            if take_x {
                let (s, l) = xs[i];
                if compatible_with_all(s, &ys) {
                    common.push(CommonEdge { split: s, source: l, target: 0.0 });
                } else {
                    a.push((s, l));
                }
                i += 1;
            } else if take_y {
                let (s, l) = ys[j];
                if compatible_with_all(s, &xs) {
                    common.push(CommonEdge { split: s, source: 0.0, target: l });
                } else {
                    b.push((s, l));
                }
                j += 1;
            } else {
                common.push(CommonEdge {
                    split: xs[i].0,
                    source: xs[i].1,
                    target: ys[j].1,
                });
                i += 1;
                j += 1;
            }
        }
        let incompat = a
            .iter()
            .map(|&(s, _)| {
                b.iter()
                    .enumerate()
                    .filter(|(_, f)| !compatible(s, f.0))
                    .fold(0u64, |m, (k, _)| m | 1u64 << k)
            })
            .collect();
        Internal { common, a, b, incompat }
    }

    fn solve(self) -> Solved {
        let mut legs: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        if !self.a.is_empty() {
            legs.push(((0..self.a.len()).collect(), (0..self.b.len()).collect()));
        }
        let mut k = 0;
        while k < legs.len() {
            match self.refine(&legs[k].0, &legs[k].1) {
                Some((first, second)) => {
                    legs[k] = first;
                    legs.insert(k + 1, second);
                }
                None => k += 1,
            }
        }
        Solved { problem: self, legs }
    }

    /// Splits the pair `(a, b)` if a lighter vertex cover exists.
    fn refine(&self, a: &[usize], b: &[usize]) -> Option<((Vec<usize>, Vec<usize>), (Vec<usize>, Vec<usize>))> {
        if a.len() < 2 && b.len() < 2 {
            return None;
        }
        let na2: f64 = a.iter().map(|&i| self.a[i].1.powi(2)).sum();
        let nb2: f64 = b.iter().map(|&j| self.b[j].1.powi(2)).sum();
        let left: Vec<f64> = a.iter().map(|&i| self.a[i].1.powi(2) / na2).collect();
        let right: Vec<f64> = b.iter().map(|&j| self.b[j].1.powi(2) / nb2).collect();
        let adj: Vec<u64> = a
            .iter()
            .map(|&i| {
                b.iter()
                    .enumerate()
                    .filter(|(_, &j)| self.incompat[i] >> j & 1 == 1)
                    .fold(0u64, |m, (k, _)| m | 1u64 << k)
            })
            .collect();
        let (weight, cover_a, cover_b) = flow::min_vertex_cover(&left, &right, &adj);
        if weight >= COVER_THRESHOLD {
            return None;
        }
        let pick = |ids: &[usize], mask: &[bool], want: bool| -> Vec<usize> {
            ids.iter().zip(mask).filter(|(_, &m)| m == want).map(|(&i, _)| i).collect()
        };
        let c1 = pick(a, &cover_a, true);
        let c2 = pick(a, &cover_a, false);
        let d1 = pick(b, &cover_b, false);
        let d2 = pick(b, &cover_b, true);
        if c1.is_empty() || c2.is_empty() || d1.is_empty() || d2.is_empty() {
            return None;
        }
        Some(((c1, d1), (c2, d2)))
    }
}
