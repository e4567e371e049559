//! Topology of the surface point over a lattice on the 2-simplex.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::tree::TopologyId;

use super::exhaustive::{ExhaustiveConfig, SurfaceLattice};
use super::{SimplexPoint, VertexSet};

/// Internal edges shorter than this many mean convergence radii are treated
/// as absent: the iterates of a numeric mean hover around sticky faces at
/// that distance.
const TOPOLOGY_EPS_FACTOR: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct MapPoint {
    /// Integer lattice coordinates summing to the resolution.
    pub counts: [usize; 3],
    pub weights: SimplexPoint,
    /// Index into [`TopologyMap::topologies`].
    pub topology: usize,
    /// Index into [`TopologyMap::regions`].
    pub region: usize,
}

/// A maximal set of lattice points, connected through lattice neighbours, sharing one topology.
#[derive(Clone, Debug)]
pub struct Region {
    pub topology: usize,
    pub size: usize,
}

#[derive(Clone, Debug)]
pub struct TopologyMap {
    pub resolution: usize,
    pub points: Vec<MapPoint>,
    /// Distinct topologies in order of first appearance.
    pub topologies: Vec<TopologyId>,
    pub regions: Vec<Region>,
}

impl TopologyMap {
    pub fn from_lattice(lattice: &SurfaceLattice) -> Result<Self> {
        if lattice.counts().first().map(Vec::len) != Some(3) {
            return Err(Error::UnsupportedOrder(lattice.counts().first().map_or(0, |c| c.len().saturating_sub(1))));
        }
        let r = lattice.resolution();
        let min_len = TOPOLOGY_EPS_FACTOR * lattice.eps();
        let mut topologies: Vec<TopologyId> = Vec::new();
        let mut topo_index: HashMap<TopologyId, usize> = HashMap::new();
        let mut points = Vec::with_capacity(lattice.len());
        let mut at: HashMap<[usize; 3], usize> = HashMap::new();
        for (i, (c, tree)) in lattice.counts().iter().zip(lattice.trees()).enumerate() {
            let topo = tree.topology_above(min_len);
            let next = topologies.len();
            let t = *topo_index.entry(topo.clone()).or_insert_with(|| {
                topologies.push(topo);
                next
            });
            let counts = [c[0], c[1], c[2]];
            at.insert(counts, i);
            points.push(MapPoint {
                counts,
                weights: lattice.weights()[i].clone(),
                topology: t,
                region: 0,
            });
        }

        let mut uf = UnionFind::new(points.len());
        for (i, p) in points.iter().enumerate() {
            let [a, b, c] = p.counts;
            // Three of the six lattice neighbours; the other three are covered from their side.
            let neighbours = [
                (a > 0).then(|| [a - 1, b + 1, c]),
                (a > 0).then(|| [a - 1, b, c + 1]),
                (b > 0).then(|| [a, b - 1, c + 1]),
            ];
            for n in neighbours.into_iter().flatten() {
                let j = at[&n];
                if points[j].topology == p.topology {
                    uf.union(i, j);
                }
            }
        }
        let mut region_of_root: HashMap<usize, usize> = HashMap::new();
        let mut regions: Vec<Region> = Vec::new();
        for i in 0..points.len() {
            let root = uf.find(i);
            let next = regions.len();
            let id = *region_of_root.entry(root).or_insert_with(|| {
                regions.push(Region {
                    topology: points[i].topology,
                    size: 0,
                });
                next
            });
            regions[id].size += 1;
            points[i].region = id;
        }
        Ok(TopologyMap {
            resolution: r,
            points,
            topologies,
            regions,
        })
    }

    /// Number of lattice points with each topology.
    pub fn topology_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.topologies.len()];
        for p in &self.points {
            sizes[p.topology] += 1;
        }
        sizes
    }

    pub fn topology_at(&self, counts: [usize; 3]) -> Option<&TopologyId> {
        self.points
            .iter()
            .find(|p| p.counts == counts)
            .map(|p| &self.topologies[p.topology])
    }
}

/// Surface topology over the lattice of the given resolution (order 2 only).
pub fn simplex_topology_map(v: &VertexSet, cfg: &ExhaustiveConfig, exec: Execution) -> Result<TopologyMap> {
    if v.order() != 2 {
        return Err(Error::UnsupportedOrder(v.order()));
    }
    TopologyMap::from_lattice(&SurfaceLattice::build(v, cfg, exec)?)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
