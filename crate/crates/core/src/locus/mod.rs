//! The locus of the weighted Fréchet mean of a vertex set.
//!
//! For vertices `V = {v0, ..., vk}` the surface `Π(V)` is the set of means
//! `μ(V, p)` over all probability vectors `p`. This module evaluates points of
//! the surface, projects data trees onto it (by lattice search or by the
//! stochastic geometric iteration), summarizes fits, and maps which topology
//! the mean has over the simplex.

mod exhaustive;
mod geometric;
mod map;
mod stats;

pub use exhaustive::{exhaustive_project, ExhaustiveConfig, SurfaceLattice};
pub use geometric::{geometric_project, GeometricConfig};
pub use map::{simplex_topology_map, MapPoint, Region, TopologyMap};
pub use stats::{fit_statistics, project_all, sum_sq_projected, FitStatistics, Projector};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frechet::{frechet_mean, mean_pairwise_distance, MeanConfig, MeanMethod, WeightedSample};
use crate::geodesic::point_on_geodesic;
use crate::tree::{PendantMode, PhyloTree};

/// Tolerance on the sum of a probability vector.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// The vertex trees `v0, ..., vk` of a surface, `k ≥ 1`.
#[derive(Clone, Debug)]
pub struct VertexSet {
    vertices: Vec<PhyloTree>,
}

impl VertexSet {
    pub fn new(vertices: Vec<PhyloTree>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "a vertex set needs at least 2 trees, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.same_leaves(&vertices[0])) {
            return Err(Error::LeafSetMismatch);
        }
        Ok(VertexSet { vertices })
    }

    /// The order `k`: one less than the number of vertices.
    pub fn order(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[PhyloTree] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &PhyloTree {
        &self.vertices[i]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Copy with vertex `i` replaced.
    pub fn with_vertex(&self, i: usize, tree: PhyloTree) -> VertexSet {
        let mut vertices = self.vertices.clone();
        vertices[i] = tree;
        VertexSet { vertices }
    }

    /// Mean pairwise distance between vertices, the natural length scale of the surface.
    pub fn scale(&self, mode: PendantMode) -> Result<f64> {
        let refs: Vec<&PhyloTree> = self.vertices.iter().collect();
        mean_pairwise_distance(&refs, mode)
    }
}

/// A probability vector of length `k + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint {
    p: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidSimplexPoint("empty vector".into()));
        }
        if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidSimplexPoint(format!("{p:?} has a negative or non-finite entry")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidSimplexPoint(format!("{p:?} sums to {sum}")));
        }
        Ok(SimplexPoint { p })
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn normalized(w: &[f64]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidSimplexPoint(format!("{w:?} has no positive mass")));
        }
        Self::new(w.iter().map(|x| x / sum).collect())
    }

    /// The `i`-th corner of the `k`-simplex.
    pub fn vertex(i: usize, k: usize) -> Self {
        let mut p = vec![0.0; k + 1];
        p[i] = 1.0;
        SimplexPoint { p }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn order(&self) -> usize {
        self.p.len() - 1
    }
}

/// How surface points are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SurfaceConfig {
    pub method: MeanMethod,
    pub mean: MeanConfig,
}

impl SurfaceConfig {
    pub fn with_eps(eps: f64) -> Self {
        SurfaceConfig {
            method: MeanMethod::Cyclic,
            mean: MeanConfig::with_eps(eps),
        }
    }
}

/// The point `μ(V, p)` of the surface.
///
/// Weights supported on one or two vertices are evaluated exactly (a vertex,
/// or the point along the edge geodesic); otherwise the configured mean
/// algorithm runs.
pub fn surface_point(v: &VertexSet, p: &SimplexPoint, cfg: &SurfaceConfig) -> Result<PhyloTree> {
    if p.len() != v.len() {
        return Err(Error::InvalidSimplexPoint(format!(
            "{} weights for {} vertices",
            p.len(),
            v.len()
        )));
    }
    let support: Vec<usize> = (0..p.len()).filter(|&i| p.p[i] > 0.0).collect();
    match support.as_slice() {
        [i] => Ok(v.vertices[*i].clone()),
        [i, j] => {
            let t = p.p[*j] / (p.p[*i] + p.p[*j]);
            point_on_geodesic(&v.vertices[*i], &v.vertices[*j], t)
        }
        _ => {
            let sample = WeightedSample::new(v.vertices.clone(), p.p.clone())?;
            Ok(frechet_mean(&sample, cfg.method, &cfg.mean)?.mean)
        }
    }
}

/// Result of projecting one tree onto a surface.
#[derive(Clone, Debug)]
pub struct ProjectionResult {
    pub projected: PhyloTree,
    /// Estimated weights of the projection.
    pub weights: SimplexPoint,
    pub distance: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    /// Number of lattice weights whose surface points are equally close; 1
    /// unless the surface is sticky near the projection.
    pub tie_set_size: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_point_validation() {
        assert!(SimplexPoint::new(vec![0.2, 0.3, 0.5]).is_ok());
        assert!(SimplexPoint::new(vec![0.2, 0.3, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![-0.1, 0.6, 0.5]).is_err());
        let p = SimplexPoint::normalized(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.25, 0.25, 0.5]);
        assert_eq!(SimplexPoint::vertex(1, 2).as_slice(), &[0.0, 1.0, 0.0]);
    }
}
