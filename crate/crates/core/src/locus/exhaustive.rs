//! Projection by search over a lattice of simplex weights.

use crate::error::{Error, Result};
use crate::geodesic::distance;
use crate::par::Execution;
use crate::tree::{PendantMode, PhyloTree};

use super::{surface_point, ProjectionResult, SimplexPoint, SurfaceConfig, VertexSet};

/// Relative convergence radius of lattice means when none is configured.
const LATTICE_REL_EPS: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExhaustiveConfig {
    /// Lattice points per simplex edge.
    pub resolution: usize,
    /// Mean computation at each lattice point. When its `eps` is unset,
    /// 1e-3 times the mean pairwise vertex distance is used.
    pub surface: SurfaceConfig,
    /// Lattice points within this distance of the best count as ties. Defaults
    /// to the mean convergence radius.
    pub tie_tol: Option<f64>,
    pub pendant_mode: PendantMode,
}

impl Default for ExhaustiveConfig {
    fn default() -> Self {
        ExhaustiveConfig {
            resolution: 50,
            surface: SurfaceConfig::default(),
            tie_tol: None,
            pendant_mode: PendantMode::Ignore,
        }
    }
}

impl ExhaustiveConfig {
    pub fn with_resolution(resolution: usize) -> Self {
        ExhaustiveConfig {
            resolution,
            ..Default::default()
        }
    }
}

/// Surface points on the lattice `{(a, b, c) / r}`, listed in increasing
/// lexicographic order of the weights.
#[derive(Clone, Debug)]
pub struct SurfaceLattice {
    resolution: usize,
    counts: Vec<Vec<usize>>,
    weights: Vec<SimplexPoint>,
    trees: Vec<PhyloTree>,
    eps: f64,
    tie_tol: f64,
    mode: PendantMode,
}

impl SurfaceLattice {
    /// Evaluates the surface at every lattice point. Only orders 1 and 2 are supported.
    pub fn build(v: &VertexSet, cfg: &ExhaustiveConfig, exec: Execution) -> Result<Self> {
        let k = v.order();
        let r = cfg.resolution;
        if r < 2 {
            return Err(Error::ParameterOutOfRange(format!("resolution must be at least 2, got {r}")));
        }
        let counts = lattice_counts(k, r)?;
        let mut surface = cfg.surface;
        if surface.mean.eps.is_none() {
            let scale = v.scale(cfg.pendant_mode)?;
            surface.mean.eps = Some(if scale > 0.0 { LATTICE_REL_EPS * scale } else { f64::MIN_POSITIVE });
        }
        surface.mean.pendant_mode = cfg.pendant_mode;
        let eps = surface.mean.eps.unwrap_or(0.0);
        let weights: Vec<SimplexPoint> = counts
            .iter()
            .map(|c| SimplexPoint::new(c.iter().map(|&x| x as f64 / r as f64).collect()))
            .collect::<Result<_>>()?;
        let trees = exec.try_map(&weights, |_, p| surface_point(v, p, &surface))?;
        Ok(SurfaceLattice {
            resolution: r,
            counts,
            weights,
            trees,
            eps,
            tie_tol: cfg.tie_tol.unwrap_or(eps),
            mode: cfg.pendant_mode,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integer coordinates `(a, b, ...)` summing to the resolution.
    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn weights(&self) -> &[SimplexPoint] {
        &self.weights
    }

    pub fn trees(&self) -> &[PhyloTree] {
        &self.trees
    }

    /// Convergence radius used for the lattice means.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Closest lattice point to `z`; ties go to the lexicographically smallest weights.
    pub fn project(&self, z: &PhyloTree) -> Result<ProjectionResult> {
        let mut dists = Vec::with_capacity(self.trees.len());
        for t in &self.trees {
            dists.push(distance(z, t, self.mode)?);
        }
        let mut best = 0;
        for (i, &d) in dists.iter().enumerate() {
            if d < dists[best] {
                best = i;
            }
        }
        let min = dists[best];
        let tie_set_size = dists.iter().filter(|&&d| d <= min + self.tie_tol).count();
        Ok(ProjectionResult {
            projected: self.trees[best].clone(),
            weights: self.weights[best].clone(),
            distance: min,
            iterations: self.trees.len(),
            restarts_used: 1,
            converged: true,
            tie_set_size,
        })
    }
}

/// Lattice coordinates in increasing lexicographic order.
fn lattice_counts(k: usize, r: usize) -> Result<Vec<Vec<usize>>> {
    match k {
        1 => Ok((0..=r).map(|a| vec![a, r - a]).collect()),
        2 => Ok((0..=r)
            .flat_map(|a| (0..=r - a).map(move |b| vec![a, b, r - a - b]))
            .collect()),
        _ => Err(Error::UnsupportedOrder(k)),
    }
}

/// Builds the lattice for `v` and projects `z` onto it.
pub fn exhaustive_project(z: &PhyloTree, v: &VertexSet, cfg: &ExhaustiveConfig, exec: Execution) -> Result<ProjectionResult> {
    SurfaceLattice::build(v, cfg, exec)?.project(z)
}
