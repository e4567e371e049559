//! Projection by the stochastic geometric iteration.
//!
//! Each restart starts from a random point on the boundary of the surface and
//! repeatedly moves a proportion `1/(i+2)` towards whichever vertex brings it
//! closest to the data tree. The visit frequencies of the vertices estimate the
//! weights of the projection.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::frechet::Monitor;
use crate::geodesic::{distance, point_on_geodesic, step_toward};
use crate::rng;
use crate::tree::{PendantMode, PhyloTree};

use super::{ProjectionResult, SimplexPoint, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricConfig {
    /// Convergence radius; `None` means `rel_eps` times the mean pairwise vertex distance.
    pub eps: Option<f64>,
    pub rel_eps: f64,
    pub window: usize,
    pub restarts: usize,
    pub max_iter: usize,
    /// Also consider the vertices themselves as candidate projections. The
    /// iteration only reaches a vertex in the limit, so without this a tree
    /// equal to a vertex projects at a small positive distance.
    pub vertex_candidates: bool,
    pub pendant_mode: PendantMode,
}

impl Default for GeometricConfig {
    fn default() -> Self {
        GeometricConfig {
            eps: None,
            rel_eps: 1e-3,
            window: 10,
            restarts: 3,
            max_iter: 100_000,
            vertex_candidates: true,
            pendant_mode: PendantMode::Ignore,
        }
    }
}

impl GeometricConfig {
    pub(crate) fn resolve_eps(&self, v: &VertexSet) -> Result<f64> {
        match self.eps {
            Some(e) if e > 0.0 => Ok(e),
            Some(e) => Err(Error::ParameterOutOfRange(format!("eps must be positive, got {e}"))),
            None if self.rel_eps > 0.0 => Ok(self.rel_eps * v.scale(self.pendant_mode)?),
            None => Err(Error::ParameterOutOfRange(format!("rel_eps must be positive, got {}", self.rel_eps))),
        }
    }
}

/// Projects `z` onto the surface of `v`. `seed` fixes all random choices.
pub fn geometric_project(z: &PhyloTree, v: &VertexSet, cfg: &GeometricConfig, seed: u64) -> Result<ProjectionResult> {
    let eps = cfg.resolve_eps(v)?;
    project_with_eps(z, v, cfg, eps, seed)
}

pub(crate) fn project_with_eps(z: &PhyloTree, v: &VertexSet, cfg: &GeometricConfig, eps: f64, seed: u64) -> Result<ProjectionResult> {
    if cfg.restarts == 0 {
        return Err(Error::ParameterOutOfRange("restarts must be at least 1".into()));
    }
    if !z.same_leaves(v.vertex(0)) {
        return Err(Error::LeafSetMismatch);
    }
    if eps == 0.0 {
        // All vertices coincide, so the surface is a single point.
        return Ok(ProjectionResult {
            projected: v.vertex(0).clone(),
            weights: SimplexPoint::vertex(0, v.order()),
            distance: distance(z, v.vertex(0), cfg.pendant_mode)?,
            iterations: 0,
            restarts_used: 0,
            converged: true,
            tie_set_size: v.len(),
        });
    }
    let mut best: Option<ProjectionResult> = None;
    for restart in 0..cfg.restarts {
        let r = run(z, v, cfg, eps, seed, restart as u64)?;
        if best.as_ref().is_none_or(|b| r.distance < b.distance) {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one restart");
    best.restarts_used = cfg.restarts;
    if cfg.vertex_candidates {
        for (j, vj) in v.vertices().iter().enumerate() {
            let d = distance(z, vj, cfg.pendant_mode)?;
            if d < best.distance {
                best.projected = vj.clone();
                best.weights = SimplexPoint::vertex(j, v.order());
                best.distance = d;
            }
        }
    }
    Ok(best)
}

fn run(z: &PhyloTree, v: &VertexSet, cfg: &GeometricConfig, eps: f64, seed: u64, restart: u64) -> Result<ProjectionResult> {
    let mode = cfg.pendant_mode;
    let mut rng = rng::stream(seed, &[restart]);
    let k = v.order();
    let n = v.len();
    let start = perimeter_point(v, mode, &mut rng)?;
    let mut counts = vec![0usize; n];
    let mut monitor = Monitor::new(cfg.window, eps, mode, start);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let i = iterations;
        let t = 1.0 / (i as f64 + 2.0);
        let mut chosen: Option<(usize, PhyloTree, f64, f64)> = None;
        for (j, vj) in v.vertices().iter().enumerate() {
            let (y, len) = step_toward(monitor.current(), vj, t, mode)?;
            let dz = distance(z, &y, mode)?;
            // Strict comparison keeps the smallest index on ties.
            if chosen.as_ref().is_none_or(|c| dz < c.2) {
                chosen = Some((j, y, dz, t * len));
            }
        }
        let (r, y, _, step) = chosen.expect("vertex set is nonempty");
        counts[r] += 1;
        iterations += 1;
        if monitor.push(y, step) {
            converged = true;
            break;
        }
    }
    let projected = monitor.into_current();
    let total = counts.iter().sum::<usize>() as f64;
    let weights = SimplexPoint::normalized(&counts.iter().map(|&c| c as f64 / total).collect::<Vec<_>>())
        .unwrap_or_else(|_| SimplexPoint::vertex(0, k));
    let distance = distance(z, &projected, mode)?;
    Ok(ProjectionResult {
        projected,
        weights,
        distance,
        iterations,
        restarts_used: 1,
        converged,
        tie_set_size: 1,
    })
}

/// A uniform point on the boundary of the surface: an edge geodesic chosen
/// with probability proportional to its length, then a uniform position on it.
/// For `k = 1` the boundary is just the two endpoints' geodesic itself.
fn perimeter_point(v: &VertexSet, mode: PendantMode, rng: &mut rng::Rng) -> Result<PhyloTree> {
    let n = v.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j, distance(v.vertex(i), v.vertex(j), mode)?));
        }
    }
    let total: f64 = edges.iter().map(|e| e.2).sum();
    let (i, j) = if total > 0.0 {
        let mut u = rng.random::<f64>() * total;
        let mut pick = (edges[0].0, edges[0].1);
        for &(a, b, len) in &edges {
            pick = (a, b);
            if u < len {
                break;
            }
            u -= len;
        }
        pick
    } else {
        (0, 1)
    };
    let t: f64 = rng.random();
    point_on_geodesic(v.vertex(i), v.vertex(j), t)
}
