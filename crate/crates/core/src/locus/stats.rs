//! Goodness-of-fit summaries for a surface and a data set.

use crate::error::{Error, Result};
use crate::frechet::{cyclic_mean, mean_pairwise_distance, MeanConfig, WeightedSample};
use crate::geodesic::distance;
use crate::par::Execution;
use crate::rng;
use crate::tree::{PendantMode, PhyloTree};

use super::exhaustive::{ExhaustiveConfig, SurfaceLattice};
use super::geometric::{project_with_eps, GeometricConfig};
use super::{ProjectionResult, VertexSet};

/// Which algorithm projects data onto the surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projector {
    Geometric(GeometricConfig),
    Exhaustive(ExhaustiveConfig),
}

impl Default for Projector {
    fn default() -> Self {
        Projector::Geometric(GeometricConfig::default())
    }
}

impl Projector {
    pub fn pendant_mode(&self) -> PendantMode {
        match self {
            Projector::Geometric(c) => c.pendant_mode,
            Projector::Exhaustive(c) => c.pendant_mode,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitStatistics {
    /// Σ d(zᵢ, π(zᵢ))².
    pub sum_sq_projected: f64,
    /// Σ d(π̄, π(zᵢ))².
    pub explained: f64,
    /// explained / (residual + explained).
    pub r_squared: f64,
    pub per_datum: Vec<ProjectionResult>,
    /// Unweighted mean of the projections.
    pub mean_of_projections: PhyloTree,
}

/// Projects every data tree. Datum `i` uses the random stream `(seed, i)`, so
/// results do not depend on scheduling.
pub fn project_all(data: &[PhyloTree], v: &VertexSet, projector: &Projector, seed: u64, exec: Execution) -> Result<Vec<ProjectionResult>> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    match projector {
        Projector::Geometric(cfg) => {
            let eps = cfg.resolve_eps(v)?;
            exec.try_map(data, |i, z| project_with_eps(z, v, cfg, eps, rng::derive_seed(seed, &[i as u64])))
        }
        Projector::Exhaustive(cfg) => {
            let lattice = SurfaceLattice::build(v, cfg, exec)?;
            exec.try_map(data, |_, z| lattice.project(z))
        }
    }
}

/// Projections plus the summary statistics of the fit.
pub fn sum_sq_projected(data: &[PhyloTree], v: &VertexSet, projector: &Projector, seed: u64, exec: Execution) -> Result<FitStatistics> {
    let per_datum = project_all(data, v, projector, seed, exec)?;
    fit_statistics(per_datum, projector.pendant_mode())
}

/// Summary statistics from existing projections.
pub fn fit_statistics(per_datum: Vec<ProjectionResult>, mode: PendantMode) -> Result<FitStatistics> {
    if per_datum.is_empty() {
        return Err(Error::EmptyData);
    }
    let sum_sq_projected = per_datum.iter().map(|r| r.distance * r.distance).sum();
    let projections: Vec<PhyloTree> = per_datum.iter().map(|r| r.projected.clone()).collect();
    let refs: Vec<&PhyloTree> = projections.iter().collect();
    let spread = mean_pairwise_distance(&refs, mode)?;
    let cfg = MeanConfig {
        eps: (spread > 0.0).then_some(1e-3 * spread),
        max_iter: 200_000,
        pendant_mode: mode,
        ..Default::default()
    };
    let mean_of_projections = cyclic_mean(&WeightedSample::uniform(projections.clone())?, &cfg)?.mean;
    let mut explained = 0.0;
    for p in &projections {
        explained += distance(&mean_of_projections, p, mode)?.powi(2);
    }
    let total = sum_sq_projected + explained;
    let r_squared = if total > 0.0 { explained / total } else { 1.0 };
    Ok(FitStatistics {
        sum_sq_projected,
        explained,
        r_squared,
        per_datum,
        mean_of_projections,
    })
}
