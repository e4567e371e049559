//! Principal surfaces fitted by stochastic search over vertex sets.
//!
//! Each sweep visits every vertex and every proposal kernel in turn, replaces
//! the vertex by a proposal, and keeps the change only when the sum of squared
//! projection distances of the data decreases.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frechet::mean_pairwise_distance;
use crate::geodesic::point_on_geodesic;
use crate::locus::{project_all, sum_sq_projected, FitStatistics, GeometricConfig, Projector, VertexSet};
use crate::par::Execution;
use crate::rng;
use crate::simulate::random_walk;
use crate::tree::PhyloTree;

/// A way to propose a replacement for one vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProposalKernel {
    /// A data tree drawn uniformly.
    DataResample,
    /// The point at a Beta(α, β) proportion along the geodesic to a uniformly drawn data tree.
    BetaBlend { alpha: f64, beta: f64 },
    /// A random walk; with `relative`, `step_size` multiplies the mean pairwise data distance.
    RandomWalk {
        steps: usize,
        step_size: f64,
        #[serde(default)]
        relative: bool,
    },
}

impl ProposalKernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProposalKernel::DataResample => Ok(()),
            ProposalKernel::BetaBlend { alpha, beta } if alpha > 0.0 && beta > 0.0 => Ok(()),
            ProposalKernel::BetaBlend { alpha, beta } => Err(Error::InvalidConfig(format!(
                "beta blend parameters must be positive, got ({alpha}, {beta})"
            ))),
            ProposalKernel::RandomWalk { steps, step_size, .. } if steps >= 1 && step_size > 0.0 && step_size.is_finite() => Ok(()),
            ProposalKernel::RandomWalk { steps, step_size, .. } => Err(Error::InvalidConfig(format!(
                "random walk needs steps >= 1 and a positive step size, got ({steps}, {step_size})"
            ))),
        }
    }

    /// Data resampling, Beta(2, 2) blending, and short and long relative walks.
    pub fn default_set() -> Vec<ProposalKernel> {
        vec![
            ProposalKernel::DataResample,
            ProposalKernel::BetaBlend { alpha: 2.0, beta: 2.0 },
            ProposalKernel::RandomWalk {
                steps: 1,
                step_size: 0.05,
                relative: true,
            },
            ProposalKernel::RandomWalk {
                steps: 5,
                step_size: 0.02,
                relative: true,
            },
        ]
    }
}

/// Draws a proposal from `x`. `scale` converts relative walk step sizes.
pub fn propose<R: Rng + ?Sized>(kernel: &ProposalKernel, x: &PhyloTree, data: &[PhyloTree], scale: f64, rng: &mut R) -> Result<PhyloTree> {
    kernel.validate()?;
    match *kernel {
        ProposalKernel::DataResample => {
            if data.is_empty() {
                return Err(Error::EmptyData);
            }
            Ok(data[rng.random_range(0..data.len())].clone())
        }
        ProposalKernel::BetaBlend { alpha, beta } => {
            if data.is_empty() {
                return Err(Error::EmptyData);
            }
            let z = &data[rng.random_range(0..data.len())];
            let t = Beta::new(alpha, beta).expect("validated parameters").sample(rng);
            point_on_geodesic(x, z, t)
        }
        ProposalKernel::RandomWalk {
            steps,
            step_size,
            relative,
        } => random_walk(x, steps, if relative { step_size * scale } else { step_size }, rng),
    }
}

#[derive(Clone, Debug)]
pub struct FitConfig {
    /// Order `k` of the surface (`k + 1` vertices).
    pub order: usize,
    pub kernels: Vec<ProposalKernel>,
    pub restarts: usize,
    /// Sweeps over which the relative improvement is measured.
    pub conv_window: usize,
    /// Stop once the relative improvement over the window drops below this.
    pub conv_threshold: f64,
    pub max_sweeps: usize,
    /// Projector inside the objective.
    pub search: GeometricConfig,
    /// Projector for the reported statistics and for ranking restarts.
    pub report: Projector,
    /// Starting vertices of the first restart; later restarts draw from the data.
    pub initial: Option<Vec<PhyloTree>>,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            order: 2,
            kernels: ProposalKernel::default_set(),
            restarts: 3,
            conv_window: 20,
            conv_threshold: 1e-3,
            max_sweeps: 1000,
            search: GeometricConfig {
                restarts: 1,
                rel_eps: 1e-2,
                ..Default::default()
            },
            report: Projector::Geometric(GeometricConfig::default()),
            initial: None,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::UnsupportedOrder(0));
        }
        if self.kernels.is_empty() {
            return Err(Error::InvalidConfig("at least one proposal kernel is needed".into()));
        }
        for k in &self.kernels {
            k.validate()?;
        }
        if self.restarts == 0 || self.conv_window == 0 || self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("restarts, conv_window and max_sweeps must be positive".into()));
        }
        if !(self.conv_threshold >= 0.0) {
            return Err(Error::InvalidConfig(format!("conv_threshold must be nonnegative, got {}", self.conv_threshold)));
        }
        if let Some(init) = &self.initial {
            if init.len() != self.order + 1 {
                return Err(Error::InvalidConfig(format!(
                    "{} initial vertices for order {}",
                    init.len(),
                    self.order
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FittedComponent {
    pub order: usize,
    pub vertices: VertexSet,
    pub stats: FitStatistics,
    /// `(sweep, D²)` of the chosen restart under the search projector; sweep 0 is the start.
    pub trace: Vec<(usize, f64)>,
    pub seed: u64,
    /// Index of the chosen restart.
    pub restart: usize,
    /// Reported D² of every restart.
    pub restart_d2: Vec<f64>,
    pub converged: bool,
}

struct RestartResult {
    vertices: VertexSet,
    trace: Vec<(usize, f64)>,
    converged: bool,
}

/// Fits a surface of order `cfg.order` to `data`.
pub fn fit_component(data: &[PhyloTree], cfg: &FitConfig, exec: Execution) -> Result<FittedComponent> {
    cfg.validate()?;
    let k = cfg.order;
    if data.len() < k + 1 {
        return Err(Error::InsufficientData {
            needed: k + 1,
            got: data.len(),
        });
    }
    if data.iter().any(|t| !t.same_leaves(&data[0])) {
        return Err(Error::LeafSetMismatch);
    }
    let refs: Vec<&PhyloTree> = data.iter().collect();
    let scale = mean_pairwise_distance(&refs, cfg.search.pendant_mode)?;
    let mut best: Option<(RestartResult, FitStatistics, usize)> = None;
    let mut restart_d2 = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let run = search(data, cfg, scale, r as u64, exec)?;
        let stats = sum_sq_projected(data, &run.vertices, &cfg.report, rng::derive_seed(cfg.seed, &[r as u64, 2]), exec)?;
        restart_d2.push(stats.sum_sq_projected);
        if best.as_ref().is_none_or(|b| stats.sum_sq_projected < b.1.sum_sq_projected) {
            best = Some((run, stats, r));
        }
    }
    let (run, stats, restart) = best.expect("at least one restart");
    Ok(FittedComponent {
        order: k,
        vertices: run.vertices,
        stats,
        trace: run.trace,
        seed: cfg.seed,
        restart,
        restart_d2,
        converged: run.converged,
    })
}

/// The order-1 fit: a geodesic segment.
pub fn fit_principal_geodesic(data: &[PhyloTree], cfg: &FitConfig, exec: Execution) -> Result<FittedComponent> {
    fit_component(data, &FitConfig { order: 1, ..cfg.clone() }, exec)
}

fn objective(data: &[PhyloTree], v: &VertexSet, cfg: &FitConfig, seed: u64, exec: Execution) -> Result<f64> {
    let per = project_all(data, v, &Projector::Geometric(cfg.search), seed, exec)?;
    Ok(per.iter().map(|p| p.distance * p.distance).sum())
}

fn search(data: &[PhyloTree], cfg: &FitConfig, scale: f64, restart: u64, exec: Execution) -> Result<RestartResult> {
    let k = cfg.order;
    // One projection seed per restart, so every candidate sees the same random numbers.
    let proj_seed = rng::derive_seed(cfg.seed, &[restart, 1]);
    let start = match &cfg.initial {
        Some(init) if restart == 0 => init.clone(),
        _ => {
            let mut r = rng::stream(cfg.seed, &[restart, 0]);
            index::sample(&mut r, data.len(), k + 1).iter().map(|i| data[i].clone()).collect()
        }
    };
    let mut v = VertexSet::new(start)?;
    if !v.vertex(0).same_leaves(&data[0]) {
        return Err(Error::LeafSetMismatch);
    }
    let mut d2 = objective(data, &v, cfg, proj_seed, exec)?;
    let mut trace = vec![(0, d2)];
    let mut converged = d2 == 0.0;
    if converged {
        return Ok(RestartResult { vertices: v, trace, converged });
    }
    for sweep in 1..=cfg.max_sweeps {
        for i in 0..=k {
            for (m, kernel) in cfg.kernels.iter().enumerate() {
                let mut r = rng::stream(cfg.seed, &[restart, 3, sweep as u64, i as u64, m as u64]);
                let x = propose(kernel, v.vertex(i), data, scale, &mut r)?;
                let candidate = v.with_vertex(i, x);
                let d = objective(data, &candidate, cfg, proj_seed, exec)?;
                if d < d2 {
                    v = candidate;
                    d2 = d;
                }
            }
        }
        trace.push((sweep, d2));
        if d2 == 0.0 {
            converged = true;
            break;
        }
        if sweep >= cfg.conv_window {
            let before = trace[sweep - cfg.conv_window].1;
            if (before - d2) / before < cfg.conv_threshold {
                converged = true;
                break;
            }
        }
    }
    Ok(RestartResult { vertices: v, trace, converged })
}
