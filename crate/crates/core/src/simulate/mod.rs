//! Synthetic data: coalescent trees, rearrangements and dispersed samples
//! around a known surface.

mod coalescent;
mod rearrange;

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

pub use coalescent::{constrained_gene_tree, constrained_gene_tree_with, kingman_tree, kingman_tree_with, DEFAULT_THETA};
pub use rearrange::{nni, nni_edges, random_nni, random_spr, random_walk, spr, spr_moves};

use crate::error::{Error, Result};
use crate::locus::{sum_sq_projected, surface_point, ExhaustiveConfig, FitStatistics, Projector, SimplexPoint, SurfaceConfig, VertexSet};
use crate::par::Execution;
use crate::rng;
use crate::split::LeafSet;
use crate::tree::{PendantMode, PhyloTree};

/// Topology rearrangement used to derive the surface vertices from `w₀`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopoOp {
    #[default]
    Nni,
    Spr,
}

/// Random-walk step size applied to points of the surface.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dispersion {
    /// 0.02 ‖w₀‖.
    #[default]
    Low,
    /// 0.08 ‖w₀‖.
    High,
    /// An absolute step size.
    Step(f64),
}

impl Dispersion {
    pub fn step_size(self, w0_norm: f64) -> f64 {
        match self {
            Dispersion::Low => 0.02 * w0_norm,
            Dispersion::High => 0.08 * w0_norm,
            Dispersion::Step(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceDatasetSpec {
    pub n_taxa: usize,
    pub n_points: usize,
    pub topo_op: TopoOp,
    pub op_count: usize,
    pub gamma_shape: f64,
    pub gamma_rate: f64,
    /// One entry per surface vertex.
    pub dirichlet_alpha: Vec<f64>,
    pub dispersion: Dispersion,
    pub walk_steps: usize,
    /// Lattice resolution of the exhaustive projector computing the truth.
    pub truth_resolution: usize,
    pub seed: u64,
}

impl Default for SurfaceDatasetSpec {
    fn default() -> Self {
        SurfaceDatasetSpec {
            n_taxa: 10,
            n_points: 100,
            topo_op: TopoOp::Nni,
            op_count: 2,
            gamma_shape: 2.0,
            gamma_rate: 20.0,
            dirichlet_alpha: vec![4.0, 4.0, 4.0],
            dispersion: Dispersion::Low,
            walk_steps: 3,
            truth_resolution: 50,
            seed: 0,
        }
    }
}

impl SurfaceDatasetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_taxa < 4 {
            return bad(format!("n_taxa must be at least 4, got {}", self.n_taxa));
        }
        if self.n_points == 0 {
            return bad("n_points must be positive".into());
        }
        if !(self.gamma_shape > 0.0 && self.gamma_rate > 0.0) {
            return bad("gamma shape and rate must be positive".into());
        }
        if !(2..=3).contains(&self.dirichlet_alpha.len()) {
            return bad(format!(
                "dirichlet_alpha needs 2 or 3 entries, got {}",
                self.dirichlet_alpha.len()
            ));
        }
        if self.dirichlet_alpha.iter().any(|a| !(*a > 0.0)) {
            return bad("dirichlet_alpha entries must be positive".into());
        }
        if let Dispersion::Step(s) = self.dispersion {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("dispersion step must be nonnegative, got {s}"));
            }
        }
        if self.truth_resolution == 0 {
            return bad("truth_resolution must be positive".into());
        }
        Ok(())
    }

    fn lengths(&self) -> Gamma<f64> {
        Gamma::new(self.gamma_shape, 1.0 / self.gamma_rate).expect("validated gamma parameters")
    }
}

/// A sample scattered around a known surface.
#[derive(Clone, Debug)]
pub struct SurfaceDataset {
    pub spec: SurfaceDatasetSpec,
    pub vertices: VertexSet,
    /// Dirichlet weights of the generating surface points.
    pub weights: Vec<SimplexPoint>,
    pub on_surface: Vec<PhyloTree>,
    pub data: Vec<PhyloTree>,
    pub step_size: f64,
    /// Fit of the generating surface to the data under the exhaustive projector.
    pub truth: FitStatistics,
}

/// Dirichlet draw as normalized independent Gamma(αᵢ, 1) variables.
pub fn dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<SimplexPoint> {
    let mut g = Vec::with_capacity(alpha.len());
    for &a in alpha {
        let d = Gamma::new(a, 1.0).map_err(|e| Error::ParameterOutOfRange(format!("dirichlet parameter {a}: {e}")))?;
        g.push(d.sample(rng));
    }
    SimplexPoint::normalized(&g)
}

/// Replaces every edge length with an independent draw.
fn with_random_lengths<R: Rng + ?Sized>(tree: &PhyloTree, dist: &Gamma<f64>, rng: &mut R) -> Result<PhyloTree> {
    let edges: Vec<_> = tree.edges().iter().map(|&(s, _)| (s, dist.sample(rng))).collect();
    PhyloTree::new(tree.leaves().clone(), edges)
}

/// `w₀` followed by vertices derived from it by independent rearrangements.
fn surface_vertices(spec: &SurfaceDatasetSpec) -> Result<VertexSet> {
    let leaves = Arc::new(LeafSet::numbered(spec.n_taxa)?);
    let dist = spec.lengths();
    let mut r = rng::stream(spec.seed, &[0]);
    let w0 = with_random_lengths(&kingman_tree_with(&leaves, &mut r)?, &dist, &mut r)?;
    let mut vertices = vec![w0.clone()];
    for j in 1..spec.dirichlet_alpha.len() {
        let mut r = rng::stream(spec.seed, &[1, j as u64]);
        let mut w = w0.clone();
        for _ in 0..spec.op_count {
            let len = dist.sample(&mut r);
            w = match spec.topo_op {
                TopoOp::Nni => random_nni(&w, len, &mut r)?,
                TopoOp::Spr => random_spr(&w, len, &mut r)?,
            };
        }
        vertices.push(w);
    }
    VertexSet::new(vertices)
}

/// Generates a surface from the spec, samples points on it and disperses them
/// by random walks. The truth statistics use the exhaustive projector.
pub fn make_surface_dataset(spec: &SurfaceDatasetSpec, exec: Execution) -> Result<SurfaceDataset> {
    spec.validate()?;
    let vertices = surface_vertices(spec)?;
    let step_size = spec.dispersion.step_size(vertices.vertex(0).norm(PendantMode::Ignore));
    let surface = SurfaceConfig::default();
    let idx: Vec<usize> = (0..spec.n_points).collect();
    let points = exec.try_map(&idx, |_, &i| {
        let mut r = rng::stream(spec.seed, &[2, i as u64]);
        let p = dirichlet(&spec.dirichlet_alpha, &mut r)?;
        let x = surface_point(&vertices, &p, &surface)?;
        let z = random_walk(&x, spec.walk_steps, step_size, &mut r)?;
        Ok::<_, Error>((p, x, z))
    })?;
    let mut weights = Vec::with_capacity(points.len());
    let mut on_surface = Vec::with_capacity(points.len());
    let mut data = Vec::with_capacity(points.len());
    for (p, x, z) in points {
        weights.push(p);
        on_surface.push(x);
        data.push(z);
    }
    let projector = Projector::Exhaustive(ExhaustiveConfig::with_resolution(spec.truth_resolution));
    let truth = sum_sq_projected(&data, &vertices, &projector, spec.seed, exec)?;
    Ok(SurfaceDataset {
        spec: spec.clone(),
        vertices,
        weights,
        on_surface,
        data,
        step_size,
        truth,
    })
}

/// A species tree `u`, three gene trees forming a surface and a fourth gene
/// tree to project, all drawn inside `u`.
#[derive(Clone, Debug)]
pub struct Quadruple {
    pub species: PhyloTree,
    pub vertices: [PhyloTree; 3],
    pub z: PhyloTree,
}

pub fn coalescent_quadruple(n_taxa: usize, theta: f64, seed: u64) -> Result<Quadruple> {
    let leaves = Arc::new(LeafSet::numbered(n_taxa)?);
    let mut r = rng::stream(seed, &[]);
    let species = kingman_tree_with(&leaves, &mut r)?;
    let mut gene = || constrained_gene_tree_with(&species, theta, &mut r);
    let vertices = [gene()?, gene()?, gene()?];
    let z = gene()?;
    Ok(Quadruple { species, vertices, z })
}
