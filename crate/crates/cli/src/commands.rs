//! One function per subcommand.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use treespace::fmt::num;
use treespace::frechet::{frechet_mean, MeanConfig, MeanMethod, SturmSampling, WeightedSample};
use treespace::geodesic::Geodesic;
use treespace::locus::{
    fit_statistics, project_all, ExhaustiveConfig, FitStatistics, GeometricConfig, ProjectionResult, Projector,
    SurfaceLattice, TopologyMap, VertexSet,
};
use treespace::par::Execution;
use treespace::pca::{fit_component, FitConfig, ProposalKernel};
use treespace::plot::simplex_svg;
use treespace::simulate::{
    coalescent_quadruple, constrained_gene_tree_with, kingman_tree_with, make_surface_dataset, SurfaceDatasetSpec,
};
use treespace::split::LeafSet;
use treespace::{rng, Error};

use crate::io::{jnum, newick_lines, pretty, read_text, read_weights, CliError, Context};

#[derive(Args, Debug, Serialize)]
pub struct GeodesicArgs {
    /// Newick file with the source tree.
    pub a: PathBuf,
    /// Newick file with the target tree.
    pub b: PathBuf,
    /// Also emit the tree a proportion t along the geodesic.
    #[arg(long)]
    pub t: Option<f64>,
    /// Include the geodesic support (legs and common edges).
    #[arg(long)]
    pub support: bool,
}

pub fn geodesic(ctx: &mut Context, a: &GeodesicArgs) -> Result<(), CliError> {
    let x = ctx.read_tree(&a.a)?;
    let y = ctx.read_tree(&a.b)?;
    let g = Geodesic::new(&x, &y, ctx.mode).map_err(|e| CliError::data(&a.b, e))?;
    let mut summary = json!({ "distance": jnum(g.length()) });
    let mut files = Vec::new();
    if let Some(t) = a.t {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::Usage(format!("--t must lie in [0, 1], got {t}")));
        }
        let point = g.point_at(t)?;
        summary["t"] = jnum(t);
        summary["point"] = json!(point.to_string());
        files.push(("point.nwk", format!("{point}\n")));
    }
    if a.support {
        let leaves = x.leaves();
        let side = |edges: &[(treespace::Split, f64)]| -> Value {
            edges.iter().map(|&(s, l)| json!({"split": leaves.format_split(s), "length": jnum(l)})).collect()
        };
        let s = g.support();
        summary["support"] = json!({
            "legs": s.legs.iter().map(|leg| json!({"a": side(&leg.a), "b": side(&leg.b)})).collect::<Vec<_>>(),
            "common": s.common.iter().map(|c| json!({
                "split": leaves.format_split(c.split),
                "source": jnum(c.source),
                "target": jnum(c.target),
            })).collect::<Vec<_>>(),
        });
    }
    files.push(("geodesic.json", pretty(&summary)));
    let shown = files.len();
    ctx.emit(&files, shown, &summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanAlgorithm {
    Cyclic,
    Sturm,
}

#[derive(Args, Debug, Serialize)]
pub struct MeanArgs {
    /// Newick file, one tree per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Weights, one per tree; uniform when absent.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MeanAlgorithm::Cyclic)]
    pub method: MeanAlgorithm,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Convergence radius; defaults to 1e-4 times the mean pairwise distance.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
}

pub fn mean(ctx: &mut Context, a: &MeanArgs) -> Result<(), CliError> {
    let trees = ctx.read_trees(&a.input)?;
    let sample = match &a.weights {
        Some(path) => {
            let w = read_weights(path)?;
            if w.len() != trees.len() {
                return Err(CliError::data(
                    path,
                    Error::InvalidWeights(format!("{} weights for {} trees", w.len(), trees.len())),
                ));
            }
            WeightedSample::new(trees, w).map_err(|e| CliError::data(path, e))?
        }
        None => WeightedSample::uniform(trees)?,
    };
    let cfg = MeanConfig {
        eps: a.eps,
        window: a.window,
        max_iter: a.max_iter,
        pendant_mode: ctx.mode,
    };
    let method = match a.method {
        MeanAlgorithm::Cyclic => MeanMethod::Cyclic,
        MeanAlgorithm::Sturm => MeanMethod::Sturm {
            seed: a.seed,
            sampling: SturmSampling::default(),
        },
    };
    let r = frechet_mean(&sample, method, &cfg)?;
    let summary = json!({
        "mean": r.mean.to_string(),
        "objective": jnum(r.objective),
        "iterations": r.iterations,
        "converged": r.converged,
    });
    let stats = json!({
        "objective": jnum(r.objective),
        "iterations": r.iterations,
        "converged": r.converged,
    });
    ctx.emit(&[("mean.nwk", format!("{}\n", r.mean)), ("mean.json", pretty(&stats))], 2, &summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectMethod {
    Geometric,
    Exhaustive,
}

#[derive(Args, Debug, Serialize)]
pub struct ProjectorArgs {
    #[arg(long, value_enum, default_value_t = ProjectMethod::Geometric)]
    pub method: ProjectMethod,
    /// Lattice points per simplex edge for the exhaustive projector.
    #[arg(long, default_value_t = 50)]
    pub resolution: usize,
    /// Restarts of the geometric projector.
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// Convergence radius; defaults to 1e-3 times the mean pairwise vertex distance.
    #[arg(long)]
    pub eps: Option<f64>,
}

impl ProjectorArgs {
    fn projector(&self, ctx: &Context) -> Projector {
        match self.method {
            ProjectMethod::Geometric => Projector::Geometric(GeometricConfig {
                eps: self.eps,
                restarts: self.restarts,
                pendant_mode: ctx.mode,
                ..Default::default()
            }),
            ProjectMethod::Exhaustive => {
                let mut cfg = ExhaustiveConfig::with_resolution(self.resolution);
                cfg.surface.mean.eps = self.eps;
                cfg.surface.mean.pendant_mode = ctx.mode;
                cfg.pendant_mode = ctx.mode;
                Projector::Exhaustive(cfg)
            }
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ProjectArgs {
    /// Newick file with the k + 1 vertex trees.
    #[arg(long)]
    pub vertices: PathBuf,
    /// Newick file with the data trees.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub projector: ProjectorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn project(ctx: &mut Context, a: &ProjectArgs) -> Result<(), CliError> {
    let v = VertexSet::new(ctx.read_trees(&a.vertices)?).map_err(|e| CliError::data(&a.vertices, e))?;
    let data = ctx.read_trees(&a.input)?;
    let projector = a.projector.projector(&ctx);
    let per = project_all(&data, &v, &projector, a.seed, Execution::Parallel)?;
    let stats = fit_statistics(per, ctx.mode)?;
    let csv = projections_csv(&stats.per_datum, v.len());
    let summary = json!({ "stats": stats_json(&stats), "projections": projections_json(&stats.per_datum) });
    ctx.emit(&[("projections.csv", csv), ("stats.json", pretty(&stats_json(&stats)))], 1, &summary)
}

fn projections_csv(per: &[ProjectionResult], n_vertices: usize) -> String {
    let mut csv = String::from("index");
    for i in 0..n_vertices {
        write!(csv, ",p{i}").unwrap();
    }
    csv.push_str(",distance,topology,tie_set_size\n");
    for (i, r) in per.iter().enumerate() {
        write!(csv, "{i}").unwrap();
        for p in r.weights.as_slice() {
            write!(csv, ",{}", num(*p)).unwrap();
        }
        writeln!(csv, ",{},{},{}", num(r.distance), r.projected.topology().key(), r.tie_set_size).unwrap();
    }
    csv
}

fn projections_json(per: &[ProjectionResult]) -> Value {
    per.iter()
        .map(|r| {
            json!({
                "weights": r.weights.as_slice().iter().map(|&p| jnum(p)).collect::<Vec<_>>(),
                "distance": jnum(r.distance),
                "topology": r.projected.topology().key(),
                "tie_set_size": r.tie_set_size,
                "projected": r.projected.to_string(),
            })
        })
        .collect()
}

fn stats_json(s: &FitStatistics) -> Value {
    json!({
        "n": s.per_datum.len(),
        "sum_sq_projected": jnum(s.sum_sq_projected),
        "explained": jnum(s.explained),
        "r_squared": jnum(s.r_squared),
        "mean_of_projections": s.mean_of_projections.to_string(),
    })
}

#[derive(Args, Debug, Serialize)]
pub struct PcaArgs {
    /// Newick file with the data trees.
    #[arg(long)]
    pub input: PathBuf,
    /// 1 for a principal geodesic, 2 for a principal surface.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON array of proposal kernels; the default set when absent.
    #[arg(long)]
    pub kernels: Option<PathBuf>,
    /// Sweeps over which the relative improvement is measured.
    #[arg(long, default_value_t = 20)]
    pub conv_window: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub conv_threshold: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_sweeps: usize,
}

pub fn pca(ctx: &mut Context, a: &PcaArgs) -> Result<(), CliError> {
    let data = ctx.read_trees(&a.input)?;
    let kernels = match &a.kernels {
        Some(path) => serde_json::from_str::<Vec<ProposalKernel>>(&read_text(path)?)
            .map_err(|e| CliError::data(path, Error::InvalidConfig(e.to_string())))?,
        None => ProposalKernel::default_set(),
    };
    let defaults = FitConfig::default();
    let cfg = FitConfig {
        order: a.order,
        kernels,
        restarts: a.restarts,
        conv_window: a.conv_window,
        conv_threshold: a.conv_threshold,
        max_sweeps: a.max_sweeps,
        search: GeometricConfig {
            pendant_mode: ctx.mode,
            ..defaults.search
        },
        report: Projector::Geometric(GeometricConfig {
            pendant_mode: ctx.mode,
            ..Default::default()
        }),
        seed: a.seed,
        ..defaults
    };
    let fit = fit_component(&data, &cfg, Execution::Parallel)?;
    let mut stats = stats_json(&fit.stats);
    stats["order"] = json!(fit.order);
    stats["seed"] = json!(fit.seed);
    stats["restart"] = json!(fit.restart);
    stats["restart_sum_sq_projected"] = fit.restart_d2.iter().map(|&d| jnum(d)).collect();
    stats["sweeps"] = json!(fit.trace.last().map_or(0, |t| t.0));
    stats["converged"] = json!(fit.converged);
    let mut trace = String::from("sweep,sum_sq_projected\n");
    for (sweep, d2) in &fit.trace {
        writeln!(trace, "{sweep},{}", num(*d2)).unwrap();
    }
    let vertices = newick_lines(fit.vertices.vertices());
    let summary = json!({
        "stats": stats,
        "vertices": fit.vertices.vertices().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
    });
    ctx.emit(
        &[
            ("vertices.nwk", vertices),
            ("stats.json", pretty(&stats)),
            ("projections.csv", projections_csv(&fit.stats.per_datum, fit.vertices.len())),
            ("trace.csv", trace),
        ],
        2,
        &summary,
    )
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulateCommand {
    /// A Kingman species tree and gene trees under the multispecies coalescent.
    Coalescent(CoalescentArgs),
    /// A species tree, three vertex gene trees and a data gene tree.
    Quadruple(QuadrupleArgs),
    /// A synthetic data set around a known surface, from a JSON spec.
    Surface(SurfaceArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct CoalescentArgs {
    /// Number of non-root taxa.
    #[arg(long, default_value_t = 10)]
    pub taxa: usize,
    #[arg(long, default_value_t = 100)]
    pub genes: usize,
    /// Population size parameter of the gene tree coalescent.
    #[arg(long, default_value_t = treespace::simulate::DEFAULT_THETA)]
    pub theta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct QuadrupleArgs {
    #[arg(long, default_value_t = 6)]
    pub taxa: usize,
    #[arg(long, default_value_t = treespace::simulate::DEFAULT_THETA)]
    pub theta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SurfaceArgs {
    /// JSON data set spec; every field is optional.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the seed of the spec.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn simulate(ctx: &mut Context, cmd: &SimulateCommand) -> Result<(), CliError> {
    match cmd {
        SimulateCommand::Coalescent(a) => {
            let leaves = std::sync::Arc::new(LeafSet::numbered(a.taxa)?);
            let mut r = rng::stream(a.seed, &[]);
            let species = kingman_tree_with(&leaves, &mut r)?;
            let genes = (0..a.genes)
                .map(|_| constrained_gene_tree_with(&species, a.theta, &mut r))
                .collect::<Result<Vec<_>, _>>()?;
            let summary = json!({ "species": species.to_string(), "genes": genes.len() });
            ctx.emit(
                &[("species.nwk", format!("{species}\n")), ("genes.nwk", newick_lines(&genes))],
                2,
                &summary,
            )
        }
        SimulateCommand::Quadruple(a) => {
            let q = coalescent_quadruple(a.taxa, a.theta, a.seed)?;
            let mut trees = vec![q.species.clone()];
            trees.extend(q.vertices.iter().cloned());
            trees.push(q.z.clone());
            let truth = json!({
                "layout": ["u", "v0", "v1", "v2", "z"],
                "z_total_internal_length": jnum(q.z.total_internal_length()),
            });
            let summary = json!({ "trees": trees.iter().map(|t| t.to_string()).collect::<Vec<_>>(), "truth": truth });
            ctx.emit(
                &[
                    ("quadruple.nwk", newick_lines(&trees)),
                    ("vertices.nwk", newick_lines(&q.vertices)),
                    ("z.nwk", format!("{}\n", q.z)),
                    ("truth.json", pretty(&truth)),
                ],
                1,
                &summary,
            )
        }
        SimulateCommand::Surface(a) => {
            let mut spec: SurfaceDatasetSpec = match &a.spec {
                Some(path) => serde_json::from_str(&read_text(path)?)
                    .map_err(|e| CliError::data(path, Error::InvalidConfig(e.to_string())))?,
                None => SurfaceDatasetSpec::default(),
            };
            if let Some(seed) = a.seed {
                spec.seed = seed;
            }
            let d = make_surface_dataset(&spec, Execution::Parallel)?;
            let truth = json!({
                "spec": spec,
                "step_size": jnum(d.step_size),
                "weights": d.weights.iter().map(|p| p.as_slice().iter().map(|&x| jnum(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "stats": stats_json(&d.truth),
            });
            let summary = json!({
                "vertices": d.vertices.vertices().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                "truth": truth,
            });
            ctx.emit(
                &[
                    ("data.nwk", newick_lines(&d.data)),
                    ("vertices.nwk", newick_lines(d.vertices.vertices())),
                    ("on_surface.nwk", newick_lines(&d.on_surface)),
                    ("truth.json", pretty(&truth)),
                ],
                1,
                &summary,
            )
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct PlotArgs {
    /// Newick file with three vertex trees.
    #[arg(long)]
    pub vertices: PathBuf,
    /// Data trees drawn as dots at their lattice projections.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    pub resolution: usize,
}

pub fn plot_simplex(ctx: &mut Context, a: &PlotArgs) -> Result<(), CliError> {
    let v = VertexSet::new(ctx.read_trees(&a.vertices)?).map_err(|e| CliError::data(&a.vertices, e))?;
    let mut cfg = ExhaustiveConfig::with_resolution(a.resolution);
    cfg.pendant_mode = ctx.mode;
    cfg.surface.mean.pendant_mode = ctx.mode;
    let lattice = SurfaceLattice::build(&v, &cfg, Execution::Parallel)?;
    let map = TopologyMap::from_lattice(&lattice)?;
    let dots = match &a.input {
        Some(path) => {
            let data = ctx.read_trees(path)?;
            Execution::Parallel
                .try_map(&data, |_, z| lattice.project(z).map(|r| r.weights))?
        }
        None => Vec::new(),
    };
    let leaves = v.vertex(0).leaves();
    let svg = simplex_svg(&map, leaves, &dots);
    let mut csv = String::from("p0,p1,p2,topology,region\n");
    for p in &map.points {
        let w = p.weights.as_slice();
        writeln!(
            csv,
            "{},{},{},{},{}",
            num(w[0]),
            num(w[1]),
            num(w[2]),
            map.topologies[p.topology].key(),
            p.region
        )
        .unwrap();
    }
    let summary = json!({
        "resolution": map.resolution,
        "topologies": map.topologies.iter().zip(map.topology_sizes()).map(|(t, n)| json!({
            "key": t.key(),
            "splits": t.describe(leaves),
            "lattice_points": n,
        })).collect::<Vec<_>>(),
        "regions": map.regions.len(),
    });
    ctx.emit(&[("simplex.svg", svg), ("lattice.csv", csv)], 1, &summary)
}
