//! `treespace`: geodesics, means, surface projections and principal surfaces
//! of phylogenetic trees from the command line.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a data error.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use treespace::tree::PendantMode;

use crate::io::CliError;

#[derive(Parser, Debug, Serialize)]
#[command(name = "treespace", version, about = "Statistics in the space of phylogenetic trees")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct Global {
    /// Worker threads; defaults to the available parallelism. Results do not depend on it.
    #[arg(long, global = true, env = "TSP_THREADS")]
    pub threads: Option<usize>,
    /// Whether pendant edge lengths enter distances.
    #[arg(long, global = true, value_enum, default_value_t = Pendant::Ignore)]
    pub pendant: Pendant,
    /// Print a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write all outputs and a run.json record into this directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Label of the leaf that roots every tree.
    #[arg(long, global = true, default_value = "0")]
    pub root_label: String,
    /// JSON object mapping each label to its leaf index; overrides --root-label.
    #[arg(long, global = true)]
    pub leaf_map: Option<PathBuf>,
    /// Length given to edges without one; by default a missing length is an error.
    #[arg(long, global = true)]
    pub missing_length: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pendant {
    Include,
    Ignore,
}

impl From<Pendant> for PendantMode {
    fn from(p: Pendant) -> Self {
        match p {
            Pendant::Include => PendantMode::Include,
            Pendant::Ignore => PendantMode::Ignore,
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Distance and geodesic between two trees.
    Geodesic(commands::GeodesicArgs),
    /// Weighted Fréchet mean of a set of trees.
    Mean(commands::MeanArgs),
    /// Project data trees onto the surface spanned by a vertex set.
    Project(commands::ProjectArgs),
    /// Fit a principal geodesic (order 1) or surface (order 2).
    Pca(commands::PcaArgs),
    /// Generate synthetic trees.
    #[command(subcommand)]
    Simulate(commands::SimulateCommand),
    /// Ternary diagram of the surface topology over the simplex.
    PlotSimplex(commands::PlotArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    let mut ctx = io::Context::new(cli)?;
    match &cli.command {
        Command::Geodesic(a) => commands::geodesic(&mut ctx, a),
        Command::Mean(a) => commands::mean(&mut ctx, a),
        Command::Project(a) => commands::project(&mut ctx, a),
        Command::Pca(a) => commands::pca(&mut ctx, a),
        Command::Simulate(a) => commands::simulate(&mut ctx, a),
        Command::PlotSimplex(a) => commands::plot_simplex(&mut ctx, a),
    }
}
