//! Input parsing, error classification and output writing.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};
use treespace::fmt::num;
use treespace::newick::{parse_newick_lines, MissingLength, NewickOptions};
use treespace::split::LeafSet;
use treespace::tree::{PendantMode, PhyloTree};

use crate::Cli;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Data { path: String, source: treespace::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Run(treespace::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    pub fn data(path: &Path, source: treespace::Error) -> Self {
        CliError::Data {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<treespace::Error> for CliError {
    /// Configuration problems are usage errors; anything else comes from the data.
    fn from(e: treespace::Error) -> Self {
        match e {
            treespace::Error::InvalidConfig(m) | treespace::Error::ParameterOutOfRange(m) => CliError::Usage(m),
            treespace::Error::UnsupportedOrder(k) => CliError::Usage(format!("unsupported order k = {k}")),
            other => CliError::Run(other),
        }
    }
}

/// Resolved global options shared by every subcommand.
pub struct Context {
    pub mode: PendantMode,
    pub json: bool,
    pub out: Option<PathBuf>,
    newick: NewickOptions,
    run_record: Value,
}

impl Context {
    pub fn new(cli: &Cli) -> Result<Self, CliError> {
        let g = &cli.global;
        let mut newick = NewickOptions::with_root(g.root_label.clone());
        if let Some(path) = &g.leaf_map {
            let text = read_text(path)?;
            let map: HashMap<String, usize> = serde_json::from_str(&text).map_err(|e| CliError::Data {
                path: path.display().to_string(),
                source: treespace::Error::InvalidLeafSet(e.to_string()),
            })?;
            let leaves = LeafSet::from_index_map(&map).map_err(|e| CliError::data(path, e))?;
            newick.leaves = Some(Arc::new(leaves));
        }
        if let Some(len) = g.missing_length {
            if !(len >= 0.0 && len.is_finite()) {
                return Err(CliError::Usage(format!("--missing-length must be a nonnegative number, got {len}")));
            }
            newick.missing_length = MissingLength::Default(len);
        }
        let run_record = json!({
            "software": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "threads": g.threads.unwrap_or_else(rayon::current_num_threads),
            "config": cli,
        });
        Ok(Context {
            mode: g.pendant.into(),
            json: g.json,
            out: g.out.clone(),
            newick,
            run_record,
        })
    }

    /// Reads a Newick file. Later files share the leaf set of the first one read.
    pub fn read_trees(&mut self, path: &Path) -> Result<Vec<PhyloTree>, CliError> {
        let text = read_text(path)?;
        let trees = parse_newick_lines(&text, &self.newick).map_err(|e| CliError::data(path, e))?;
        if trees.is_empty() {
            return Err(CliError::data(path, treespace::Error::EmptyData));
        }
        if self.newick.leaves.is_none() {
            self.newick.leaves = Some(trees[0].leaves().clone());
        }
        Ok(trees)
    }

    pub fn read_tree(&mut self, path: &Path) -> Result<PhyloTree, CliError> {
        let mut trees = self.read_trees(path)?;
        if trees.len() != 1 {
            return Err(CliError::Usage(format!(
                "{}: expected one tree, found {}",
                path.display(),
                trees.len()
            )));
        }
        Ok(trees.remove(0))
    }

    /// Writes `files` into the output directory with `run.json`, or prints
    /// the first `shown` of them to stdout. `summary` is printed under `--json`.
    pub fn emit(&self, files: &[(&str, String)], shown: usize, summary: &Value) -> Result<(), CliError> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
                for (name, content) in files {
                    write_file(&dir.join(name), content)?;
                }
                write_file(&dir.join("run.json"), &pretty(&self.run_record))?;
                if self.json {
                    println!("{}", pretty(summary));
                } else {
                    let names: Vec<&str> = files.iter().map(|f| f.0).collect();
                    println!("wrote {} and run.json to {}", names.join(", "), dir.display());
                }
            }
            None if self.json => println!("{}", pretty(summary)),
            None => {
                for (_, content) in files.iter().take(shown) {
                    print!("{content}");
                }
            }
        }
        Ok(())
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// A number rounded to the shared output precision; non-finite values become null.
pub fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(num(x).parse::<f64>().expect("formatted number parses"))
    } else {
        Value::Null
    }
}

/// Reads nonnegative weights, one per line or comma separated. A first line
/// that is not numeric is taken as a header; `#` lines are skipped.
pub fn read_weights(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read_text(path)?;
    let mut weights = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).filter(|f| !f.is_empty()).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => weights.extend(v),
            Err(_) if weights.is_empty() && i == 0 => continue,
            Err(e) => {
                return Err(CliError::data(
                    path,
                    treespace::Error::InvalidWeights(format!("line {}: {e}", i + 1)),
                ))
            }
        }
    }
    Ok(weights)
}

pub fn newick_lines(trees: &[PhyloTree]) -> String {
    trees.iter().map(|t| format!("{t}\n")).collect()
}
