//! Command-line surface for `vsparse-core`: argument parsing, input loading,
//! and report rendering. `run` does no file writes itself so that a failed
//! run leaves nothing behind.

mod commands;
mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vsparse_core::{Error, Result, OPT_TOL};

pub use commands::parse_cube_cut;
pub use report::{Format, Report, Table};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "vsparse",
    version,
    about = "Vertex cut and flow sparsifier experiments"
)]
pub struct RunConfig {
    /// Base seed; every randomized step forks its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance for pass/fail flags in reports.
    #[arg(long, global = true, default_value_t = OPT_TOL)]
    pub tol: f64,
    /// Report format. Without `--out`, setting it prints the report.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Report file; written only when the run succeeds.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Path,
    Cycle,
    Star,
    Complete,
    Grid,
    Random,
    Cube,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContractMode {
    Quality,
    Zeroext,
    Cutcut,
    Semimetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteMode {
    /// Each tree edge is routed through the optimal flow of the aggregate.
    Aggregate,
    /// Each tree edge follows its stored shortest path.
    Stored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemArg {
    Sparsest,
    Multicut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CubeOp {
    Build,
    Sparsifier,
    Cuts,
    Quality,
    Lpbound,
    Expansion,
    Route,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Generate a graph file.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        /// Node count (leaf count for `star`).
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        /// Terminal count for `random`.
        #[arg(long)]
        k: Option<usize>,
        /// Edge probability for `random`.
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        /// Terminal node indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        terminals: Option<Vec<usize>>,
        /// Dimension for `cube`.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Exact contraction quality, 0-extension and its relaxations.
    Contract {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = ContractMode::Quality)]
        mode: ContractMode,
        /// Terminal metric for `zeroext`, `semimetric` and `cutcut`.
        #[arg(long)]
        metric: Option<PathBuf>,
        /// Cut decomposition of the metric for `cutcut`.
        #[arg(long)]
        cuts: Option<PathBuf>,
    },
    /// Solve the lifted LP for the best flow sparsifier.
    Lift {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        verify: bool,
        /// Random demands checked by `--verify`.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Sample terminal trees and report their stretch.
    Frt {
        #[arg(long)]
        graph: PathBuf,
        /// Metric on all nodes; defaults to hop distance in the graph.
        #[arg(long)]
        metric: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Pack 0-decompositions into a distribution.
    Pack {
        #[arg(long)]
        graph: PathBuf,
        /// Round cap; defaults to `32 ceil(ln m)`.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
    /// Oblivious routing with a packed distribution.
    Route {
        /// Defaults to the graph embedded in the distribution file.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        dist: PathBuf,
        /// One demand vector to route.
        #[arg(long)]
        demands: Option<PathBuf>,
        /// Number of random demands to route instead.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, value_enum, default_value_t = RouteMode::Aggregate)]
        mode: RouteMode,
    },
    /// Integral dual from sampled trees against the fractional optimum.
    Gap {
        /// Defaults to the graph embedded in the distribution file.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum, default_value_t = ProblemArg::Sparsest)]
        problem: ProblemArg,
        /// Demand CSV; multicut uses its pairs. Defaults to all terminal pairs.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
    /// Hypercube instance experiments.
    Cube {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum)]
        op: CubeOp,
        /// Named cut whose spectrum `cuts` reports, e.g. `majority`, `axis(1)`.
        #[arg(long)]
        cut: Option<String>,
        /// Random subsets for `expansion`.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Exhaustive quality of a sparsifier against a graph.
    Quality {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        sparsifier: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen { .. } => "gen",
            Command::Contract { .. } => "contract",
            Command::Lift { .. } => "lift",
            Command::Frt { .. } => "frt",
            Command::Pack { .. } => "pack",
            Command::Route { .. } => "route",
            Command::Gap { .. } => "gap",
            Command::Cube { .. } => "cube",
            Command::Quality { .. } => "quality",
        }
    }
}

/// What a run produced. Nothing has been written yet.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub stdout: String,
    pub file: Option<(PathBuf, String)>,
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::input(format!("`--{name}` must be positive")));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::input("`--tol` must be positive and finite"));
        }
        match &self.command {
            Command::Lift { samples, .. } => positive("samples", *samples),
            Command::Frt { trials, .. } => positive("trials", *trials),
            Command::Pack { iters, epsilon, .. } => {
                if let Some(i) = iters {
                    positive("iters", *i)?;
                }
                if !(*epsilon >= 0.0 && epsilon.is_finite()) {
                    return Err(Error::input("`--epsilon` must be nonnegative and finite"));
                }
                Ok(())
            }
            Command::Route {
                random: Some(r), ..
            } => positive("random", *r),
            Command::Gap { samples, .. } => positive("samples", *samples),
            Command::Cube { samples, .. } => positive("samples", *samples),
            _ => Ok(()),
        }
    }
}

/// Runs one command. Writing `file` is left to the caller.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let report = commands::dispatch(config)?;
    let meta = report::Meta {
        command: config.command.name(),
        config: serde_json::to_value(config).map_err(|e| Error::internal(e.to_string()))?,
        tol: config.tol,
    };
    match (&config.out, config.format) {
        (Some(path), format) => {
            let body = report::render(&report, &meta, format.unwrap_or(Format::Json))?;
            Ok(RunOutput {
                stdout: report.summary + "\n",
                file: Some((path.clone(), body)),
            })
        }
        (None, Some(format)) => Ok(RunOutput {
            stdout: report::render(&report, &meta, format)?,
            file: None,
        }),
        (None, None) => Ok(RunOutput {
            stdout: report.summary + "\n",
            file: None,
        }),
    }
}
