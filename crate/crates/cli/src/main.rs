//! `crra-menus`: batch front-end that reads a JSON config and writes plot-ready tables.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, RunConfig, StrategyConfig};

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2; `path` names the offending field.
    Config { path: String, message: String },
    /// Exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config { path, message } => write!(f, "config error at `{path}`: {message}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "crra-menus", version, about = "Optimal and robust decision menus for CRRA agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Overrides `solver.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `solver.n`.
    #[arg(long, global = true)]
    n: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One decision for the whole population.
    SolveSingle(Common),
    /// Optimal menu and partition; sweeps n = 1..5 unless n is given.
    SolveMenu(Common),
    /// Minimax-regret menu on the support of the distribution.
    RobustMenu(Common),
    /// E_n*, bound factor and E_inf* per menu size.
    Bounds(Common),
    /// Menu size sufficient for a loss ratio, over b/a and R sweeps.
    MinMenuSize(Common),
    /// Relative positions of the robust boundaries and targeted types.
    ComparativeStatics(Common),
    /// Monte Carlo certainty equivalents against closed form.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Constant exposure.
        #[arg(long, conflicts_with = "strategy")]
        m: Option<f64>,
        /// JSON file with `breakpoints` and `values`.
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long)]
        paths: Option<usize>,
        /// Comma-separated risk aversions.
        #[arg(long, value_delimiter = ',')]
        gamma: Option<Vec<f64>>,
    },
    /// Single-asset equivalent of a multi-asset market.
    ReduceMarket(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common) = match &cli.command {
        Command::SolveSingle(c) => ("solve-single", c),
        Command::SolveMenu(c) => ("solve-menu", c),
        Command::RobustMenu(c) => ("robust-menu", c),
        Command::Bounds(c) => ("bounds", c),
        Command::MinMenuSize(c) => ("min-menu-size", c),
        Command::ComparativeStatics(c) => ("comparative-statics", c),
        Command::Simulate { common, .. } => ("simulate", common),
        Command::ReduceMarket(c) => ("reduce-market", c),
    };
    let mut cfg = match &common.config {
        Some(p) => config::load(p)?,
        None => RunConfig::default(),
    };
    if common.seed.is_some() || common.n.is_some() {
        let mut s = cfg.solver.clone().unwrap_or_default();
        s.seed = common.seed.or(s.seed);
        s.n = common.n.or(s.n);
        cfg.solver = Some(s);
    }
    if let Command::Simulate { m, strategy, paths, gamma, .. } = &cli.command {
        let mut sim = cfg.simulate.clone().unwrap_or_default();
        if let Some(m) = m {
            sim.m = Some(*m);
            sim.strategy = None;
        }
        if let Some(p) = strategy {
            let bytes = std::fs::read(p).map_err(|e| CliError::config("--strategy", format!("{}: {e}", p.display())))?;
            let s: StrategyConfig = serde_json::from_slice(&bytes).map_err(|e| CliError::config("--strategy", e.to_string()))?;
            sim.strategy = Some(s);
            sim.m = None;
        }
        sim.paths = paths.or(sim.paths);
        sim.gamma = gamma.clone().or(sim.gamma);
        cfg.simulate = Some(sim);
    }

    let (table, default_format) = match &cli.command {
        Command::SolveSingle(_) => commands::solve_single(&cfg),
        Command::SolveMenu(_) => commands::solve_menu(&cfg),
        Command::RobustMenu(_) => commands::robust(&cfg),
        Command::Bounds(_) => commands::bounds(&cfg),
        Command::MinMenuSize(_) => commands::min_size(&cfg),
        Command::ComparativeStatics(_) => commands::statics(&cfg),
        Command::Simulate { .. } => commands::simulate(&cfg),
        Command::ReduceMarket(_) => commands::reduce_market(&cfg),
    }?;

    let output = cfg.output.take().unwrap_or_default();
    let format = common.format.or(output.format).unwrap_or(default_format);
    let canonical = serde_json::to_vec(&cfg).expect("config serializes");
    let hash = output::config_hash(name, &canonical);
    let text = output::render(&table, format, name, &hash);
    match common.out.clone().or(output.path) {
        Some(p) => std::fs::write(&p, text).map_err(|e| CliError::config("--out", format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crra-menus: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
