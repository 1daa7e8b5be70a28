use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lexis_core::centrality::DEFAULT_TAU;
use lexis_core::engine::{self, RunConfig};
use lexis_core::targetgen::Model;
use lexis_core::{DagSnapshot, DotOptions, LexisDag, SymbolTable};

#[derive(Parser)]
#[command(name = "lexis", version, about = "Lexis-DAG inference and evolution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides `rng_seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short, default_value = "out")]
        out: PathBuf,
        /// Overrides `runs`.
        #[arg(long)]
        runs: Option<usize>,
        /// Overrides `iterations`.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Print metrics of a DAG snapshot as JSON.
    Analyze {
        snapshot: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
    },
    /// Render a DAG snapshot as Graphviz DOT.
    ExportDot {
        snapshot: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Symbols::Auto)]
        symbols: Symbols,
        #[arg(long, default_value_t = 24)]
        label_width: usize,
        #[arg(long)]
        unused_sources: bool,
    },
    /// Compare a snapshot with a clean-slate rebuild of its targets.
    CompareCs {
        snapshot: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
    },
    /// Print a config template.
    Template {
        #[arg(long, default_value = "MRS")]
        model: Model,
        #[arg(long, default_value_t = 12.0)]
        beta: f64,
        /// Use the large profile instead of the desk one.
        #[arg(long)]
        full: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Symbols {
    Auto,
    Letters,
    Digits,
    Dotted,
}

impl From<Symbols> for SymbolTable {
    fn from(s: Symbols) -> Self {
        match s {
            Symbols::Auto => SymbolTable::Auto,
            Symbols::Letters => SymbolTable::Letters,
            Symbols::Digits => SymbolTable::Digits,
            Symbols::Dotted => SymbolTable::Dotted,
        }
    }
}

fn load_snapshot(path: &Path) -> Result<LexisDag> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let snap: DagSnapshot = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    LexisDag::from_snapshot(&snap).with_context(|| format!("rebuilding DAG from {}", path.display()))
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, seed, out, runs, iterations } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.rng_seed = seed;
            }
            if let Some(runs) = runs {
                cfg.runs = runs;
            }
            if let Some(iterations) = iterations {
                cfg.iterations = iterations;
            }
            cfg.validate()?;
            let rows = engine::run_experiment(&cfg, &out)?;
            let last = rows.last().context("no iterations recorded")?;
            println!("{} runs={} iterations={} -> {}", cfg.model, cfg.runs, cfg.iterations, out.display());
            println!("normalized_cost  {}", fmt(last.normalized_cost));
            println!("avg_depth        {}", fmt(last.avg_depth));
            println!("avg_node_length  {}", fmt(last.avg_node_length));
            println!("diversity        {}", fmt(last.diversity));
            println!("core_size        {}", fmt(last.core_size));
            println!("h_score          {}", fmt(last.h_score));
        }
        Command::Analyze { snapshot, tau } => {
            let dag = load_snapshot(&snapshot)?;
            let record = engine::analyze(&dag, tau);
            println!("{}", serde_json::to_string_pretty(&record)?);
        }
        Command::ExportDot { snapshot, out, symbols, label_width, unused_sources } => {
            let dag = load_snapshot(&snapshot)?;
            let dot = dag.to_dot(&DotOptions {
                symbols: symbols.into(),
                label_width,
                include_unused_sources: unused_sources,
            });
            match out {
                Some(path) => fs::write(&path, dot).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{dot}"),
            }
        }
        Command::CompareCs { snapshot, tau } => {
            let dag = load_snapshot(&snapshot)?;
            let record = engine::compare_dags(&dag, 0, tau);
            println!("{}", serde_json::to_string_pretty(&record)?);
        }
        Command::Template { model, beta, full } => {
            let cfg = if full { RunConfig::full(model, beta) } else { RunConfig::desk(model, beta) };
            cfg.validate()?;
            print!("{}", cfg.to_toml_string());
        }
    }
    Ok(())
}
