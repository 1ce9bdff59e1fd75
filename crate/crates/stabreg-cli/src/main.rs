//! `stabreg`: compute, compare and simulate queuing stability regions of
//! a TDD cell with base-station relaying.
//!
//! Thread count for the parallel sweeps follows `RAYON_NUM_THREADS`.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use stabreg_cli::commands;
use stabreg_cli::config::ScenarioDoc;

#[derive(Parser)]
#[command(name = "stabreg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a stability region and write its vertex file.
    Region {
        /// Scenario configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Construction: exact | approx (three-user), exact | reduced |
        /// epsilon (multi-user).
        #[arg(long)]
        mode: String,
        /// Override the sweep grid resolution.
        #[arg(long)]
        grid: Option<usize>,
        /// Override the epsilon precision target.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output directory (defaults to the config's outputs.dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the exact and approximated constructions.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run slot-level simulations and stability probes.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the slot horizon.
        #[arg(long)]
        horizon: Option<u64>,
        /// Override the seed list (repeatable).
        #[arg(long)]
        seed: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration file and report problems.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> anyhow::Result<ScenarioDoc> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    ScenarioDoc::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e:#}", path.display()))
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Region {
            config,
            mode,
            grid,
            epsilon,
            out,
        } => load(&config).and_then(|mut doc| {
            if let Some(g) = grid {
                doc.sweep.grid = g;
            }
            if let Some(e) = epsilon {
                doc.sweep.epsilon = e;
            }
            let dir = commands::resolve_out_dir(&doc, out.as_deref());
            commands::cmd_region(&doc, &mode, &dir)
        }),
        Command::Compare { config, grid, out } => load(&config).and_then(|mut doc| {
            if let Some(g) = grid {
                doc.sweep.grid = g;
            }
            let dir = commands::resolve_out_dir(&doc, out.as_deref());
            commands::cmd_compare(&doc, &dir)
        }),
        Command::Simulate {
            config,
            horizon,
            seed,
            out,
        } => load(&config).and_then(|mut doc| {
            if let Some(h) = horizon {
                doc.sweep.horizon = h;
            }
            if !seed.is_empty() {
                doc.sweep.seeds = seed;
            }
            let dir = commands::resolve_out_dir(&doc, out.as_deref());
            commands::cmd_simulate(&doc, &dir)
        }),
        Command::ValidateConfig { config } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", config.display()));
            text.and_then(|t| commands::cmd_validate(&t, &config))
        }
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
