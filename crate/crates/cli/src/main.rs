//! `netlearn` — reproducible netlist representation-learning pipeline.
//! One subcommand per stage (lint, gen, curate, featurize, train, eval)
//! plus `pipeline`, which chains curate → train → eval in one directory.
//! Every artifact-producing command writes a run manifest beside its
//! output; all randomness flows from the seed in the config or `--seed`.

mod commands;
mod error;
mod manifest;
mod support;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::TaskKind;

#[derive(Parser)]
#[command(name = "netlearn", version, about = "Netlist representation-learning pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and lint netlist files; exit 0 iff every file is clean.
    Lint {
        /// Netlist files to check.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Cell library file (`NAME FUNCTION ARITY` lines).
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Generate candidate netlists from a curation config, lint-repairing
    /// each through the configured client.
    Gen {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for netlist files and the manifest.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's client: stub, cmd:<command>, http:<endpoint>.
        #[arg(long)]
        client: Option<String>,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Run the full curation pipeline: generate, lint-repair, cell-count
    /// filter, similarity filter, architecture vote; emit dataset + ledger.
    Curate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Similarity-filter threshold override.
        #[arg(long)]
        tau: Option<f64>,
        /// Cell-count filter floor override (fraction of class mean).
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        client: Option<String>,
        #[arg(long)]
        lib: Option<PathBuf>,
    },
    /// Flatten netlists, label gates via the label map, and write one
    /// dataset file of feature-annotated graphs.
    Featurize {
        /// Netlist files; each becomes one labeled graph.
        #[arg(required = true)]
        netlists: Vec<PathBuf>,
        /// `PREFIX CLASS` lines mapping instance paths to classes.
        #[arg(long)]
        labelmap: Option<PathBuf>,
        #[arg(long)]
        lib: Option<PathBuf>,
        /// Output dataset file.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for parsing and flattening.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Train a classifier on a dataset file and write a checkpoint.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        /// Output checkpoint file.
        #[arg(long)]
        out: PathBuf,
        /// Training config (key=value lines); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Disable inclusion-frequency loss normalization.
        #[arg(long)]
        no_norm: bool,
        #[arg(long, value_enum, default_value = "node")]
        task: TaskKind,
    },
    /// Evaluate a checkpoint on a dataset; write JSON + plain-text reports.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Output directory for the reports and manifest.
        #[arg(long)]
        out: PathBuf,
        /// Additionally report binary boundary P/R/F1 for this class.
        #[arg(long)]
        target_class: Option<String>,
        #[arg(long, value_enum, default_value = "node")]
        task: TaskKind,
    },
    /// Chain curate → train → eval into one output directory.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Training config file; defaults apply when omitted.
        #[arg(long)]
        train_config: Option<PathBuf>,
        #[arg(long)]
        client: Option<String>,
        #[arg(long)]
        lib: Option<PathBuf>,
        #[arg(long)]
        target_class: Option<String>,
        #[arg(long, value_enum, default_value = "node")]
        task: TaskKind,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Lint { paths, lib } => commands::cmd_lint(paths, lib.as_deref()),
        Command::Gen {
            config,
            out,
            seed,
            client,
            lib,
        } => commands::cmd_gen(config, out, *seed, client.as_deref(), lib.as_deref()),
        Command::Curate {
            config,
            out,
            seed,
            tau,
            rho,
            client,
            lib,
        } => commands::cmd_curate(
            config,
            out,
            *seed,
            *tau,
            *rho,
            client.as_deref(),
            lib.as_deref(),
        ),
        Command::Featurize {
            netlists,
            labelmap,
            lib,
            out,
            jobs,
        } => commands::cmd_featurize(netlists, labelmap.as_deref(), lib.as_deref(), out, *jobs),
        Command::Train {
            dataset,
            out,
            config,
            seed,
            no_norm,
            task,
        } => commands::cmd_train(dataset, out, config.as_deref(), *seed, *no_norm, *task),
        Command::Eval {
            checkpoint,
            dataset,
            out,
            target_class,
            task,
        } => commands::cmd_eval(checkpoint, dataset, out, target_class.as_deref(), *task),
        Command::Pipeline {
            config,
            out,
            seed,
            train_config,
            client,
            lib,
            target_class,
            task,
        } => commands::cmd_pipeline(
            config,
            out,
            *seed,
            train_config.as_deref(),
            client.as_deref(),
            lib.as_deref(),
            target_class.as_deref(),
            *task,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code as u8)
        }
    }
}
