//! Experiment runner CLI.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 training
//! divergence, 4 missing artifact (checkpoint, dataset or config file).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qdimred::data::{self, BuiltinDataset};
use qdimred::experiment::{
    encode_with_checkpoint, run_experiment, run_reproduce, ExperimentConfig, ExperimentKind,
};
use qdimred::Error;

#[derive(Parser)]
#[command(name = "qdimred", version, about = "Hybrid autoencoder / quantum kernel experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a canonical experiment (table1, table3, table4, fig7).
    Reproduce {
        kind: String,
        /// Dataset or variant name; fig7 runs all four variants when omitted.
        #[arg(long)]
        dataset: Option<String>,
        /// Number of seeds (0..K).
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Apply a trained encoder checkpoint to new feature rows.
    Encode {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Headerless CSV of feature rows.
        #[arg(long)]
        input: PathBuf,
        /// Destination CSV of encoded angles (one column per qubit).
        #[arg(long)]
        output: PathBuf,
    },
    /// Inspect bundled resources.
    Info {
        #[command(subcommand)]
        what: InfoCommand,
    },
}

#[derive(Subcommand)]
enum InfoCommand {
    /// Print shape, classes and checksum of a bundled dataset.
    Dataset { name: String },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Parse { .. }
        | Error::DimensionMismatch(_) => 2,
        Error::Divergence(_) => 3,
        Error::MissingArtifact(_) => 4,
        _ => 1,
    }
}

fn summarize(report: &qdimred::experiment::ExperimentReport) {
    for row in &report.rows {
        let latent = row
            .latent_dim
            .map(|l| format!(", latent={l}"))
            .unwrap_or_default();
        println!(
            "{:12} {:9} best seed {:>2}: test {} = {:.6}{latent}",
            row.label, row.kind, row.best_seed, row.metric, row.best_test_value
        );
    }
}

fn run(cli: Cli) -> qdimred::Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::from_toml_file(&config)?;
            if let Some(dir) = out {
                cfg.experiment.output_dir = dir;
            }
            let report = run_experiment(&cfg)?;
            summarize(&report);
            println!("report written to {}", cfg.experiment.output_dir.display());
        }
        Command::Reproduce { kind, dataset, seeds, out } => {
            let kind = ExperimentKind::from_name(&kind)?;
            let reports = run_reproduce(kind, dataset.as_deref(), seeds, &out)?;
            for (variant, report) in &reports {
                println!("== {variant}");
                summarize(report);
            }
            println!("reports written under {}", out.display());
        }
        Command::Encode { checkpoint, input, output } => {
            let rows = encode_with_checkpoint(&checkpoint, &input, &output)?;
            println!("encoded {rows} rows -> {}", output.display());
        }
        Command::Info { what } => match what {
            InfoCommand::Dataset { name } => {
                let which = BuiltinDataset::from_name(&name)?;
                let ds = data::load_builtin(which)?;
                println!(
                    "{name}: n={}, N={}, C={}",
                    ds.n_samples(),
                    ds.n_features(),
                    ds.n_classes
                );
                println!("sha256: {}", data::builtin_checksum(which)?);
                println!("features: {}", ds.feature_names.join(", "));
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
