//! `ddc` — pipeline runner for the collaborative-filtering toolkit: ingest,
//! train, analyze embedding geometry, apply the directional correction,
//! evaluate, ablate, and sweep, all from a declarative JSON config into
//! reproducible run directories.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod commands;
mod config;
mod error;
mod rundir;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "ddc",
    version,
    about = "BPR backbones with directional popularity-bias correction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a TSV log or synthesize a corpus; k-core filter and split.
    Ingest(commands::ingest::IngestArgs),
    /// Train the configured backbone with BPR and early stopping.
    Train(commands::train::TrainArgs),
    /// Popularity-direction diagnostics for the trained embeddings.
    Geometry(commands::geometry::GeometryArgs),
    /// Fine-tune the per-user directional corrections over frozen tables.
    Finetune(commands::finetune::FinetuneArgs),
    /// Ranking metrics for the baseline or corrected model.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Run the full update-rule grid and composition variants.
    Ablate(commands::ablate::AblateArgs),
    /// Fine-tune and evaluate across preference fractions.
    SweepK(commands::sweep::SweepArgs),
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::Train(args) => commands::train(args),
        Command::Geometry(args) => commands::geometry(args),
        Command::Finetune(args) => commands::finetune(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Ablate(args) => commands::ablate(args),
        Command::SweepK(args) => commands::sweep_k(args),
    }
}

fn main() {
    // clap would exit(2) on usage errors; map them to exit code 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version are not errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
