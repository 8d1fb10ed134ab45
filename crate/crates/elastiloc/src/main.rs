//! Thin command-line wrapper over the `elastiloc::cli` module.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use elastiloc::cli::{commands, RunConfig};
use elastiloc::error::Error;

#[derive(Parser)]
#[command(
    name = "elastiloc",
    about = "Simulate surface sensor readings from a localized elastic source and train models that recover the source position",
    version
)]
struct Cli {
    /// Configuration file (key = value lines; see the library docs for the schema)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration key (repeatable); flags win over the file
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Paper-scale preset: n_samples=5000, forest_n_estimators=800
    #[arg(long, global = true)]
    paper_scale: bool,

    /// Output directory for artifacts and manifests
    #[arg(long, default_value = "runs/out", global = true)]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the dataset(s) for the configured recipe
    Generate,
    /// Train the configured model families and write a comparison report
    Train {
        /// Dataset CSV produced by `generate`
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Grid-search hyperparameters with k-fold cross-validation
    Tune {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Evaluate saved models; two --model/--dataset pairs add an averaged row
    Evaluate {
        /// Saved model file (repeatable, max twice)
        #[arg(long, required = true)]
        model: Vec<PathBuf>,
        /// Dataset CSV, one per --model, in the same order
        #[arg(long, required = true)]
        dataset: Vec<PathBuf>,
    },
    /// Train/evaluate the ensemble on nested microphone subsets
    AblateSensors {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Re-render figures from an existing report CSV
    Report {
        #[arg(long)]
        report: PathBuf,
        /// Optional predictions CSV for the truth-vs-prediction scatter
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
}

fn parse_sets(raw: &[String]) -> Result<Vec<(String, String)>, Error> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{s}'")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    let sets = parse_sets(&cli.set)?;
    let cfg = RunConfig::load(cli.config.as_deref(), cli.paper_scale, &sets)?;
    if cfg.threads > 0 {
        // Ignore the error when a pool already exists (repeat invocations
        // in one process).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }

    match &cli.command {
        Command::Generate => {
            commands::cmd_generate(&cfg, &cli.out)?;
        }
        Command::Train { dataset } => commands::cmd_train(&cfg, dataset, &cli.out)?,
        Command::Tune { dataset } => commands::cmd_tune(&cfg, dataset, &cli.out)?,
        Command::Evaluate { model, dataset } => {
            if model.len() != dataset.len() {
                return Err(Error::Config(format!(
                    "got {} --model flags but {} --dataset flags",
                    model.len(),
                    dataset.len()
                )));
            }
            let pairs: Vec<(PathBuf, PathBuf)> = model
                .iter()
                .cloned()
                .zip(dataset.iter().cloned())
                .collect();
            commands::cmd_evaluate(&cfg, &pairs, &cli.out)?;
        }
        Command::AblateSensors { dataset } => {
            commands::cmd_ablate_sensors(&cfg, dataset, &cli.out)?
        }
        Command::Report {
            report,
            predictions,
        } => commands::cmd_report(&cfg, report, predictions.as_deref(), &cli.out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
