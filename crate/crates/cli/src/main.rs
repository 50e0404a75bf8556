use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use rhgraph::ingest::Modality;
use rhgraph_cli::{cmd_experiment, cmd_heatmap, cmd_ingest, cmd_score, cmd_simulate};

/// Graph similarity measures and temporal anomaly detection for evolving
/// network graphs.
#[derive(Parser)]
#[command(name = "rhgraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario from a config file and write measure
    /// distributions, anomaly scores, ROC curves, and a summary.
    Simulate(SimulateArgs),
    /// Parse an event log into a persisted sliding-window graph sequence.
    Ingest(IngestArgs),
    /// Run the before/after KS experiment grid around marked events.
    Experiment(ExperimentArgs),
    /// All-pairs RH distances and Gaussian similarity over a window range.
    Heatmap(HeatmapArgs),
    /// Score observations against a baseline sample file.
    Score(ScoreArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Override the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $RHGRAPH_OUT, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    /// Event log file.
    #[arg(long)]
    log: PathBuf,
    /// Modality: auth, authfail, process, dns, or flow.
    #[arg(long)]
    modality: String,
    /// Window length in seconds.
    #[arg(long, default_value_t = 60)]
    window: u64,
    /// Window advance in seconds.
    #[arg(long, default_value_t = 20)]
    step: u64,
    /// Abort on the first malformed line instead of skipping it.
    #[arg(long)]
    strict_parse: bool,
    /// Output directory for the sequence store.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Persisted sequence directory (repeatable).
    #[arg(long = "seq", required = true)]
    sequences: Vec<PathBuf>,
    /// CSV of marked event timestamps.
    #[arg(long)]
    marks: PathBuf,
    /// Window length ell in seconds (repeatable).
    #[arg(long = "ell", required = true)]
    ells: Vec<u64>,
    /// Pair lag delta in seconds (repeatable).
    #[arg(long = "delta", required = true)]
    deltas: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HeatmapArgs {
    /// Persisted sequence directory.
    #[arg(long)]
    seq: PathBuf,
    /// First window index of the range.
    #[arg(long, default_value_t = 0)]
    from: usize,
    /// One past the last window index.
    #[arg(long)]
    to: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Baseline sample CSV.
    #[arg(long)]
    baseline: PathBuf,
    /// Observations CSV; each row's last field is the value.
    #[arg(long)]
    observations: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), rhgraph_cli::CliError> {
    match cli.command {
        Command::Simulate(a) => {
            cmd_simulate(&a.config, a.seed, a.out)?;
        }
        Command::Ingest(a) => {
            let modality = Modality::from_str(&a.modality)?;
            cmd_ingest(&a.log, modality, a.window, a.step, a.strict_parse, a.out)?;
        }
        Command::Experiment(a) => {
            cmd_experiment(&a.sequences, &a.marks, &a.ells, &a.deltas, a.out)?;
        }
        Command::Heatmap(a) => {
            cmd_heatmap(&a.seq, a.from, a.to, a.out)?;
        }
        Command::Score(a) => {
            cmd_score(&a.baseline, &a.observations, a.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
