mod commands;
mod seeds;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "sysid", version, about = "Prediction-error identification of state-space models")]
struct Cli {
    /// Output root; relative config paths are resolved against it.
    #[arg(long, global = true, env = "SYSID_OUT", default_value = "sysid-out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate seeded train/test datasets with their truth sidecars.
    Generate(GenerateArgs),
    /// Train a model (multistart, optional bootstrap) and save it.
    Train(TrainArgs),
    /// Score a saved model on a dataset.
    Eval(EvalArgs),
    /// Group-lasso structure selection followed by re-estimation.
    Select(SelectArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `benchmark.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Dataset directory; defaults to `<out>/<paths.data_dir>`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Training seeds, e.g. `0..9` (inclusive) or `1,4,7`.
    #[arg(long)]
    seeds: Option<String>,
    /// Number of random starts; seeds `0..N-1` unless `--seeds` is given.
    #[arg(long)]
    multistart: Option<usize>,
    /// Drop the noise model (`nz = 0`).
    #[arg(long)]
    plant_only: bool,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Model file written by `train` or `select`.
    #[arg(long)]
    model: PathBuf,
    /// Dataset CSV to score; reported in the test columns.
    #[arg(long)]
    data: PathBuf,
    /// Optional second dataset reported in the train columns.
    #[arg(long)]
    train_data: Option<PathBuf>,
    /// Supplies burn-in and reconstruction settings; defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "model")]
    label: String,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reweighted group-lasso passes (overrides `train.reweight_passes`).
    #[arg(long, num_args = 0..=1, default_missing_value = "1")]
    reweight: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Generate(a) => commands::generate(&cli.out, &a.config, a.seed),
        Command::Train(a) => commands::train(
            &cli.out,
            &a.config,
            a.data.as_deref(),
            &commands::TrainOverrides {
                seeds: a.seeds,
                multistart: a.multistart,
                plant_only: a.plant_only,
                threads: a.threads,
            },
        ),
        Command::Eval(a) => commands::eval(
            &cli.out,
            &a.model,
            &a.data,
            a.train_data.as_deref(),
            a.config.as_deref(),
            &a.label,
        ),
        Command::Select(a) => commands::select(&cli.out, &a.config, a.data.as_deref(), a.seed, a.reweight),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
