use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use sigtest::asymptotics::QuantileMethod;
use sigtest::cli::{error_json, run, Command, RunConfig, StatisticSplit};
use sigtest::rng::{threads_from_env, with_threads};
use sigtest::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    Fit,
    Test,
    Simulate,
    Calibrate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Series,
    Discretization,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

/// Significance testing for the inputs of a single-hidden-layer network.
#[derive(Debug, Parser)]
#[command(name = "sigtest", version)]
struct Args {
    command: CommandArg,
    /// CSV file with a header row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Name of the response column.
    #[arg(long, default_value = "y")]
    target: String,
    #[arg(long, value_enum, default_value = "discretization")]
    method: MethodArg,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 25)]
    hidden_units: usize,
    #[arg(long, default_value_t = 3)]
    noise_features: usize,
    #[arg(long, default_value_t = 50)]
    replications: usize,
    /// Train / validation / test fractions.
    #[arg(long, value_delimiter = ',', default_values_t = [0.7, 0.2, 0.1])]
    split: Vec<f64>,
    #[arg(long, overrides_with = "no_standardize")]
    standardize: bool,
    #[arg(long)]
    no_standardize: bool,
    /// Rows the statistic is averaged over.
    #[arg(long, value_enum, default_value = "train")]
    statistic_split: SplitArg,
    /// Fourier truncation for the series method.
    #[arg(long)]
    truncation: Option<usize>,
    /// Random networks for the discretization method.
    #[arg(long)]
    functions: Option<usize>,
    /// Null draws per feature.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    /// Correlated design for `simulate`.
    #[arg(long)]
    correlated: bool,
    /// Paper-sized `simulate` (100k rows, 250 replications).
    #[arg(long)]
    full_scale: bool,
    /// JSON report path; a CSV table is written next to it.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-replication CSV for `simulate`.
    #[arg(long)]
    archive: Option<PathBuf>,
}

fn to_config(args: Args) -> Result<RunConfig, Error> {
    if args.split.len() != 3 {
        return Err(Error::InvalidConfig(format!("--split needs three fractions, got {}", args.split.len())));
    }
    let mut config = RunConfig {
        command: match args.command {
            CommandArg::Fit => Command::Fit,
            CommandArg::Test => Command::Test,
            CommandArg::Simulate => Command::Simulate,
            CommandArg::Calibrate => Command::Calibrate,
        },
        input_path: args.input,
        target_column: args.target,
        split_fractions: (args.split[0], args.split[1], args.split[2]),
        standardize: if args.no_standardize {
            Some(false)
        } else if args.standardize {
            Some(true)
        } else {
            None
        },
        method: match args.method {
            MethodArg::Series => QuantileMethod::Series,
            MethodArg::Discretization => QuantileMethod::Discretization,
        },
        level: args.level,
        seed: args.seed,
        noise_features: args.noise_features,
        statistic_split: match args.statistic_split {
            SplitArg::Train => StatisticSplit::Train,
            SplitArg::Test => StatisticSplit::Test,
        },
        replications: args.replications,
        full_scale: args.full_scale,
        correlated: args.correlated,
        output_path: args.output,
        archive_path: args.archive,
        ..RunConfig::default()
    };
    config.train.hidden_units = args.hidden_units;
    if let Some(e) = args.max_epochs {
        config.train.max_epochs = e;
    }
    if let Some(n) = args.truncation {
        config.test.series.truncation = n;
    }
    if let Some(c) = args.functions {
        config.test.discretization.functions = c;
    }
    if let Some(m) = args.samples {
        config.test.series.sample_count = m;
        config.test.discretization.sample_count = m;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let config = match to_config(Args::parse()) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    match with_threads(threads_from_env(), || run(&config)) {
        Ok(report) => {
            if config.output_path.is_none() {
                match report.to_json() {
                    Ok(json) => println!("{json}"),
                    Err(e) => return fail(&e),
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", error_json(e));
    ExitCode::from(e.kind().exit_code() as u8)
}
