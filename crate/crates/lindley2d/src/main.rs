use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lindley2d::artifacts::{write_artifacts, write_error_artifacts, ErrorRecord, Status};
use lindley2d::{run_command, Command, ExperimentConfig, ParallelRunner, RunError};

#[derive(Parser)]
#[command(
    name = "lindley2d",
    version,
    about = "Reproducible experiments on 2-D Lindley processes and quadrant exit times"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Check assumptions, compute moments and classify the regime.
    Classify(RunArgs),
    /// Estimate the exit-time survival curve and fit its exponent.
    Tail(RunArgs),
    /// Evaluate h1 or the 2-D harmonic function.
    Harmonic(RunArgs),
    /// Tabulate the Lyapunov function and check superharmonicity.
    Lyapunov(RunArgs),
    /// Compare the Lindley recursion with its unrolled dual form.
    Duality(RunArgs),
    /// Compare occupation series from Lindley paths and exit times.
    Occupation(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

impl Sub {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Sub::Classify(a) => (Command::Classify, a),
            Sub::Tail(a) => (Command::Tail, a),
            Sub::Harmonic(a) => (Command::Harmonic, a),
            Sub::Lyapunov(a) => (Command::Lyapunov, a),
            Sub::Duality(a) => (Command::Duality, a),
            Sub::Occupation(a) => (Command::Occupation, a),
        }
    }
}

fn fail(command: Command, error: &RunError) -> ExitCode {
    let record = serde_json::json!({
        "status": Status::Error,
        "command": command,
        "error": ErrorRecord::from(error),
    });
    eprintln!("{record}");
    ExitCode::from(Status::Error.exit_code() as u8)
}

fn output_dir(command: Command, config: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| Path::new("runs").join(config.name.clone().unwrap_or_else(|| command.name().to_string())))
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    let mut config = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(command, &e.into()),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let config = config.resolve(command);
    let dir = output_dir(command, &config, args.out);
    let runner = match args.workers {
        Some(n) => ParallelRunner::new(n),
        None => ParallelRunner::with_available_parallelism(),
    };
    let outcome = runner
        .map_err(RunError::from)
        .and_then(|r| run_command(command, &config, &r));
    match outcome {
        Ok(outcome) => match write_artifacts(&dir, &config, &outcome) {
            Ok(status) => {
                if status == Status::Fail {
                    let record = serde_json::json!({
                        "status": status,
                        "command": command,
                        "violations": outcome.violations,
                    });
                    eprintln!("{record}");
                } else {
                    println!("{}: pass ({})", command.name(), dir.display());
                }
                ExitCode::from(status.exit_code() as u8)
            }
            Err(e) => fail(command, &e),
        },
        Err(e) => {
            // Best effort: the error is reported on stderr regardless.
            let _ = write_error_artifacts(&dir, command, &config, &e);
            fail(command, &e)
        }
    }
}
