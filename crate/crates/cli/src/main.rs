use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use l1sketch_cli::commands::{self, parse_seed, SketchArgs};
use l1sketch_cli::selftest;
use l1sketch_cli::{CliError, CliResult};

/// Linear sketches for approximating the L1 distance between two integer vectors.
#[derive(Parser)]
#[command(name = "l1sketch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sketch a vector file; writes one sketch per repetition.
    Sketch {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: u64,
        /// Bound on |x_i|.
        #[arg(long)]
        max_mag: u64,
        #[arg(long)]
        eps: f64,
        /// Shared seed, up to 64 hex digits.
        #[arg(long)]
        seed: String,
        /// Independent repetitions; files get a `.r` suffix when above 1.
        #[arg(long, default_value_t = 1)]
        reps: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Estimate ||x - y||_1 from sketch files given as (x, y) pairs, one
    /// pair per repetition; prints the median.
    Estimate {
        #[arg(required = true, num_args = 2..)]
        sketches: Vec<PathBuf>,
    },
    /// Exact L1 distance of two vector files.
    Exact {
        x: PathBuf,
        y: PathBuf,
        /// Dimension; inferred from the files when absent.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Run the oracle-equivalence self-tests.
    Selftest {
        #[arg(long, default_value_t = 20)]
        trials: u64,
        #[arg(long, default_value = "1")]
        seed: String,
    },
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Sketch { input, n, max_mag, eps, seed, reps, output } => {
            let args = SketchArgs {
                input: &input,
                n,
                max_mag,
                eps,
                seed: parse_seed(&seed)?,
                reps,
                output: &output,
            };
            for path in commands::sketch(&args)? {
                println!("{}", path.display());
            }
        }
        Command::Estimate { sketches } => println!("{}", commands::estimate(&sketches)?),
        Command::Exact { x, y, n } => println!("{}", commands::exact(&x, &y, n)?),
        Command::Selftest { trials, seed } => {
            let seed = parse_seed(&seed)?;
            if trials == 0 {
                eprintln!("warning: --trials 0 runs nothing; the self-test passes vacuously");
            }
            let reports = selftest::run_all(trials, &seed, selftest::sigma);
            for r in &reports {
                println!("{r}");
            }
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
            if !failed.is_empty() {
                return Err(CliError::SelftestFailed(failed.join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
