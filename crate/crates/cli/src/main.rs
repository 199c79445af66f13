use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mediankit_cli::{schema, CliError, Report, Settings};

#[derive(Parser)]
#[command(name = "mediankit", version, about = "Median algebras, group actions and convex cores")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every request in an instance file.
    Run {
        file: PathBuf,
        /// Window radius for all requests.
        #[arg(long)]
        window: Option<usize>,
        /// Word-length and search bound (default 2 * rank).
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_timings: bool,
    },
    /// Parse and resolve an instance file without running it.
    Validate { file: PathBuf },
    /// Run one of the brute-force oracles.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        no_timings: bool,
    },
}

fn emit(r: Result<Report, CliError>, out: Option<PathBuf>) -> ExitCode {
    match r {
        Ok(report) => {
            let text = report.to_pretty();
            match out {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, text) {
                        eprintln!("cannot write {}: {e}", p.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run { file, window, bound, out, no_timings } => {
            emit(mediankit_cli::run_file(&file, Settings { window, bound }, !no_timings), out)
        }
        Cmd::Validate { file } => {
            let r = mediankit_cli::read(&file)
                .and_then(|t| schema::load(&t))
                .and_then(|l| mediankit_cli::runner::check_requests(&l.requests).map(|_| l));
            match r {
                Ok(l) => {
                    println!(
                        "{}: ok ({} factors, {} actions, {} requests)",
                        file.display(),
                        l.instance.len(),
                        l.actions.len(),
                        l.requests.len()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(1)
                }
            }
        }
        Cmd::Oracle { file, name, window, bound, no_timings } => {
            emit(mediankit_cli::run_oracle(&file, &name, Settings { window, bound }, !no_timings), None)
        }
    }
}
