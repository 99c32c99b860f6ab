use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Projection solvers for common solutions of variational inequalities.
#[derive(Debug, Parser)]
#[command(name = "csvip", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one solver on a problem file and emit the result.
    Solve(SolveArgs),
    /// Report the residual of a candidate point against every instance.
    Verify(VerifyArgs),
    /// Fejér and divergence diagnostics for a saved result.
    Trace(TraceArgs),
    /// Run every applicable solver plus the oracle and compare endpoints.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Alternating,
    Sequential,
    Parallel,
    Unrestricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleKind {
    Cyclic,
    Random,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    CsvTrace,
}

#[derive(Debug, Args)]
struct Common {
    /// Step size; overrides the document's `lambda`.
    #[arg(long)]
    lambda: Option<f64>,
    /// Suppress progress lines on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct SolveArgs {
    problem: PathBuf,
    #[arg(long, value_enum, default_value = "sequential")]
    algorithm: Algorithm,
    #[arg(long, value_enum)]
    schedule: Option<ScheduleKind>,
    /// Seed for `--schedule random`.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated instance indices for `--schedule explicit`.
    #[arg(long, value_delimiter = ',')]
    indices: Option<Vec<usize>>,
    /// Starting point, comma-separated; overrides the document's `x0`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    x0: Option<Point>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    problem: PathBuf,
    /// Candidate point, comma-separated.
    #[arg(allow_hyphen_values = true, value_parser = parse_point)]
    candidate: Point,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct TraceArgs {
    /// Result document written by `solve --format json`.
    result: PathBuf,
    /// Known solution to test Fejér monotonicity against.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point, conflicts_with = "problem")]
    reference: Option<Point>,
    /// Problem file; the reference point is then computed by the oracle.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    problem: PathBuf,
    /// Fail unless all endpoints agree within 10x the residual tolerance.
    #[arg(long)]
    expect_unique: bool,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    x0: Option<Point>,
    #[command(flatten)]
    common: Common,
}

/// Comma-separated coordinates, e.g. `1.5,-2,0`.
#[derive(Debug, Clone, PartialEq)]
struct Point(Vec<f64>);

fn parse_point(text: &str) -> Result<Point, String> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{part}` is not a finite number"))
        })
        .collect::<Result<_, _>>()
        .map(Point)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => commands::solve(args),
        Command::Verify(args) => commands::verify(args),
        Command::Trace(args) => commands::trace(args),
        Command::Compare(args) => commands::compare(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
