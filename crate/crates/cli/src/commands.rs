use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use csvip_core::diagnostics::{divergence_monitor, DIVERGENCE_THRESHOLD, DIVERGENCE_WINDOW, FEJER_TOL};
use csvip_core::oracle::extragradient_solve;
use csvip_core::prelude::*;
use csvip_core::problemio::{parse_problem_with, parse_result};
use serde_json::json;

use crate::{Algorithm, CompareArgs, Format, Point, ScheduleKind, SolveArgs, TraceArgs, VerifyArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_DIVERGING: u8 = 3;

const MAX_ITERS_ENV: &str = "CSVIP_MAX_ITERS";
/// Endpoints count as the same point within this multiple of the residual
/// tolerance.
const AGREEMENT_FACTOR: f64 = 10.0;
/// The trace report lists at most this many Fejér violations.
const REPORTED_VIOLATIONS: usize = 20;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(msg) => write!(f, "{msg}"),
            Self::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Self::Core(err) => write!(f, "[{}] {err}", err.code()),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        Self::Core(err)
    }
}

type Outcome = std::result::Result<u8, CliError>;

struct Log {
    quiet: bool,
}

impl Log {
    fn line(&self, msg: impl fmt::Display) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stop_defaults() -> std::result::Result<StopRule, CliError> {
    let mut stop = StopRule::default();
    if let Ok(raw) = std::env::var(MAX_ITERS_ENV) {
        stop.max_iters = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n: &usize| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{MAX_ITERS_ENV}={raw} is not a positive integer")))?;
    }
    Ok(stop)
}

fn load(path: &Path, log: &Log) -> std::result::Result<ParsedProblem, CliError> {
    let parsed = parse_problem_with(&read(path)?, &stop_defaults()?)?;
    log.line(format_args!(
        "loaded {}: {} instance(s) in R^{}",
        path.display(),
        parsed.problem.len(),
        parsed.problem.dim()
    ));
    Ok(parsed)
}

fn start_point(parsed: &ParsedProblem, x0: Option<Point>) -> Vector {
    x0.map(|p| Vector::from_vec(p.0)).unwrap_or_else(|| parsed.start())
}

fn exit_for(status: Status) -> u8 {
    match status {
        Status::Converged => EXIT_OK,
        Status::MaxIters | Status::Stalled => EXIT_NOT_CONVERGED,
        Status::Diverging => EXIT_DIVERGING,
    }
}

fn schedule_of(args: &SolveArgs) -> std::result::Result<Option<Schedule>, CliError> {
    let usage = |msg: &str| Err(CliError::Usage(msg.to_string()));
    if args.algorithm != Algorithm::Unrestricted {
        if args.schedule.is_some() || args.seed.is_some() || args.indices.is_some() {
            return usage("--schedule, --seed and --indices need --algorithm unrestricted");
        }
        return Ok(None);
    }
    let kind = args.schedule.unwrap_or(ScheduleKind::Cyclic);
    if args.seed.is_some() && kind != ScheduleKind::Random {
        return usage("--seed needs --schedule random");
    }
    if args.indices.is_some() != (kind == ScheduleKind::Explicit) {
        return usage("--indices goes with --schedule explicit, and only with it");
    }
    Ok(Some(match kind {
        ScheduleKind::Cyclic => Schedule::Cyclic,
        ScheduleKind::Random => Schedule::Random {
            seed: args.seed.unwrap_or(0),
        },
        ScheduleKind::Explicit => Schedule::Explicit {
            indices: args.indices.clone().unwrap_or_default(),
        },
    }))
}

fn run(
    algorithm: Algorithm,
    schedule: Option<&Schedule>,
    problem: &CsvipProblem,
    step: &StepSize,
    x0: &Vector,
    stop: &StopRule,
) -> Result<RunResult> {
    match algorithm {
        Algorithm::Alternating => solve_alternating(problem, step, x0, stop),
        Algorithm::Sequential => solve_sequential(problem, step, x0, stop),
        Algorithm::Parallel => solve_parallel(problem, step, x0, stop),
        Algorithm::Unrestricted => {
            solve_unrestricted(problem, schedule.unwrap_or(&Schedule::Cyclic), step, x0, stop)
        }
    }
}

fn name(algorithm: Algorithm) -> &'static str {
    match algorithm {
        Algorithm::Alternating => "alternating",
        Algorithm::Sequential => "sequential",
        Algorithm::Parallel => "parallel",
        Algorithm::Unrestricted => "unrestricted",
    }
}

pub fn solve(args: SolveArgs) -> Outcome {
    let log = Log {
        quiet: args.common.quiet,
    };
    let schedule = schedule_of(&args)?;
    let parsed = load(&args.problem, &log)?;
    if args.algorithm == Algorithm::Alternating && parsed.problem.len() != 2 {
        return Err(Error::InstanceCount {
            expected: 2,
            found: parsed.problem.len(),
        }
        .into());
    }
    let step = parsed.step(args.common.lambda)?;
    let x0 = start_point(&parsed, args.x0.clone());
    log.line(format_args!("lambda = {:?}", step.lambda()));

    let result = run(args.algorithm, schedule.as_ref(), &parsed.problem, &step, &x0, &parsed.stop)?;
    log.line(format_args!(
        "{}: {} after {} iteration(s), max residual {:e}",
        name(args.algorithm),
        result.status.as_str(),
        result.iterations(),
        result.final_residual()
    ));

    let format = match args.format {
        Format::Json => OutputFormat::Json,
        Format::CsvTrace => OutputFormat::CsvTrace,
    };
    let text = emit_result(&result, format);
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{text}"),
    }
    Ok(exit_for(result.status))
}

pub fn verify(args: VerifyArgs) -> Outcome {
    let log = Log {
        quiet: args.common.quiet,
    };
    let parsed = load(&args.problem, &log)?;
    let step = parsed.step(args.common.lambda)?;
    let candidate = Vector::from_vec(args.candidate.0);
    let residuals = parsed.problem.residuals(&step, &candidate)?;
    let tol = parsed.stop.residual_tol;

    println!("instance\tresidual");
    for (i, r) in residuals.iter().enumerate() {
        println!("{i}\t{r:?}");
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    let ok = worst <= tol;
    log.line(format_args!(
        "max residual {worst:e} {} tolerance {tol:e}",
        if ok { "within" } else { "exceeds" }
    ));
    Ok(if ok { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

/// Oracle step: half the instance's constant, or the run's step when the
/// operator is constant or zero.
fn oracle_lambda(op: &IsmOperator, fallback: f64) -> f64 {
    if op.alpha().is_finite() {
        0.5 * op.alpha()
    } else {
        fallback
    }
}

pub fn trace(args: TraceArgs) -> Outcome {
    let log = Log { quiet: args.quiet };
    let result = parse_result(&read(&args.result)?)?.to_run()?;
    let (reference, source) = match (args.reference, &args.problem) {
        (Some(z), _) => (Vector::from_vec(z.0), "given"),
        (None, Some(path)) => {
            let parsed = load(path, &log)?;
            let first = &parsed.problem.instances()[0];
            let lambda = oracle_lambda(&first.op, result.step.lambda());
            let oracle = extragradient_solve(
                &first.set,
                &first.op,
                lambda,
                &result.solution,
                parsed.stop.residual_tol,
                parsed.stop.max_iters,
            )?;
            (oracle.point, "oracle")
        }
        (None, None) => {
            return Err(CliError::Usage(
                "trace needs --reference or --problem".into(),
            ))
        }
    };

    let fejer = fejer_check(&result.trace, &reference, FEJER_TOL)?;
    let divergence = divergence_monitor(&result.trace, DIVERGENCE_WINDOW, DIVERGENCE_THRESHOLD);
    let report = json!({
        "reference": reference.as_slice(),
        "reference_source": source,
        "fejer": {
            "monotone": fejer.is_monotone(),
            "tolerance": FEJER_TOL,
            "max_violation": fejer.max_violation,
            "violation_count": fejer.violations.len(),
            "violations": &fejer.violations[..fejer.violations.len().min(REPORTED_VIOLATIONS)],
        },
        "divergence": {
            "verdict": divergence.verdict,
            "window": DIVERGENCE_WINDOW,
            "threshold": DIVERGENCE_THRESHOLD,
            "final_norm": divergence.norm_series.last(),
        },
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    log.line(format_args!(
        "{} Fejér violation(s), divergence verdict {:?}",
        fejer.violations.len(),
        divergence.verdict
    ));

    Ok(if divergence.verdict == Verdict::Growing {
        EXIT_DIVERGING
    } else if !fejer.is_monotone() {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    })
}

struct Row {
    label: String,
    status: &'static str,
    iterations: Option<usize>,
    residual: Option<f64>,
    point: Option<Vector>,
}

pub fn compare(args: CompareArgs) -> Outcome {
    let log = Log {
        quiet: args.common.quiet,
    };
    let parsed = load(&args.problem, &log)?;
    let problem = &parsed.problem;
    let step = parsed.step(args.common.lambda)?;
    let x0 = start_point(&parsed, args.x0);
    let stop = parsed.stop;

    let mut algorithms = Vec::new();
    if problem.len() == 2 {
        algorithms.push(Algorithm::Alternating);
    }
    algorithms.extend([Algorithm::Sequential, Algorithm::Parallel, Algorithm::Unrestricted]);

    let mut rows = Vec::new();
    let mut diverging = false;
    let mut all_converged = true;
    for algorithm in algorithms {
        let result = run(algorithm, Some(&Schedule::Cyclic), problem, &step, &x0, &stop)?;
        log.line(format_args!("{}: {}", name(algorithm), result.status.as_str()));
        diverging |= result.status == Status::Diverging;
        all_converged &= result.status == Status::Converged;
        rows.push(Row {
            label: name(algorithm).to_string(),
            status: result.status.as_str(),
            iterations: Some(result.iterations()),
            residual: Some(result.final_residual()),
            point: (result.status != Status::Diverging).then(|| result.solution.clone()),
        });
    }
    for (i, instance) in problem.instances().iter().enumerate() {
        let lambda = oracle_lambda(&instance.op, step.lambda());
        let label = format!("oracle_{i}");
        match extragradient_solve(&instance.set, &instance.op, lambda, &x0, stop.residual_tol, stop.max_iters) {
            Ok(found) => rows.push(Row {
                label,
                status: "converged",
                iterations: Some(found.iterations),
                residual: Some(found.certified_residual),
                point: Some(found.point),
            }),
            Err(err) => {
                log.line(format_args!("{label}: failed: {err}"));
                all_converged = false;
                rows.push(Row {
                    label,
                    status: "failed",
                    iterations: None,
                    residual: None,
                    point: None,
                });
            }
        }
    }

    let dash = || "-".to_string();
    println!(
        "{:<14}{:<12}{:>12}{:>14}  solution",
        "method", "status", "iterations", "residual"
    );
    for row in &rows {
        println!(
            "{:<14}{:<12}{:>12}{:>14}  {}",
            row.label,
            row.status,
            row.iterations.map_or_else(dash, |k| k.to_string()),
            row.residual.map_or_else(dash, |r| format!("{r:.3e}")),
            row.point
                .as_ref()
                .map_or_else(dash, |p| format!("{:?}", p.as_slice())),
        );
    }

    println!();
    print!("{:<14}", "distance");
    for row in &rows {
        print!("{:>14}", row.label);
    }
    println!();
    let mut spread: f64 = 0.0;
    for a in &rows {
        print!("{:<14}", a.label);
        for b in &rows {
            let cell = match (&a.point, &b.point) {
                (Some(p), Some(q)) => {
                    let d = (p - q).norm();
                    spread = spread.max(d);
                    format!("{d:.3e}")
                }
                _ => dash(),
            };
            print!("{cell:>14}");
        }
        println!();
    }

    let bound = AGREEMENT_FACTOR * stop.residual_tol;
    log.line(format_args!("largest pairwise distance {spread:e} (bound {bound:e})"));
    Ok(if diverging {
        EXIT_DIVERGING
    } else if args.expect_unique && (!all_converged || spread > bound) {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    })
}
