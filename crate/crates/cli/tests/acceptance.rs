//! End-to-end acceptance checks. Run with
//! `cargo test -p csvip-cli --test acceptance`; prints one PASS/FAIL line
//! per criterion and exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use common::*;
use csvip_core::diagnostics::{divergence_monitor, DIVERGENCE_THRESHOLD, DIVERGENCE_WINDOW};
use csvip_core::prelude::*;
use csvip_core::problemio::parse_result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUBSPACE_PAIRS: usize = 50;
const SUBSPACE_DIM: usize = 10;
const SUBSPACE_AGREEMENT: f64 = 1e-6;

const MEMBERSHIP_INSTANCES: usize = 50;
const MEMBERSHIP_RESIDUAL: f64 = 1e-8;
const MEMBERSHIP_MAX_ITERS: usize = 100_000;

const FEJER_TOLERANCE: f64 = 1e-12;

const UNIQUE_INSTANCES: usize = 20;
const UNIQUE_GRID_INSTANCES: usize = 8;
const UNIQUE_AGREEMENT: f64 = 1e-6;
const UNIQUE_RESIDUAL: f64 = 1e-10;
const GRID_RESOLUTION: f64 = 0.01;
const GRID_HALF_WIDTH: f64 = 0.5;
/// Offsets the grid so the solution is not itself a node.
const GRID_SHIFT: f64 = 0.37 * GRID_RESOLUTION;
/// Grid minimizer within this many cell diagonals of the oracle point.
const GRID_CELLS: f64 = 2.0;

const OPERATOR_PAIRS: usize = 10_000;
const FIRM_MARGIN: f64 = -1e-10;
const ISM_MARGIN: f64 = -1e-9;
const NONEXPANSIVE_MARGIN: f64 = -1e-10;
const COMPLEMENT_RATIO_FLOOR: f64 = 0.5 - 1e-8;
const STEP_FRACTIONS: [f64; 3] = [0.1, 1.0, 1.9];

const BOUNDARY_GAP: f64 = 1e-6;

const DIVERGENCE_ITERATIONS: usize = 200;

const TWO_SET_FIXTURES: [&str; 5] = [
    "two_intervals.json",
    "cfp_boxes.json",
    "diverging_constant.json",
    "ball_halfspace.json",
    "transversal_lines.json",
];
const ALL_FIXTURES: [&str; 6] = [
    "two_intervals.json",
    "three_sets.json",
    "cfp_boxes.json",
    "diverging_constant.json",
    "ball_halfspace.json",
    "transversal_lines.json",
];
const ADVERSARIAL: [(&str, &str); 8] = [
    ("wrong_dims.json", "E_DIMENSION"),
    ("negative_radius.json", "E_RADIUS"),
    ("weight_sum.json", "E_WEIGHTS"),
    ("lambda_out_of_range.json", "E_STEP_RANGE"),
    ("skew_operator.json", "E_NOT_ISM"),
    ("unknown_version.json", "E_VERSION"),
    ("unknown_field.json", "E_SCHEMA"),
    ("declared_alpha_too_large.json", "E_ALPHA"),
];

type Check = std::result::Result<String, String>;

fn fail(msg: impl std::fmt::Display) -> String {
    msg.to_string()
}

/// Random affine subspace of `R^n` of dimension `dim` through `p`.
fn subspace_through(rng: &mut ChaCha8Rng, n: usize, dim: usize, p: &Vector) -> ConvexSet {
    let a = rand_mat(rng, n - dim, n);
    let b = &a * p;
    ConvexSet::affine_subspace(a, b).unwrap()
}

fn subspace_reproduction() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let zero = IsmOperator::zero(SUBSPACE_DIM).unwrap();
    let stop = StopRule {
        residual_tol: 1e-12,
        max_iters: 100_000,
        stall_tol: 0.0,
    };
    let mut worst: f64 = 0.0;
    let mut converged = 0;
    for pair in 0..SUBSPACE_PAIRS {
        let p = rand_vec(&mut rng, SUBSPACE_DIM, 2.0);
        let d1 = rng.random_range(1..SUBSPACE_DIM);
        let d2 = rng.random_range(1..SUBSPACE_DIM);
        let a = subspace_through(&mut rng, SUBSPACE_DIM, d1, &p);
        let b = subspace_through(&mut rng, SUBSPACE_DIM, d2, &p);
        let x0 = rand_vec(&mut rng, SUBSPACE_DIM, 5.0);
        let expected = subspace_intersection_projection(&a, &b, &x0).map_err(fail)?;

        let problem = CsvipProblem::new(vec![(a, zero.clone()), (b, zero.clone())], None).map_err(fail)?;
        let step = default_step(&problem, Some(1.0)).map_err(fail)?;
        let run = solve_alternating(&problem, &step, &x0, &stop).map_err(fail)?;
        converged += usize::from(run.status == Status::Converged);
        let gap = dist(&run.solution, &expected.point);
        worst = worst.max(gap);
        if gap > SUBSPACE_AGREEMENT {
            return Err(format!(
                "pair {pair} (dims {d1}, {d2}): {} after {} iterations, {gap:.2e} from the direct projection",
                run.status.as_str(),
                run.iterations()
            ));
        }
    }
    Ok(format!(
        "{SUBSPACE_PAIRS} pairs in R^{SUBSPACE_DIM}, max deviation {worst:.2e} <= {SUBSPACE_AGREEMENT:.0e}, {converged} converged to 1e-12"
    ))
}

struct MembershipCase {
    problem: CsvipProblem,
    z: Vector,
    runs: Vec<(&'static str, RunResult)>,
}

fn membership_cases() -> std::result::Result<Vec<MembershipCase>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let stop = StopRule {
        residual_tol: MEMBERSHIP_RESIDUAL,
        max_iters: MEMBERSHIP_MAX_ITERS,
        ..StopRule::default()
    };
    let mut cases = Vec::new();
    for _ in 0..MEMBERSHIP_INSTANCES {
        let n = rng.random_range(2..=5);
        let z = rand_vec(&mut rng, n, 2.0);
        let mut pairs = Vec::new();
        for _ in 0..2 {
            let rank = rng.random_range(1..=n);
            let m = ism_matrix(&mut rng, n, rank);
            pairs.push((set_containing(&mut rng, &z), zero_at(m, &z)));
        }
        let problem = CsvipProblem::new(pairs, None).map_err(fail)?;
        let step = default_step(&problem, None).map_err(fail)?;
        let x0 = rand_vec(&mut rng, n, 5.0);
        let runs = vec![
            ("alternating", solve_alternating(&problem, &step, &x0, &stop).map_err(fail)?),
            ("parallel", solve_parallel(&problem, &step, &x0, &stop).map_err(fail)?),
            ("sequential", solve_sequential(&problem, &step, &x0, &stop).map_err(fail)?),
        ];
        cases.push(MembershipCase { problem, z, runs });
    }
    Ok(cases)
}

fn target_membership(cases: &[MembershipCase]) -> Check {
    let mut worst: f64 = 0.0;
    let mut longest = 0;
    let mut misses = Vec::new();
    let mut total = 0;
    for (i, case) in cases.iter().enumerate() {
        for (name, run) in &case.runs {
            total += 1;
            if run.status != Status::Converged || run.final_residual() > MEMBERSHIP_RESIDUAL {
                misses.push(format!(
                    "instance {i} {name}: {} after {} iterations, residual {:.2e}",
                    run.status.as_str(),
                    run.iterations(),
                    run.final_residual()
                ));
                continue;
            }
            worst = worst.max(run.final_residual());
            longest = longest.max(run.iterations());
        }
    }
    let summary = format!(
        "{}/{total} runs converged, max residual {worst:.2e}, max {longest} iterations",
        total - misses.len()
    );
    if misses.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", misses.join("; ")))
    }
}

fn fejer_suite(cases: &[MembershipCase]) -> Check {
    let mut steps = 0;
    let mut worst = f64::NEG_INFINITY;
    for (i, case) in cases.iter().enumerate() {
        for (name, run) in &case.runs {
            let report = fejer_check(&run.trace, &case.z, FEJER_TOLERANCE).map_err(fail)?;
            steps += run.trace.len() - 1;
            worst = worst.max(report.max_violation);
            if !report.is_monotone() {
                return Err(format!(
                    "instance {i}, {name}: {} violations, largest {:.2e}",
                    report.violations.len(),
                    report.max_violation
                ));
            }
        }
    }
    Ok(format!(
        "0 violations over {steps} steps, largest distance increase {worst:.2e}"
    ))
}

/// `c (I + 0.1 J)` with `J` a unit skew rotation in the first two coordinates.
fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let c = rng.random_range(0.5..2.0);
    let mut m = Matrix::identity(n, n) * c;
    if n >= 2 {
        m[(0, 1)] += 0.1 * c;
        m[(1, 0)] -= 0.1 * c;
    }
    m
}

fn unique_agreement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let stop = StopRule {
        residual_tol: UNIQUE_RESIDUAL,
        max_iters: 100_000,
        ..StopRule::default()
    };
    let mut worst: f64 = 0.0;
    let mut worst_grid: f64 = 0.0;
    for i in 0..UNIQUE_INSTANCES {
        let on_grid = i < UNIQUE_GRID_INSTANCES;
        let n = if on_grid {
            1 + i % 2
        } else {
            rng.random_range(3..=5)
        };
        let z = rand_vec(&mut rng, n, 2.0);
        let mut pairs = Vec::new();
        for _ in 0..2 {
            let m = if on_grid {
                well_conditioned(&mut rng, n)
            } else {
                let c = rng.random_range(0.2..1.0);
                strongly_monotone(&mut rng, n, c)
            };
            pairs.push((set_containing(&mut rng, &z), zero_at(m, &z)));
        }
        let problem = CsvipProblem::new(pairs, None).map_err(fail)?;
        let step = default_step(&problem, None).map_err(fail)?;
        let x0 = rand_vec(&mut rng, n, 5.0);

        let mut points = vec![
            ("alternating", solve_alternating(&problem, &step, &x0, &stop).map_err(fail)?),
            ("sequential", solve_sequential(&problem, &step, &x0, &stop).map_err(fail)?),
            ("parallel", solve_parallel(&problem, &step, &x0, &stop).map_err(fail)?),
            (
                "unrestricted",
                solve_unrestricted(&problem, &Schedule::Cyclic, &step, &x0, &stop).map_err(fail)?,
            ),
        ]
        .into_iter()
        .map(|(name, run)| (name, run.solution))
        .collect::<Vec<_>>();

        let first = &problem.instances()[0];
        let oracle = extragradient_solve(
            &first.set,
            &first.op,
            0.5 * first.op.alpha(),
            &x0,
            UNIQUE_RESIDUAL,
            100_000,
        )
        .map_err(|e| format!("instance {i}: oracle {e}"))?;
        points.push(("extragradient", oracle.point.clone()));

        for (a, pa) in &points {
            for (b, pb) in &points {
                let gap = dist(pa, pb);
                worst = worst.max(gap);
                if gap > UNIQUE_AGREEMENT {
                    return Err(format!("instance {i} (n={n}): {a} vs {b} differ by {gap:.2e}"));
                }
            }
        }

        if on_grid {
            let lower = z.map(|v| v - GRID_HALF_WIDTH + GRID_SHIFT);
            let upper = z.map(|v| v + GRID_HALF_WIDTH);
            let grid = grid_search_vip(&first.set, &first.op, &lower, &upper, GRID_RESOLUTION)
                .map_err(|e| format!("instance {i}: grid {e}"))?;
            let gap = dist(&grid.point, &oracle.point);
            let bound = GRID_CELLS * GRID_RESOLUTION * (n as f64).sqrt();
            worst_grid = worst_grid.max(gap / bound);
            if gap > bound {
                return Err(format!("instance {i}: grid point {gap:.2e} from oracle, bound {bound:.2e}"));
            }
        }
    }
    Ok(format!(
        "{UNIQUE_INSTANCES} instances, 5 endpoints pairwise within {worst:.2e}; grid on {UNIQUE_GRID_INSTANCES} at {:.0}% of its bound",
        100.0 * worst_grid
    ))
}

fn operator_fixtures() -> Vec<(&'static str, ConvexSet, IsmOperator)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut fixtures = Vec::new();
    let anchor = rand_vec(&mut rng, 4, 1.0);

    let lo = anchor.map(|v| v - 1.0);
    let hi = anchor.map(|v| v + 1.5);
    let m = strongly_monotone(&mut rng, 4, 0.3);
    fixtures.push(("box/strongly-monotone", ConvexSet::boxed(lo, hi).unwrap(), IsmOperator::affine(m, rand_vec(&mut rng, 4, 1.0)).unwrap()));

    let m = ism_matrix(&mut rng, 4, 2);
    fixtures.push(("ball/singular", ConvexSet::ball(anchor.clone(), 1.5).unwrap(), IsmOperator::affine(m, rand_vec(&mut rng, 4, 1.0)).unwrap()));

    let a = rand_mat(&mut rng, 3, 3);
    let psd = &a * a.transpose();
    fixtures.push((
        "halfspace/psd",
        ConvexSet::halfspace(rand_vec(&mut rng, 3, 1.0), 0.5).unwrap(),
        IsmOperator::affine(psd, rand_vec(&mut rng, 3, 1.0)).unwrap(),
    ));

    let rows = rand_mat(&mut rng, 2, 4);
    let rhs = &rows * &anchor;
    let m = ism_matrix(&mut rng, 4, 3);
    fixtures.push((
        "affine/ism",
        ConvexSet::affine_subspace(rows, rhs).unwrap(),
        IsmOperator::affine(m, rand_vec(&mut rng, 4, 1.0)).unwrap(),
    ));

    let m = strongly_monotone(&mut rng, 3, 1.0);
    fixtures.push(("simplex/strongly-monotone", ConvexSet::simplex(3).unwrap(), IsmOperator::affine(m, rand_vec(&mut rng, 3, 1.0)).unwrap()));

    let m = ism_matrix(&mut rng, 3, 1);
    fixtures.push((
        "hyperplane/rank-one",
        ConvexSet::hyperplane(rand_vec(&mut rng, 3, 1.0), -0.3).unwrap(),
        IsmOperator::affine(m, rand_vec(&mut rng, 3, 1.0)).unwrap(),
    ));
    fixtures
}

fn operator_theory() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut firm = f64::INFINITY;
    let mut ism = f64::INFINITY;
    let mut nonexpansive = f64::INFINITY;
    let mut ratio = f64::INFINITY;
    let fixtures = operator_fixtures();
    for (name, set, op) in &fixtures {
        let n = set.dim();
        let pairs: Vec<(Vector, Vector)> = (0..OPERATOR_PAIRS)
            .map(|_| (rand_vec(&mut rng, n, 5.0), rand_vec(&mut rng, n, 5.0)))
            .collect();
        for (x, y) in &pairs {
            let dp = set.project(x).map_err(fail)? - set.project(y).map_err(fail)?;
            let margin = dp.dot(&(x - y)) - dp.norm_squared();
            firm = firm.min(margin);
            if margin < FIRM_MARGIN {
                return Err(format!("{name}: projection firm-nonexpansiveness margin {margin:.2e}"));
            }
            let dh = op.apply(x).map_err(fail)? - op.apply(y).map_err(fail)?;
            let margin = dh.dot(&(x - y)) - op.alpha() * dh.norm_squared();
            ism = ism.min(margin);
            if margin < ISM_MARGIN {
                return Err(format!("{name}: ism margin {margin:.2e} at alpha {}", op.alpha()));
            }
        }
        for fraction in STEP_FRACTIONS {
            let step = validate_step(Some(fraction * op.alpha()), &[op.alpha()]).map_err(fail)?;
            let t = StepOperator::new(set.clone(), op.clone(), step).map_err(fail)?;
            let report = check_operator_class(&t, &pairs).map_err(fail)?;
            nonexpansive = nonexpansive.min(report.min_margin());
            if report.min_margin() < NONEXPANSIVE_MARGIN {
                return Err(format!(
                    "{name}, lambda = {fraction} alpha: nonexpansive margin {:.2e}",
                    report.min_margin()
                ));
            }
            if let Some(r) = report.min_ratio() {
                ratio = ratio.min(r);
                if r <= COMPLEMENT_RATIO_FLOOR {
                    return Err(format!("{name}, lambda = {fraction} alpha: complement ratio {r}"));
                }
            }
        }
    }
    Ok(format!(
        "{} fixtures x {OPERATOR_PAIRS} pairs: firm {firm:.1e}, ism {ism:.1e}, step {nonexpansive:.1e}, complement ratio min {ratio:.4}",
        fixtures.len()
    ))
}

fn step_window() -> Check {
    let parsed = parse_problem(&read_fixture("two_intervals.json")).map_err(fail)?;
    let alpha = parsed.problem.alphas().into_iter().fold(f64::INFINITY, f64::min);
    match validate_step(Some(2.0 * alpha), &parsed.problem.alphas()) {
        Err(e) if e.code() == "E_STEP_RANGE" => {}
        other => return Err(format!("lambda = 2 alpha gave {other:?}")),
    }
    let lambda = 2.0 * alpha - BOUNDARY_GAP;
    let step = parsed.step(Some(lambda)).map_err(fail)?;
    let x0 = parsed.start();
    let stop = StopRule {
        residual_tol: MEMBERSHIP_RESIDUAL,
        max_iters: MEMBERSHIP_MAX_ITERS,
        ..parsed.stop
    };
    let mut iterations = Vec::new();
    for (name, run) in [
        ("alternating", solve_alternating(&parsed.problem, &step, &x0, &stop)),
        ("parallel", solve_parallel(&parsed.problem, &step, &x0, &stop)),
        ("sequential", solve_sequential(&parsed.problem, &step, &x0, &stop)),
    ] {
        let run = run.map_err(fail)?;
        if run.status != Status::Converged || (run.solution[0] - 2.0).abs() > MEMBERSHIP_RESIDUAL {
            return Err(format!("{name} at lambda {lambda}: {} at {}", run.status.as_str(), run.solution[0]));
        }
        iterations.push(format!("{name} {}", run.iterations()));
    }
    Ok(format!(
        "2 alpha rejected; lambda = 2 alpha - {BOUNDARY_GAP:.0e} converges to 2 ({})",
        iterations.join(", ")
    ))
}

fn binary() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_csvip"));
    cmd.env_remove("CSVIP_MAX_ITERS");
    cmd
}

fn divergence_symptom() -> Check {
    let path = fixture("diverging_constant.json");
    let parsed = parse_problem(&read_fixture("diverging_constant.json")).map_err(fail)?;
    let step = parsed.step(None).map_err(fail)?;
    let run = solve_alternating(&parsed.problem, &step, &parsed.start(), &parsed.stop).map_err(fail)?;
    if run.status != Status::Diverging || run.iterations() > DIVERGENCE_ITERATIONS {
        return Err(format!("{} after {} iterations", run.status.as_str(), run.iterations()));
    }
    let verdict = divergence_monitor(&run.trace, DIVERGENCE_WINDOW, DIVERGENCE_THRESHOLD).verdict;
    if verdict != Verdict::Growing {
        return Err(format!("monitor verdict {verdict:?}"));
    }
    let out = binary()
        .args(["solve", "--algorithm", "alternating", "--quiet"])
        .arg(&path)
        .output()
        .map_err(fail)?;
    match out.status.code() {
        Some(3) => Ok(format!(
            "growing after {} iterations (|x| = {}), CLI exit 3",
            run.iterations(),
            run.solution.norm()
        )),
        code => Err(format!("CLI exit {code:?}")),
    }
}

fn structural_identity(cases: &[MembershipCase]) -> Check {
    let mut compared = 0;
    for name in TWO_SET_FIXTURES {
        let parsed = parse_problem(&read_fixture(name)).map_err(fail)?;
        let step = parsed.step(None).map_err(fail)?;
        let x0 = parsed.start();
        let seq = solve_sequential(&parsed.problem, &step, &x0, &parsed.stop).map_err(fail)?;
        let alt = solve_alternating(&parsed.problem, &step, &x0, &parsed.stop).map_err(fail)?;
        if seq != alt {
            return Err(format!("{name}: traces differ"));
        }
        compared += 1;
    }
    for (i, case) in cases.iter().enumerate() {
        let alt = &case.runs[0].1;
        let seq = &case.runs[2].1;
        if alt != seq {
            return Err(format!("random instance {i}: traces differ"));
        }
        let step = default_step(&case.problem, None).map_err(fail)?;
        if alt.step != step {
            return Err(format!("random instance {i}: unexpected step"));
        }
        compared += 1;
    }
    Ok(format!("{compared} two-set problems, traces bitwise equal"))
}

fn determinism_and_io() -> Check {
    let mut runs = 0;
    for name in ALL_FIXTURES {
        let parsed = parse_problem(&read_fixture(name)).map_err(fail)?;
        let step = parsed.step(None).map_err(fail)?;
        let x0 = parsed.start();
        let schedule = Schedule::Random { seed: 42 };
        let emit = || -> std::result::Result<String, String> {
            let run = solve_unrestricted(&parsed.problem, &schedule, &step, &x0, &parsed.stop).map_err(fail)?;
            Ok(emit_result(&run, OutputFormat::Json))
        };
        if emit()? != emit()? {
            return Err(format!("{name}: seeded random runs differ"));
        }

        let mut results = vec![
            solve_sequential(&parsed.problem, &step, &x0, &parsed.stop),
            solve_parallel(&parsed.problem, &step, &x0, &parsed.stop),
            solve_unrestricted(&parsed.problem, &schedule, &step, &x0, &parsed.stop),
        ];
        if parsed.problem.len() == 2 {
            results.push(solve_alternating(&parsed.problem, &step, &x0, &parsed.stop));
        }
        for run in results {
            let run = run.map_err(fail)?;
            let text = emit_result(&run, OutputFormat::Json);
            let back = parse_result(&text).and_then(|d| d.to_run()).map_err(fail)?;
            if back != run {
                return Err(format!("{name}: round trip changed the result"));
            }
            runs += 1;
        }
    }

    let path = fixture("three_sets.json");
    let cli = || {
        binary()
            .args(["solve", "--algorithm", "unrestricted", "--schedule", "random", "--seed", "42", "--quiet"])
            .arg(&path)
            .output()
            .map(|o| o.stdout)
            .map_err(fail)
    };
    if cli()? != cli()? {
        return Err("CLI random-schedule output differs between runs".into());
    }

    let mut codes = BTreeSet::new();
    for (name, expected) in ADVERSARIAL {
        match parse_problem(&read_fixture(&format!("adversarial/{name}"))) {
            Ok(_) => return Err(format!("{name} accepted")),
            Err(e) if e.code() != expected => return Err(format!("{name}: {} instead of {expected}", e.code())),
            Err(e) => {
                codes.insert(e.code());
            }
        }
    }
    if codes.len() != ADVERSARIAL.len() {
        return Err("adversarial error codes are not distinct".into());
    }
    Ok(format!(
        "seeded runs byte-identical (library and CLI), {runs} results round-trip, {} malformed documents rejected with distinct codes",
        codes.len()
    ))
}

fn main() {
    let cases = membership_cases();
    let with_cases = |f: fn(&[MembershipCase]) -> Check| -> Check {
        match &cases {
            Ok(cases) => f(cases),
            Err(e) => Err(format!("could not build instances: {e}")),
        }
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("subspace reproduction", Box::new(subspace_reproduction)),
        ("target membership", Box::new(move || with_cases(target_membership))),
        ("Fejér monotonicity", Box::new(move || with_cases(fejer_suite))),
        ("unique-solution agreement", Box::new(unique_agreement)),
        ("operator theory", Box::new(operator_theory)),
        ("step window boundary", Box::new(step_window)),
        ("divergence symptom", Box::new(divergence_symptom)),
        ("two-set structural identity", Box::new(move || with_cases(structural_identity))),
        ("determinism and I/O", Box::new(determinism_and_io)),
    ];

    let mut failures = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} [{title}]: PASS ({detail}) [{secs:.2}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} [{title}]: FAIL ({detail}) [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
