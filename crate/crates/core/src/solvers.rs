//! Iteration schemes over CSVIP instances.
//!
//! All four solvers share one driver: record `x^k`, evaluate the residual of
//! `x^k` against every instance, stop on convergence, stall, or a divergence
//! symptom, otherwise take one step. Products apply the step operators in
//! index order `N-1, ..., 1, 0`, so with two instances instance 1 plays the
//! role of `Q` (applied first) and instance 0 plays `C`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{assess_norms, Verdict, DIVERGENCE_THRESHOLD, DIVERGENCE_WINDOW};
use crate::geometry::ConvexSet;
use crate::operators::{validate_step, IsmOperator, StepOperator, StepSize};
use crate::{check_dim, check_vector, Error, Result, Vector};

/// Weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One variational inequality `(C_i, f_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub set: ConvexSet,
    pub op: IsmOperator,
}

/// `N >= 1` variational inequalities over a shared `R^n`, with optional
/// convex-combination weights for the parallel scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvipProblem {
    instances: Vec<Instance>,
    dim: usize,
    weights: Option<Vec<f64>>,
}

impl CsvipProblem {
    pub fn new(pairs: Vec<(ConvexSet, IsmOperator)>, weights: Option<Vec<f64>>) -> Result<Self> {
        let dim = pairs.first().ok_or(Error::NoInstances)?.0.dim();
        for (set, op) in &pairs {
            for found in [set.dim(), op.dim()] {
                if found != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found,
                    });
                }
            }
        }
        if let Some(w) = &weights {
            check_weights(w, pairs.len())?;
        }
        Ok(Self {
            instances: pairs
                .into_iter()
                .map(|(set, op)| Instance { set, op })
                .collect(),
            dim,
            weights,
        })
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn explicit_weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Supplied weights, or uniform `1/N`.
    pub fn weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.clone(),
            None => vec![1.0 / self.len() as f64; self.len()],
        }
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.instances.iter().map(|i| i.op.alpha()).collect()
    }

    pub fn step_operators(&self, step: &StepSize) -> Result<Vec<StepOperator>> {
        self.instances
            .iter()
            .map(|i| StepOperator::new(i.set.clone(), i.op.clone(), *step))
            .collect()
    }

    /// Per-instance residuals `||x - T_i x||`.
    pub fn residuals(&self, step: &StepSize, x: &Vector) -> Result<Vec<f64>> {
        residuals_of(&self.step_operators(step)?, x)
    }
}

fn check_weights(w: &[f64], count: usize) -> Result<()> {
    if w.len() != count {
        return Err(Error::InvalidWeights(format!(
            "expected {count} weights, found {}",
            w.len()
        )));
    }
    if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidWeights(format!("weight {bad} is negative or non-finite")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// Shared step size for a problem: `lambda` if given (validated), otherwise
/// `min_i alpha_i` over the finite constants.
pub fn default_step(problem: &CsvipProblem, lambda: Option<f64>) -> Result<StepSize> {
    validate_step(lambda, &problem.alphas())
}

/// Operator selection for [`solve_unrestricted`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    /// `0, 1, ..., N-1, 0, 1, ...`
    Cyclic,
    /// Uniform indices from a ChaCha8 stream seeded with `seed`.
    Random { seed: u64 },
    /// The listed indices, repeated from the start once exhausted.
    Explicit { indices: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub residual_tol: f64,
    pub max_iters: usize,
    /// A step shorter than this with the residual still above tolerance
    /// ends the run as [`Status::Stalled`].
    pub stall_tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            max_iters: 100_000,
            stall_tol: 1e-14,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) || !self.residual_tol.is_finite() {
            return Err(Error::Schema(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Schema("max_iters must be at least 1".into()));
        }
        if !(self.stall_tol >= 0.0) {
            return Err(Error::Schema(format!(
                "stall_tol must be nonnegative, got {}",
                self.stall_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    Diverging,
    Stalled,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::Diverging => "diverging",
            Status::Stalled => "stalled",
        }
    }
}

/// Iterates `x^0, x^1, ...` with per-instance residual rows.
///
/// `intermediate[k]`, when present, is the point reached from `x^k` just
/// before the last operator of a product is applied (the `y^k` of the
/// two-set scheme); it has one entry fewer than `iterates`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    iterates: Vec<Vector>,
    intermediate: Option<Vec<Vector>>,
    instance_residuals: Vec<Vec<f64>>,
}

impl IterationTrace {
    pub fn new(
        iterates: Vec<Vector>,
        intermediate: Option<Vec<Vector>>,
        instance_residuals: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let first = iterates.first().ok_or(Error::EmptyTrace)?;
        let dim = first.len();
        for x in &iterates {
            check_dim(dim, x)?;
        }
        if instance_residuals.len() != iterates.len() {
            return Err(Error::MalformedTrace(format!(
                "{} residual rows for {} iterates",
                instance_residuals.len(),
                iterates.len()
            )));
        }
        let width = instance_residuals[0].len();
        if instance_residuals
            .iter()
            .any(|row| row.len() != width || row.iter().any(|r| !(*r >= 0.0)))
        {
            return Err(Error::MalformedTrace(
                "residual rows must be equally long and nonnegative".into(),
            ));
        }
        if let Some(mid) = &intermediate {
            if mid.len() + 1 != iterates.len() {
                return Err(Error::MalformedTrace(format!(
                    "{} intermediate points for {} iterates",
                    mid.len(),
                    iterates.len()
                )));
            }
            for y in mid {
                check_dim(dim, y)?;
            }
        }
        Ok(Self {
            iterates,
            intermediate,
            instance_residuals,
        })
    }

    /// Trace of bare iterates with no residual data (one empty row each).
    pub fn from_iterates(iterates: Vec<Vector>) -> Result<Self> {
        let rows = vec![Vec::new(); iterates.len()];
        Self::new(iterates, None, rows)
    }

    pub fn iterates(&self) -> &[Vector] {
        &self.iterates
    }

    pub fn intermediate(&self) -> Option<&[Vector]> {
        self.intermediate.as_deref()
    }

    pub fn instance_residuals(&self) -> &[Vec<f64>] {
        &self.instance_residuals
    }

    /// Max over instances of the residual, per iterate.
    pub fn residuals(&self) -> Vec<f64> {
        self.instance_residuals
            .iter()
            .map(|row| row.iter().copied().fold(0.0, f64::max))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.iterates[0].len()
    }

    pub fn last(&self) -> &Vector {
        self.iterates.last().expect("trace is never empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub status: Status,
    pub solution: Vector,
    pub trace: IterationTrace,
    pub step: StepSize,
}

impl RunResult {
    /// Number of steps taken (`x^0` alone counts as zero).
    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }

    pub fn final_residuals(&self) -> &[f64] {
        self.trace
            .instance_residuals()
            .last()
            .expect("trace is never empty")
    }

    pub fn final_residual(&self) -> f64 {
        *self.trace.residuals().last().expect("trace is never empty")
    }
}

fn residuals_of(ops: &[StepOperator], x: &Vector) -> Result<Vec<f64>> {
    ops.iter().map(|t| t.residual(x)).collect()
}

fn max_of(row: &[f64]) -> f64 {
    row.iter().copied().fold(0.0, f64::max)
}

/// Divergence is declared only if the residual also failed to shrink over
/// the monitoring window.
const DIVERGENCE_RESIDUAL_RATIO: f64 = 0.99;

struct Driver<'a> {
    ops: &'a [StepOperator],
    stop: &'a StopRule,
    iterates: Vec<Vector>,
    intermediate: Option<Vec<Vector>>,
    rows: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl<'a> Driver<'a> {
    fn run(
        ops: &'a [StepOperator],
        step: &StepSize,
        x0: &Vector,
        stop: &'a StopRule,
        keep_intermediate: bool,
        mut advance: impl FnMut(usize, &Vector) -> Result<(Vector, Option<Vector>)>,
    ) -> Result<RunResult> {
        stop.validate()?;
        let dim = ops[0].dim();
        check_vector(x0, "x0")?;
        check_dim(dim, x0)?;

        let mut driver = Driver {
            ops,
            stop,
            iterates: Vec::new(),
            intermediate: keep_intermediate.then(Vec::new),
            rows: Vec::new(),
            norms: Vec::new(),
        };
        let mut status = driver.record(x0.clone(), None)?;
        let mut k = 0;
        while status.is_none() {
            if k == stop.max_iters {
                status = Some(Status::MaxIters);
                break;
            }
            let current = driver.iterates.last().expect("x0 recorded");
            let (next, mid) = advance(k, current)?;
            k += 1;
            status = driver.record(next, mid)?;
        }

        let trace = IterationTrace {
            iterates: driver.iterates,
            intermediate: driver.intermediate,
            instance_residuals: driver.rows,
        };
        Ok(RunResult {
            status: status.expect("loop exits with a status"),
            solution: trace.last().clone(),
            trace,
            step: *step,
        })
    }

    /// Appends an iterate and decides whether the run ends there.
    fn record(&mut self, x: Vector, mid: Option<Vector>) -> Result<Option<Status>> {
        if let (Some(store), Some(y)) = (self.intermediate.as_mut(), mid) {
            store.push(y);
        }
        if x.iter().any(|e| !e.is_finite()) {
            self.rows.push(vec![f64::INFINITY; self.ops.len()]);
            self.norms.push(f64::INFINITY);
            self.iterates.push(x);
            return Ok(Some(Status::Diverging));
        }
        let row = residuals_of(self.ops, &x)?;
        let worst = max_of(&row);
        let displacement = self.iterates.last().map(|prev| (&x - prev).norm());
        self.norms.push(x.norm());
        self.rows.push(row);
        self.iterates.push(x);

        if worst <= self.stop.residual_tol {
            return Ok(Some(Status::Converged));
        }
        if displacement.is_some_and(|d| d < self.stop.stall_tol) {
            return Ok(Some(Status::Stalled));
        }
        if self.diverging() {
            return Ok(Some(Status::Diverging));
        }
        Ok(None)
    }

    fn diverging(&self) -> bool {
        let n = self.norms.len();
        if n < DIVERGENCE_WINDOW {
            return false;
        }
        if assess_norms(&self.norms, DIVERGENCE_WINDOW, DIVERGENCE_THRESHOLD) != Verdict::Growing {
            return false;
        }
        let start = max_of(&self.rows[n - DIVERGENCE_WINDOW]);
        let end = max_of(&self.rows[n - 1]);
        end >= DIVERGENCE_RESIDUAL_RATIO * start
    }
}

fn product_step(ops: &[StepOperator], x: &Vector) -> Result<(Vector, Vector)> {
    // Apply N-1, ..., 1; the point before the final T_0 is the intermediate.
    let mut y = x.clone();
    for t in ops[1..].iter().rev() {
        y = t.apply(&y)?;
    }
    let next = ops[0].apply(&y)?;
    Ok((next, y))
}

/// Two-set alternating scheme: `y^k = T_Q(x^k)`, `x^{k+1} = T_C(y^k)` with
/// `C` = instance 0 and `Q` = instance 1. Records both sequences.
pub fn solve_alternating(
    problem: &CsvipProblem,
    step: &StepSize,
    x0: &Vector,
    stop: &StopRule,
) -> Result<RunResult> {
    if problem.len() != 2 {
        return Err(Error::InstanceCount {
            expected: 2,
            found: problem.len(),
        });
    }
    let ops = problem.step_operators(step)?;
    let (t_c, t_q) = (&ops[0], &ops[1]);
    Driver::run(&ops, step, x0, stop, true, |_, x| {
        let y = t_q.apply(x)?;
        let next = t_c.apply(&y)?;
        Ok((next, Some(y)))
    })
}

/// N-set product `x^{k+1} = T_0 T_1 ... T_{N-1} x^k`.
pub fn solve_sequential(
    problem: &CsvipProblem,
    step: &StepSize,
    x0: &Vector,
    stop: &StopRule,
) -> Result<RunResult> {
    let ops = problem.step_operators(step)?;
    Driver::run(&ops, step, x0, stop, true, |_, x| {
        let (next, y) = product_step(&ops, x)?;
        Ok((next, Some(y)))
    })
}

/// Convex combination `x^{k+1} = sum_i w_i T_i x^k`, accumulated in index
/// order. Zero-weight operators are not evaluated.
pub fn solve_parallel(
    problem: &CsvipProblem,
    step: &StepSize,
    x0: &Vector,
    stop: &StopRule,
) -> Result<RunResult> {
    let ops = problem.step_operators(step)?;
    let weights = problem.weights();
    check_weights(&weights, ops.len())?;
    Driver::run(&ops, step, x0, stop, false, |_, x| {
        let mut acc = Vector::zeros(x.len());
        for (t, &w) in ops.iter().zip(&weights) {
            if w != 0.0 {
                acc += t.apply(x)? * w;
            }
        }
        Ok((acc, None))
    })
}

/// One step operator per iteration, chosen by `schedule`.
pub fn solve_unrestricted(
    problem: &CsvipProblem,
    schedule: &Schedule,
    step: &StepSize,
    x0: &Vector,
    stop: &StopRule,
) -> Result<RunResult> {
    let ops = problem.step_operators(step)?;
    let count = ops.len();
    if let Schedule::Explicit { indices } = schedule {
        if indices.is_empty() {
            return Err(Error::Schema("explicit schedule needs at least one index".into()));
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= count) {
            return Err(Error::ScheduleIndex { index, count });
        }
    }
    let mut rng = match schedule {
        Schedule::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    Driver::run(&ops, step, x0, stop, false, |k, x| {
        let pick = match schedule {
            Schedule::Cyclic => k % count,
            Schedule::Random { .. } => rng.as_mut().expect("seeded").random_range(0..count),
            Schedule::Explicit { indices } => indices[k % indices.len()],
        };
        Ok((ops[pick].apply(x)?, None))
    })
}
