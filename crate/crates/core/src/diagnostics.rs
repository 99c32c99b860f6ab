//! Read-only analyses of recorded traces: Fejér monotonicity with respect to
//! a reference solution, norm-growth symptoms of an empty solution set, and
//! per-instance residual tables.

use serde::{Deserialize, Serialize};

use crate::operators::StepSize;
use crate::solvers::{CsvipProblem, IterationTrace};
use crate::{check_dim, Error, Result, Vector};

/// Default Fejér slack; the inequality is exact, this only absorbs rounding.
pub const FEJER_TOL: f64 = 1e-12;
/// Trailing window inspected by [`divergence_monitor`].
pub const DIVERGENCE_WINDOW: usize = 50;
/// Growth factor over `1 + ||x^0||` that the final norm must exceed before a
/// trace is called growing.
pub const DIVERGENCE_THRESHOLD: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FejerReport {
    pub reference_point: Vector,
    /// `(k, ||x^{k+1} - z|| - ||x^k - z||)` for every step exceeding the tolerance.
    pub violations: Vec<(usize, f64)>,
    /// Largest increase of the distance to `z` over the trace (0 if none).
    pub max_violation: f64,
}

impl FejerReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every `k` with `||x^{k+1} - z|| - ||x^k - z|| > tol`.
pub fn fejer_check(trace: &IterationTrace, z: &Vector, tol: f64) -> Result<FejerReport> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    check_dim(trace.dim(), z)?;
    let distances: Vec<f64> = trace.iterates().iter().map(|x| (x - z).norm()).collect();
    let mut violations = Vec::new();
    let mut max_violation: f64 = 0.0;
    for (k, pair) in distances.windows(2).enumerate() {
        let increase = pair[1] - pair[0];
        max_violation = max_violation.max(increase);
        if increase > tol {
            violations.push((k, increase));
        }
    }
    Ok(FejerReport {
        reference_point: z.clone(),
        violations,
        max_violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceStatus {
    pub verdict: Verdict,
    pub norm_series: Vec<f64>,
}

/// Three-valued growth test on `||x^k||`.
///
/// With `cap = threshold * (1 + ||x^0||)` and `tail` the last `window` norms:
///
/// * `Growing` -- `tail` strictly increasing, its last entry above `cap`, and
///   the last increment at least half the first (steady growth rather than
///   a contracting approach to a far-away limit).
/// * `Bounded` -- `tail` stays below `cap` and is either not strictly
///   increasing or its increments have at least halved across the window.
/// * `Inconclusive` -- fewer than `window` norms, or neither of the above.
pub fn divergence_monitor(trace: &IterationTrace, window: usize, threshold: f64) -> DivergenceStatus {
    let norm_series: Vec<f64> = trace.iterates().iter().map(|x| x.norm()).collect();
    DivergenceStatus {
        verdict: assess_norms(&norm_series, window, threshold),
        norm_series,
    }
}

pub(crate) fn assess_norms(norms: &[f64], window: usize, threshold: f64) -> Verdict {
    let window = window.max(2);
    if norms.len() < window {
        return Verdict::Inconclusive;
    }
    let cap = threshold * (1.0 + norms[0]);
    let tail = &norms[norms.len() - window..];
    let increments: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let strictly_increasing = increments.iter().all(|&d| d > 0.0);
    let first = increments[0];
    let last = increments[increments.len() - 1];
    let last_norm = tail[tail.len() - 1];

    if strictly_increasing && last_norm > cap && last >= 0.5 * first {
        return Verdict::Growing;
    }
    let within_cap = tail.iter().all(|&n| n <= cap);
    if within_cap && (!strictly_increasing || last <= 0.5 * first) {
        return Verdict::Bounded;
    }
    Verdict::Inconclusive
}

/// Residual of every iterate against every instance, recomputed from the
/// problem; row `k` belongs to `x^k`.
pub fn residual_series(
    problem: &CsvipProblem,
    trace: &IterationTrace,
    step: &StepSize,
) -> Result<Vec<Vec<f64>>> {
    if trace.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: trace.dim(),
        });
    }
    let ops = problem.step_operators(step)?;
    trace
        .iterates()
        .iter()
        .map(|x| ops.iter().map(|t| t.residual(x)).collect())
        .collect()
}
