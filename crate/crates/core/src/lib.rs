//! # csvip-core
//!
//! Projection methods for the common solutions to variational inequalities
//! problem (CSVIP) in `R^n`: given pairs `(C_i, f_i)` of closed convex sets
//! and inverse strongly monotone operators, find a point `x*` that lies in
//! every `C_i` and satisfies
//!
//! ```text
//! <f_i(x*), x - x*> >= 0   for all x in C_i, i = 1..N.
//! ```
//!
//! Each pair is turned into a step operator `T_i = P_{C_i}(I - lambda f_i)`
//! whose fixed points are exactly the solutions of the i-th inequality. The
//! solvers iterate products, convex combinations, or scheduled sequences of
//! these operators:
//!
//! * [`solvers::solve_alternating`] -- two-set alternating scheme
//!   `y = T_Q(x), x+ = T_C(y)`.
//! * [`solvers::solve_sequential`] -- the N-set product `T_1 T_2 ... T_N`.
//! * [`solvers::solve_parallel`] -- the weighted average `sum w_i T_i`.
//! * [`solvers::solve_unrestricted`] -- one operator per step, chosen by a
//!   cyclic, seeded random, or explicit schedule.
//!
//! The [`diagnostics`] module checks Fejér monotonicity and divergence
//! symptoms on recorded traces, and [`oracle`] provides independent reference
//! solvers (extragradient, direct subspace projection, grid search).
//! Problems and results are exchanged as JSON through [`problemio`].
//!
//! ```
//! use csvip_core::prelude::*;
//!
//! // Two intervals [0, 2] and [1, 3], both with h(x) = x - 2.
//! let op = IsmOperator::affine(Matrix::from_element(1, 1, 1.0), Vector::from_element(1, -2.0)).unwrap();
//! let c = ConvexSet::boxed(Vector::from_element(1, 0.0), Vector::from_element(1, 2.0)).unwrap();
//! let q = ConvexSet::boxed(Vector::from_element(1, 1.0), Vector::from_element(1, 3.0)).unwrap();
//! let problem = CsvipProblem::new(vec![(c, op.clone()), (q, op)], None).unwrap();
//! let step = default_step(&problem, Some(1.0)).unwrap();
//! let run = solve_alternating(&problem, &step, &Vector::from_element(1, 10.0), &StopRule::default()).unwrap();
//! assert_eq!(run.status, Status::Converged);
//! assert!((run.solution[0] - 2.0).abs() < 1e-8);
//! ```

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod oracle;
pub mod problemio;
pub mod solvers;

pub use error::{Error, Result};

/// Points of `R^n`.
pub type Vector = nalgebra::DVector<f64>;
/// Dense row-major-constructed real matrices.
pub type Matrix = nalgebra::DMatrix<f64>;

pub mod prelude {
    pub use crate::diagnostics::{
        divergence_monitor, fejer_check, residual_series, DivergenceStatus, FejerReport, Verdict,
    };
    pub use crate::geometry::{contains, project, project_intersection, ConvexSet};
    pub use crate::operators::{
        check_operator_class, estimate_ism_constant, forward_step, validate_step, IsmOperator,
        OperatorKind, StepOperator, StepSize,
    };
    pub use crate::oracle::{
        extragradient_solve, grid_search_vip, subspace_intersection_projection, OracleMethod,
        OracleResult,
    };
    pub use crate::problemio::{emit_result, parse_problem, OutputFormat, ParsedProblem};
    pub use crate::solvers::{
        default_step, solve_alternating, solve_parallel, solve_sequential, solve_unrestricted,
        CsvipProblem, Instance, IterationTrace, RunResult, Schedule, Status, StopRule,
    };
    pub use crate::{Error, Matrix, Result, Vector};
}

pub(crate) fn check_dim(expected: usize, v: &Vector) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_vector(v: &Vector, what: &'static str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    if v.iter().any(|e| !e.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}
