//! JSON problem documents and result emission (JSON or CSV trace).
//!
//! A problem document looks like
//!
//! ```json
//! {
//!   "version": "csvip/1",
//!   "dim": 1,
//!   "instances": [
//!     {"set": {"type": "box", "lower": [0], "upper": [2]},
//!      "operator": {"type": "affine", "matrix": [[1]], "shift": [-2]}},
//!     {"set": {"type": "box", "lower": [1], "upper": [3]},
//!      "operator": {"type": "affine", "matrix": [[1]], "shift": [-2]}}
//!   ],
//!   "lambda": 1.0
//! }
//! ```
//!
//! Unknown fields anywhere are rejected. Matrices are row-major arrays of rows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::ConvexSet;
use crate::operators::{IsmOperator, OperatorKind, StepSize};
use crate::solvers::{CsvipProblem, IterationTrace, RunResult, Status, StopRule};
use crate::{Error, Matrix, Result, Vector};

pub const FORMAT_VERSION: &str = "csvip/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub version: String,
    pub dim: usize,
    pub instances: Vec<InstanceDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub set: SetDocument,
    pub operator: OperatorDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDocument {
    Halfspace { normal: Vec<f64>, offset: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    AffineSubspace { matrix: Vec<Vec<f64>>, rhs: Vec<f64> },
    Simplex {},
    WholeSpace {},
    Intersection { members: Vec<SetDocument> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorDocument {
    Zero {},
    Constant {
        value: Vec<f64>,
    },
    Affine {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall_tol: Option<f64>,
}

/// A validated problem plus the run options carried by the document.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedProblem {
    pub problem: CsvipProblem,
    /// Validated against the certified constants when present.
    pub lambda: Option<f64>,
    pub x0: Option<Vector>,
    pub stop: StopRule,
}

impl ParsedProblem {
    /// Step size from `lambda_override`, else the document's `lambda`, else
    /// the default `min_i alpha_i`.
    pub fn step(&self, lambda_override: Option<f64>) -> Result<StepSize> {
        crate::solvers::default_step(&self.problem, lambda_override.or(self.lambda))
    }

    /// `x0` from the document, or the origin.
    pub fn start(&self) -> Vector {
        self.x0
            .clone()
            .unwrap_or_else(|| Vector::zeros(self.problem.dim()))
    }
}

/// Parses with [`StopRule::default`] filling absent stop fields.
pub fn parse_problem(text: &str) -> Result<ParsedProblem> {
    parse_problem_with(text, &StopRule::default())
}

/// Parses a `csvip/1` document; `defaults` fills absent stop fields.
///
/// Affine operators are certified from their matrix; a declared `alpha`
/// above the certified value (beyond `1e-9`) is an error, a smaller one is
/// kept. Missing weights become uniform.
pub fn parse_problem_with(text: &str, defaults: &StopRule) -> Result<ParsedProblem> {
    let doc: ProblemDocument =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    build_problem(&doc, defaults)
}

pub fn build_problem(doc: &ProblemDocument, defaults: &StopRule) -> Result<ParsedProblem> {
    if doc.version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(doc.version.clone()));
    }
    if doc.dim == 0 {
        return Err(Error::Schema("dim must be positive".into()));
    }
    if doc.instances.is_empty() {
        return Err(Error::NoInstances);
    }

    let mut pairs = Vec::with_capacity(doc.instances.len());
    for inst in &doc.instances {
        let set = build_set(&inst.set, doc.dim)?;
        let op = build_operator(&inst.operator, inst.alpha, doc.dim)?;
        pairs.push((set, op));
    }
    let count = pairs.len();
    let weights = doc
        .weights
        .clone()
        .or_else(|| Some(vec![1.0 / count as f64; count]));
    let problem = CsvipProblem::new(pairs, weights)?;

    if let Some(lambda) = doc.lambda {
        crate::solvers::default_step(&problem, Some(lambda))?;
    }
    let x0 = doc
        .x0
        .as_ref()
        .map(|x| vector(x, doc.dim, "x0"))
        .transpose()?;

    let stop_doc = doc.stop.unwrap_or_default();
    let stop = StopRule {
        residual_tol: stop_doc.residual_tol.unwrap_or(defaults.residual_tol),
        max_iters: stop_doc.max_iters.unwrap_or(defaults.max_iters),
        stall_tol: stop_doc.stall_tol.unwrap_or(defaults.stall_tol),
    };
    stop.validate()?;

    Ok(ParsedProblem {
        problem,
        lambda: doc.lambda,
        x0,
        stop,
    })
}

fn vector(values: &[f64], dim: usize, what: &'static str) -> Result<Vector> {
    if values.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(Vector::from_row_slice(values))
}

fn matrix(rows: &[Vec<f64>], ncols: usize) -> Result<Matrix> {
    if rows.is_empty() {
        return Err(Error::Schema("matrix needs at least one row".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            expected: ncols,
            found: bad.len(),
        });
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn build_set(doc: &SetDocument, dim: usize) -> Result<ConvexSet> {
    match doc {
        SetDocument::Halfspace { normal, offset } => {
            ConvexSet::halfspace(vector(normal, dim, "normal")?, *offset)
        }
        SetDocument::Hyperplane { normal, offset } => {
            ConvexSet::hyperplane(vector(normal, dim, "normal")?, *offset)
        }
        SetDocument::Box { lower, upper } => {
            ConvexSet::boxed(vector(lower, dim, "lower")?, vector(upper, dim, "upper")?)
        }
        SetDocument::Ball { center, radius } => {
            ConvexSet::ball(vector(center, dim, "center")?, *radius)
        }
        SetDocument::AffineSubspace { matrix: rows, rhs } => {
            let a = matrix(rows, dim)?;
            let b = vector(rhs, a.nrows(), "rhs")?;
            ConvexSet::affine_subspace(a, b)
        }
        SetDocument::Simplex {} => ConvexSet::simplex(dim),
        SetDocument::WholeSpace {} => ConvexSet::whole_space(dim),
        SetDocument::Intersection { members } => ConvexSet::intersection(
            members
                .iter()
                .map(|m| build_set(m, dim))
                .collect::<Result<_>>()?,
        ),
    }
}

fn build_operator(doc: &OperatorDocument, alpha: Option<f64>, dim: usize) -> Result<IsmOperator> {
    let kind = match doc {
        OperatorDocument::Zero {} => OperatorKind::Zero { dim },
        OperatorDocument::Constant { value } => OperatorKind::Constant {
            value: vector(value, dim, "constant value")?,
        },
        OperatorDocument::Affine { matrix: rows, shift } => {
            if rows.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rows.len(),
                });
            }
            let shift = match shift {
                Some(s) => vector(s, dim, "shift")?,
                None => Vector::zeros(dim),
            };
            OperatorKind::Affine {
                matrix: matrix(rows, dim)?,
                shift,
            }
        }
    };
    match alpha {
        Some(declared) => IsmOperator::with_declared_alpha(kind, declared),
        None => match kind {
            OperatorKind::Zero { dim } => IsmOperator::zero(dim),
            OperatorKind::Constant { value } => IsmOperator::constant(value),
            OperatorKind::Affine { matrix, shift } => IsmOperator::affine(matrix, shift),
            OperatorKind::Custom(_) => unreachable!("documents cannot describe custom maps"),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    CsvTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDocument {
    pub lambda: f64,
    /// `null` when every operator has an infinite constant.
    pub alpha_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDocument {
    pub iterates: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intermediate: Option<Vec<Vec<f64>>>,
    pub residuals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub version: String,
    pub status: Status,
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub step: StepDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceDocument>,
}

impl ResultDocument {
    pub fn from_run(result: &RunResult, with_trace: bool) -> Self {
        let rows = |xs: &[Vector]| xs.iter().map(|x| x.iter().copied().collect()).collect();
        let trace = with_trace.then(|| TraceDocument {
            iterates: rows(result.trace.iterates()),
            intermediate: result.trace.intermediate().map(rows),
            residuals: result.trace.instance_residuals().to_vec(),
        });
        let alpha_bound = result.step.alpha_bound();
        Self {
            version: FORMAT_VERSION.to_string(),
            status: result.status,
            solution: result.solution.iter().copied().collect(),
            iterations: result.iterations(),
            residuals: result.final_residuals().to_vec(),
            step: StepDocument {
                lambda: result.step.lambda(),
                alpha_bound: alpha_bound.is_finite().then_some(alpha_bound),
            },
            trace,
        }
    }

    /// Rebuilds the full run; needs the embedded trace.
    pub fn to_run(&self) -> Result<RunResult> {
        if self.version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(self.version.clone()));
        }
        let doc = self
            .trace
            .as_ref()
            .ok_or_else(|| Error::MalformedTrace("result carries no trace".into()))?;
        let to_vectors =
            |rows: &[Vec<f64>]| rows.iter().map(|r| Vector::from_row_slice(r)).collect::<Vec<_>>();
        let trace = IterationTrace::new(
            to_vectors(&doc.iterates),
            doc.intermediate.as_deref().map(to_vectors),
            doc.residuals.clone(),
        )?;
        let alpha = self.step.alpha_bound.unwrap_or(f64::INFINITY);
        let step = crate::operators::validate_step(Some(self.step.lambda), &[alpha])?;
        let solution = Vector::from_row_slice(&self.solution);
        if &solution != trace.last() || self.iterations + 1 != trace.len() {
            return Err(Error::MalformedTrace(
                "summary fields disagree with the trace".into(),
            ));
        }
        Ok(RunResult {
            status: self.status,
            solution,
            trace,
            step,
        })
    }
}

pub fn parse_result(text: &str) -> Result<ResultDocument> {
    serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
}

/// Serializes a run: `Json` gives a [`ResultDocument`] including the full
/// trace; `CsvTrace` gives one row per iterate under the header
/// `k,x_0,...,x_{n-1},r_0,...,r_{N-1}`.
pub fn emit_result(result: &RunResult, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let doc = ResultDocument::from_run(result, true);
            let mut text = serde_json::to_string_pretty(&doc).expect("result serializes");
            text.push('\n');
            text
        }
        OutputFormat::CsvTrace => emit_csv(&result.trace),
    }
}

fn emit_csv(trace: &IterationTrace) -> String {
    let n = trace.dim();
    let instances = trace.instance_residuals()[0].len();
    let mut out = String::from("k");
    for i in 0..n {
        let _ = write!(out, ",x_{i}");
    }
    for i in 0..instances {
        let _ = write!(out, ",r_{i}");
    }
    out.push('\n');
    for (k, (x, row)) in trace
        .iterates()
        .iter()
        .zip(trace.instance_residuals())
        .enumerate()
    {
        let _ = write!(out, "{k}");
        for v in x.iter().chain(row.iter()) {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    out
}
