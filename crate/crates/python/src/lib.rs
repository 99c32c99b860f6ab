use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use csvip_core::diagnostics::{self, DIVERGENCE_THRESHOLD, DIVERGENCE_WINDOW, FEJER_TOL};
use csvip_core::geometry;
use csvip_core::operators::{self, OperatorKind};
use csvip_core::prelude as core;
use csvip_core::problemio::{self, OutputFormat};
use csvip_core::{Matrix, Vector};

create_exception!(csvip, CsvipError, PyValueError, "Raised for invalid problems and failed runs.");

fn err(e: csvip_core::Error) -> PyErr {
    CsvipError::new_err(format!("[{}] {e}", e.code()))
}

fn vector(xs: Vec<f64>) -> Vector {
    Vector::from_vec(xs)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CsvipError::new_err("matrix rows differ in length"));
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn list(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

#[pyclass(name = "ConvexSet", module = "csvip", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyConvexSet {
    inner: core::ConvexSet,
}

#[pymethods]
impl PyConvexSet {
    /// `{x : <normal, x> <= offset}`
    #[staticmethod]
    fn halfspace(normal: Vec<f64>, offset: f64) -> PyResult<Self> {
        core::ConvexSet::halfspace(vector(normal), offset).map(Self::from).map_err(err)
    }

    #[staticmethod]
    fn hyperplane(normal: Vec<f64>, offset: f64) -> PyResult<Self> {
        core::ConvexSet::hyperplane(vector(normal), offset).map(Self::from).map_err(err)
    }

    #[staticmethod]
    #[pyo3(name = "box")]
    fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        core::ConvexSet::boxed(vector(lower), vector(upper)).map(Self::from).map_err(err)
    }

    #[staticmethod]
    fn ball(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        core::ConvexSet::ball(vector(center), radius).map(Self::from).map_err(err)
    }

    /// `{x : A x = b}`; `matrix` is a list of rows.
    #[staticmethod]
    fn affine_subspace(matrix_rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> PyResult<Self> {
        core::ConvexSet::affine_subspace(matrix(matrix_rows)?, vector(rhs))
            .map(Self::from)
            .map_err(err)
    }

    #[staticmethod]
    fn simplex(dim: usize) -> PyResult<Self> {
        core::ConvexSet::simplex(dim).map(Self::from).map_err(err)
    }

    #[staticmethod]
    fn whole_space(dim: usize) -> PyResult<Self> {
        core::ConvexSet::whole_space(dim).map(Self::from).map_err(err)
    }

    #[staticmethod]
    fn intersection(members: Vec<PyRef<'_, PyConvexSet>>) -> PyResult<Self> {
        core::ConvexSet::intersection(members.iter().map(|m| m.inner.clone()).collect())
            .map(Self::from)
            .map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn project(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.project(&vector(x)).map(|p| list(&p)).map_err(err)
    }

    fn distance(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.distance(&vector(x)).map_err(err)
    }

    #[pyo3(signature = (x, tol = 1e-10))]
    fn contains(&self, x: Vec<f64>, tol: f64) -> PyResult<bool> {
        geometry::contains(&self.inner, &vector(x), tol).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ConvexSet({:?})", self.inner)
    }
}

impl From<core::ConvexSet> for PyConvexSet {
    fn from(inner: core::ConvexSet) -> Self {
        Self { inner }
    }
}

#[pyclass(name = "IsmOperator", module = "csvip", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyIsmOperator {
    inner: core::IsmOperator,
}

#[pymethods]
impl PyIsmOperator {
    #[staticmethod]
    fn zero(dim: usize) -> PyResult<Self> {
        core::IsmOperator::zero(dim).map(Self::from).map_err(err)
    }

    #[staticmethod]
    fn constant(value: Vec<f64>) -> PyResult<Self> {
        core::IsmOperator::constant(vector(value)).map(Self::from).map_err(err)
    }

    /// `x -> M x + shift`, certified on construction. A smaller declared
    /// `alpha` is kept; a larger one is rejected.
    #[staticmethod]
    #[pyo3(signature = (matrix_rows, shift = None, alpha = None))]
    fn affine(matrix_rows: Vec<Vec<f64>>, shift: Option<Vec<f64>>, alpha: Option<f64>) -> PyResult<Self> {
        let m = matrix(matrix_rows)?;
        let shift = shift.map(vector).unwrap_or_else(|| Vector::zeros(m.nrows()));
        let op = match alpha {
            Some(declared) => core::IsmOperator::with_declared_alpha(
                OperatorKind::Affine { matrix: m, shift },
                declared,
            ),
            None => core::IsmOperator::affine(m, shift),
        };
        op.map(Self::from).map_err(err)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn certified(&self) -> bool {
        self.inner.is_certified()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.apply(&vector(x)).map(|y| list(&y)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("IsmOperator(alpha={})", self.inner.alpha())
    }
}

impl From<core::IsmOperator> for PyIsmOperator {
    fn from(inner: core::IsmOperator) -> Self {
        Self { inner }
    }
}

#[pyclass(name = "RunResult", module = "csvip", frozen)]
struct PyRunResult {
    inner: core::RunResult,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn status(&self) -> &'static str {
        self.inner.status.as_str()
    }

    #[getter]
    fn solution(&self) -> Vec<f64> {
        list(&self.inner.solution)
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.inner.final_residuals().to_vec()
    }

    #[getter]
    fn step(&self) -> f64 {
        self.inner.step.lambda()
    }

    /// Every iterate, `x^0` first.
    #[getter]
    fn iterates(&self) -> Vec<Vec<f64>> {
        self.inner.trace.iterates().iter().map(list).collect()
    }

    #[pyo3(signature = (format = "json"))]
    fn emit(&self, format: &str) -> PyResult<String> {
        let format = match format {
            "json" => OutputFormat::Json,
            "csv-trace" => OutputFormat::CsvTrace,
            other => return Err(CsvipError::new_err(format!("unknown format `{other}`"))),
        };
        Ok(core::emit_result(&self.inner, format))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = problemio::parse_result(text)
            .and_then(|doc| doc.to_run())
            .map_err(err)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(status='{}', iterations={}, solution={:?})",
            self.status(),
            self.iterations(),
            self.solution()
        )
    }
}

#[pyclass(name = "Problem", module = "csvip", frozen)]
struct PyProblem {
    inner: core::CsvipProblem,
    lambda: Option<f64>,
    x0: Option<Vector>,
    stop: core::StopRule,
}

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (instances, weights = None, lam = None))]
    fn new(
        instances: Vec<(PyRef<'_, PyConvexSet>, PyRef<'_, PyIsmOperator>)>,
        weights: Option<Vec<f64>>,
        lam: Option<f64>,
    ) -> PyResult<Self> {
        let pairs = instances
            .iter()
            .map(|(s, o)| (s.inner.clone(), o.inner.clone()))
            .collect();
        let inner = core::CsvipProblem::new(pairs, weights).map_err(err)?;
        Ok(Self {
            inner,
            lambda: lam,
            x0: None,
            stop: core::StopRule::default(),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let parsed = core::parse_problem(text).map_err(err)?;
        Ok(Self {
            inner: parsed.problem,
            lambda: parsed.lambda,
            x0: parsed.x0,
            stop: parsed.stop,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn alphas(&self) -> Vec<f64> {
        self.inner.alphas()
    }

    /// Per-instance `||x - T_i x||`.
    #[pyo3(signature = (x, lam = None))]
    fn residuals(&self, x: Vec<f64>, lam: Option<f64>) -> PyResult<Vec<f64>> {
        let step = self.step(lam)?;
        self.inner.residuals(&step, &vector(x)).map_err(err)
    }

    /// Runs one solver. `algorithm` is `alternating`, `sequential`,
    /// `parallel` or `unrestricted`; the schedule options apply to the last.
    #[pyo3(signature = (
        algorithm = "sequential",
        x0 = None,
        lam = None,
        schedule = "cyclic",
        seed = 0,
        indices = None,
        residual_tol = None,
        max_iters = None,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn solve(
        &self,
        py: Python<'_>,
        algorithm: &str,
        x0: Option<Vec<f64>>,
        lam: Option<f64>,
        schedule: &str,
        seed: u64,
        indices: Option<Vec<usize>>,
        residual_tol: Option<f64>,
        max_iters: Option<usize>,
    ) -> PyResult<PyRunResult> {
        let step = self.step(lam)?;
        let x0 = x0
            .map(vector)
            .or_else(|| self.x0.clone())
            .unwrap_or_else(|| Vector::zeros(self.inner.dim()));
        let stop = core::StopRule {
            residual_tol: residual_tol.unwrap_or(self.stop.residual_tol),
            max_iters: max_iters.unwrap_or(self.stop.max_iters),
            ..self.stop
        };
        let schedule = match (schedule, indices) {
            ("cyclic", None) => core::Schedule::Cyclic,
            ("random", None) => core::Schedule::Random { seed },
            ("explicit", Some(indices)) => core::Schedule::Explicit { indices },
            (other, _) => {
                return Err(CsvipError::new_err(format!(
                    "schedule `{other}` with these indices is not valid"
                )))
            }
        };
        let problem = &self.inner;
        let result = py.detach(|| match algorithm {
            "alternating" => Some(core::solve_alternating(problem, &step, &x0, &stop)),
            "sequential" => Some(core::solve_sequential(problem, &step, &x0, &stop)),
            "parallel" => Some(core::solve_parallel(problem, &step, &x0, &stop)),
            "unrestricted" => Some(core::solve_unrestricted(problem, &schedule, &step, &x0, &stop)),
            _ => None,
        });
        let result = result
            .ok_or_else(|| CsvipError::new_err(format!("unknown algorithm `{algorithm}`")))?
            .map_err(err)?;
        Ok(PyRunResult { inner: result })
    }

    fn __repr__(&self) -> String {
        format!("Problem(instances={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

impl PyProblem {
    fn step(&self, lam: Option<f64>) -> PyResult<core::StepSize> {
        core::default_step(&self.inner, lam.or(self.lambda)).map_err(err)
    }
}

/// Projection onto `set`.
#[pyfunction]
fn project(set: PyRef<'_, PyConvexSet>, x: Vec<f64>) -> PyResult<Vec<f64>> {
    set.project(x)
}

/// Largest certified `alpha` for `x -> M x`; infinity for the zero matrix.
#[pyfunction]
fn estimate_ism_constant(matrix_rows: Vec<Vec<f64>>) -> PyResult<f64> {
    let m = matrix(matrix_rows)?;
    let n = m.nrows();
    operators::estimate_ism_constant(&OperatorKind::Affine {
        matrix: m,
        shift: Vector::zeros(n),
    })
    .map_err(err)
}

/// Fejér check of a run's trace against `z`.
#[pyfunction]
#[pyo3(signature = (result, z, tol = FEJER_TOL))]
fn fejer_check<'py>(
    py: Python<'py>,
    result: PyRef<'_, PyRunResult>,
    z: Vec<f64>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = diagnostics::fejer_check(&result.inner.trace, &vector(z), tol).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("monotone", report.is_monotone())?;
    out.set_item("max_violation", report.max_violation)?;
    out.set_item("violations", report.violations)?;
    Ok(out)
}

/// `bounded`, `growing` or `inconclusive` for a run's norm history.
#[pyfunction]
#[pyo3(signature = (result, window = DIVERGENCE_WINDOW, threshold = DIVERGENCE_THRESHOLD))]
fn divergence_verdict(result: PyRef<'_, PyRunResult>, window: usize, threshold: f64) -> &'static str {
    match diagnostics::divergence_monitor(&result.inner.trace, window, threshold).verdict {
        core::Verdict::Bounded => "bounded",
        core::Verdict::Growing => "growing",
        core::Verdict::Inconclusive => "inconclusive",
    }
}

#[pymodule]
fn csvip(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CsvipError", m.py().get_type::<CsvipError>())?;
    m.add_class::<PyConvexSet>()?;
    m.add_class::<PyIsmOperator>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_ism_constant, m)?)?;
    m.add_function(wrap_pyfunction!(fejer_check, m)?)?;
    m.add_function(wrap_pyfunction!(divergence_verdict, m)?)?;
    Ok(())
}
