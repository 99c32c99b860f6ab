//! Inverse strongly monotone (ism) operators and the projected forward step.
//!
//! An operator `h` is `beta`-ism when
//! `<h(x) - h(y), x - y> >= beta * ||h(x) - h(y)||^2` for all `x, y`.
//! For `lambda` in `(0, 2 beta)` the map `T = P_D(I - lambda h)` is averaged,
//! and its fixed points are exactly the solutions of the variational
//! inequality over `D`. Everything the solvers iterate is a [`StepOperator`].

use std::fmt;
use std::sync::Arc;

use nalgebra::SymmetricEigen;

use crate::geometry::ConvexSet;
use crate::{check_dim, check_vector, Error, Matrix, Result, Vector};

/// Relative precision of the bisection in [`estimate_ism_constant`].
pub const ISM_BISECTION_RTOL: f64 = 1e-10;

/// Slack allowed when a declared ism constant is compared with the
/// certified one.
pub const ALPHA_SLACK: f64 = 1e-9;

/// A user-supplied map with an asserted ism constant.
#[derive(Clone)]
pub struct CustomMap {
    dim: usize,
    map: Arc<dyn Fn(&Vector) -> Vector + Send + Sync>,
}

impl CustomMap {
    pub fn new(dim: usize, map: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        Self {
            dim,
            map: Arc::new(map),
        }
    }
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMap").field("dim", &self.dim).finish()
    }
}

impl PartialEq for CustomMap {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && Arc::ptr_eq(&self.map, &other.map)
    }
}

/// The formula of an operator, without its ism constant.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Zero { dim: usize },
    Constant { value: Vector },
    /// `h(x) = matrix * x + shift`.
    Affine { matrix: Matrix, shift: Vector },
    Custom(CustomMap),
}

impl OperatorKind {
    pub fn dim(&self) -> usize {
        match self {
            Self::Zero { dim } => *dim,
            Self::Constant { value } => value.len(),
            Self::Affine { shift, .. } => shift.len(),
            Self::Custom(c) => c.dim,
        }
    }

    fn eval(&self, x: &Vector) -> Vector {
        match self {
            Self::Zero { dim } => Vector::zeros(*dim),
            Self::Constant { value } => value.clone(),
            Self::Affine { matrix, shift } => matrix * x + shift,
            Self::Custom(c) => (c.map)(x),
        }
    }
}

/// An operator together with its ism constant `alpha`.
///
/// `alpha == f64::INFINITY` marks operators that are `beta`-ism for every
/// `beta` (the zero and constant maps). Operators built through
/// [`IsmOperator::custom`] carry an asserted constant and report
/// `is_certified() == false`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsmOperator {
    kind: OperatorKind,
    alpha: f64,
    certified: bool,
}

impl IsmOperator {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self {
            kind: OperatorKind::Zero { dim },
            alpha: f64::INFINITY,
            certified: true,
        })
    }

    pub fn constant(value: Vector) -> Result<Self> {
        check_vector(&value, "constant value")?;
        Ok(Self {
            kind: OperatorKind::Constant { value },
            alpha: f64::INFINITY,
            certified: true,
        })
    }

    /// Affine map with a certified ism constant.
    pub fn affine(matrix: Matrix, shift: Vector) -> Result<Self> {
        let kind = affine_kind(matrix, shift)?;
        let alpha = estimate_ism_constant(&kind)?;
        Ok(Self {
            kind,
            alpha,
            certified: true,
        })
    }

    /// Builds the operator and adopts `declared` as its constant, provided
    /// it does not exceed the certified one by more than [`ALPHA_SLACK`].
    /// A smaller declared constant is valid (ism is inherited downwards) and
    /// is kept as given.
    pub fn with_declared_alpha(kind: OperatorKind, declared: f64) -> Result<Self> {
        if declared.is_nan() || declared <= 0.0 {
            return Err(Error::NonPositiveAlpha(declared));
        }
        let certified = match &kind {
            OperatorKind::Affine { matrix, shift } => {
                let kind = affine_kind(matrix.clone(), shift.clone())?;
                estimate_ism_constant(&kind)?
            }
            OperatorKind::Custom(_) => {
                return Err(Error::Uncertifiable);
            }
            other => estimate_ism_constant(other)?,
        };
        if declared > certified + ALPHA_SLACK {
            return Err(Error::AlphaExceedsCertified {
                declared,
                certified,
            });
        }
        Ok(Self {
            kind,
            alpha: declared,
            certified: true,
        })
    }

    /// Black-box operator with an asserted constant. Nothing is verified;
    /// reports flag it as uncertified.
    pub fn custom(map: CustomMap, alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        if map.dim == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self {
            kind: OperatorKind::Custom(map),
            alpha,
            certified: false,
        })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// Evaluates `h(x)`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x)?;
        Ok(self.kind.eval(x))
    }
}

fn affine_kind(matrix: Matrix, shift: Vector) -> Result<OperatorKind> {
    check_vector(&shift, "shift")?;
    let n = shift.len();
    if matrix.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: matrix.nrows(),
        });
    }
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: matrix.ncols(),
        });
    }
    if matrix.iter().any(|e| !e.is_finite()) {
        return Err(Error::NonFinite("operator matrix"));
    }
    Ok(OperatorKind::Affine { matrix, shift })
}

/// Largest `beta` with `(M + M^T)/2 - beta M^T M` positive semidefinite.
///
/// Returns `f64::INFINITY` for the zero and constant maps (and for an affine
/// map with zero matrix). Fails with [`Error::NotIsm`] when the symmetric
/// part is indefinite, or when `M` acts on a direction the symmetric part
/// annihilates (for example a skew matrix), since then no positive `beta`
/// exists.
///
/// The null space of the symmetric part is split off first; on its
/// complement `lambda_min(S - beta G)` is strictly positive at `beta = 0`
/// and is bisected down to [`ISM_BISECTION_RTOL`]. The lower (feasible)
/// end of the final bracket is returned.
pub fn estimate_ism_constant(kind: &OperatorKind) -> Result<f64> {
    let matrix = match kind {
        OperatorKind::Zero { .. } | OperatorKind::Constant { .. } => return Ok(f64::INFINITY),
        OperatorKind::Custom(_) => return Err(Error::Uncertifiable),
        OperatorKind::Affine { matrix, .. } => matrix,
    };
    let n = matrix.nrows();
    let gram = matrix.transpose() * matrix;
    let gram_eig = SymmetricEigen::new(gram.clone());
    let sigma_max_sq = gram_eig.eigenvalues.max();
    if sigma_max_sq <= 0.0 {
        return Ok(f64::INFINITY);
    }

    let sym = (matrix + matrix.transpose()) * 0.5;
    let sym_eig = SymmetricEigen::new(sym);
    let scale = sym_eig.eigenvalues.amax().max(sigma_max_sq.sqrt());
    let null_cut = scale * f64::EPSILON * n as f64 * 64.0;
    if sym_eig.eigenvalues.min() < -null_cut {
        return Err(Error::NotIsm);
    }

    let range_idx: Vec<usize> = (0..n)
        .filter(|&i| sym_eig.eigenvalues[i] > null_cut)
        .collect();
    let null_idx: Vec<usize> = (0..n)
        .filter(|&i| sym_eig.eigenvalues[i] <= null_cut)
        .collect();
    if range_idx.is_empty() {
        return Err(Error::NotIsm);
    }
    if !null_idx.is_empty() {
        let null_basis = sym_eig.eigenvectors.select_columns(&null_idx);
        let leak = (matrix * null_basis).norm();
        if leak > 1e-9 * matrix.norm() {
            return Err(Error::NotIsm);
        }
    }

    let range_basis = sym_eig.eigenvectors.select_columns(&range_idx);
    let sym_r = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        range_idx.len(),
        range_idx.iter().map(|&i| sym_eig.eigenvalues[i]),
    ));
    let gram_r = range_basis.transpose() * &gram * &range_basis;
    let feasible = |beta: f64| -> bool {
        let m = &sym_r - &gram_r * beta;
        let m = (&m + m.transpose()) * 0.5;
        SymmetricEigen::new(m).eigenvalues.min() >= 0.0
    };

    // Cauchy-Schwarz: <Mu, u> <= ||Mu|| ||u|| caps beta at 1 / sigma_max.
    let mut hi = 1.0 / sigma_max_sq.sqrt();
    if feasible(hi) {
        return Ok(hi);
    }
    let mut lo = 0.0;
    while hi - lo > ISM_BISECTION_RTOL * lo.max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        return Err(Error::NotIsm);
    }
    Ok(lo)
}

/// A step size `lambda` validated against `alpha_bound = min_i alpha_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSize {
    lambda: f64,
    alpha_bound: f64,
}

impl StepSize {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Smallest ism constant the step was validated against; infinite when
    /// every operator was a zero or constant map.
    pub fn alpha_bound(&self) -> f64 {
        self.alpha_bound
    }
}

/// Accepts `lambda` iff `0 < lambda < 2 min(alphas)`. Without a `lambda`,
/// defaults to `min(alphas)`, the midpoint of the admissible interval.
pub fn validate_step(lambda: Option<f64>, alphas: &[f64]) -> Result<StepSize> {
    if alphas.is_empty() {
        return Err(Error::NoInstances);
    }
    if let Some(&bad) = alphas.iter().find(|a| a.is_nan() || **a <= 0.0) {
        return Err(Error::NonPositiveAlpha(bad));
    }
    let alpha_bound = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda = match lambda {
        Some(l) => l,
        None if alpha_bound.is_finite() => alpha_bound,
        None => return Err(Error::NoDefaultStep),
    };
    let upper = 2.0 * alpha_bound;
    if !lambda.is_finite() || lambda <= 0.0 || lambda >= upper {
        return Err(Error::StepOutOfRange { lambda, upper });
    }
    Ok(StepSize {
        lambda,
        alpha_bound,
    })
}

/// `x - lambda h(x)`.
pub fn forward_step(op: &IsmOperator, step: &StepSize, x: &Vector) -> Result<Vector> {
    let hx = op.apply(x)?;
    Ok(x - hx * step.lambda)
}

/// `T = P_D(I - lambda h)` for one variational inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOperator {
    set: ConvexSet,
    op: IsmOperator,
    step: StepSize,
}

impl StepOperator {
    pub fn new(set: ConvexSet, op: IsmOperator, step: StepSize) -> Result<Self> {
        if set.dim() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: set.dim(),
                found: op.dim(),
            });
        }
        let upper = 2.0 * op.alpha();
        if step.lambda >= upper {
            return Err(Error::StepOutOfRange {
                lambda: step.lambda,
                upper,
            });
        }
        Ok(Self { set, op, step })
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn op(&self) -> &IsmOperator {
        &self.op
    }

    pub fn step(&self) -> &StepSize {
        &self.step
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// `P_D(x - lambda h(x))`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.set.project(&forward_step(&self.op, &self.step, x)?)
    }

    /// `||x - T(x)||`; zero exactly on the solution set.
    pub fn residual(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.apply(x)?).norm())
    }
}

pub fn step_operator_apply(t: &StepOperator, x: &Vector) -> Result<Vector> {
    t.apply(x)
}

pub fn vip_residual(t: &StepOperator, x: &Vector) -> Result<f64> {
    t.residual(x)
}

/// Tolerance on nonexpansiveness margins.
pub const NONEXPANSIVE_TOL: f64 = 1e-10;
/// Complement-ism ratios must exceed `1/2 - COMPLEMENT_RATIO_TOL`.
pub const COMPLEMENT_RATIO_TOL: f64 = 1e-8;
/// Below this squared complement difference the ratio is not reported.
pub const COMPLEMENT_DENOM_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCheck {
    /// `||x - y|| - ||Tx - Ty||`.
    pub nonexpansive_margin: f64,
    /// `<Gx - Gy, x - y> / ||Gx - Gy||^2` for `G = I - T`, when defined.
    pub complement_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub rows: Vec<PairCheck>,
    /// False when the operator's constant was asserted, not certified.
    pub certified: bool,
}

impl ClassReport {
    pub fn min_margin(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.nonexpansive_margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_ratio(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.complement_ratio)
            .reduce(f64::min)
    }

    pub fn is_nonexpansive(&self) -> bool {
        self.min_margin() >= -NONEXPANSIVE_TOL
    }

    pub fn is_averaged(&self) -> bool {
        self.is_nonexpansive()
            && self
                .min_ratio()
                .is_none_or(|r| r > 0.5 - COMPLEMENT_RATIO_TOL)
    }
}

/// Sampled check that `T` is nonexpansive and that `I - T` is `nu`-ism with
/// `nu > 1/2`, the observable signature of an averaged operator.
pub fn check_operator_class(t: &StepOperator, pairs: &[(Vector, Vector)]) -> Result<ClassReport> {
    let mut rows = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let tx = t.apply(x)?;
        let ty = t.apply(y)?;
        let dx = x - y;
        let nonexpansive_margin = dx.norm() - (&tx - &ty).norm();
        let dg = (x - tx) - (y - ty);
        let denom = dg.norm_squared();
        let complement_ratio = (denom > COMPLEMENT_DENOM_MIN).then(|| dg.dot(&dx) / denom);
        rows.push(PairCheck {
            nonexpansive_margin,
            complement_ratio,
        });
    }
    Ok(ClassReport {
        rows,
        certified: t.op.is_certified(),
    })
}
