//! Reference solvers that share no iteration logic with [`crate::solvers`].
//!
//! * [`extragradient_solve`] -- Korpelevich's double-projection method for a
//!   single variational inequality.
//! * [`subspace_intersection_projection`] -- nearest point of the
//!   intersection of two affine subspaces from one direct factorization of
//!   the stacked system.
//! * [`grid_search_vip`] -- exhaustive residual minimization on a grid, for
//!   dimension at most 3.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::geometry::ConvexSet;
use crate::operators::{validate_step, IsmOperator, StepOperator};
use crate::{check_dim, check_vector, Error, Matrix, Result, Vector};

/// Refuse grids with more points than this.
pub const GRID_POINT_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Extragradient,
    AnalyticSubspace,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub point: Vector,
    pub certified_residual: f64,
    pub method: OracleMethod,
    pub iterations: usize,
}

/// Extragradient iteration `y = P(x - lambda h(x))`, `x+ = P(x - lambda h(y))`
/// until the residual `||x - P(x - lambda h(x))||` drops to `tol`.
///
/// Requires `lambda < alpha` (so `lambda` is below the inverse Lipschitz
/// constant `alpha` that an `alpha`-ism operator carries).
pub fn extragradient_solve(
    set: &ConvexSet,
    op: &IsmOperator,
    lambda: f64,
    x0: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<OracleResult> {
    if !(lambda > 0.0) || lambda >= op.alpha() {
        return Err(Error::StepOutOfRange {
            lambda,
            upper: op.alpha(),
        });
    }
    check_vector(x0, "x0")?;
    check_dim(set.dim(), x0)?;
    let step = validate_step(Some(lambda), &[op.alpha()])?;
    let t = StepOperator::new(set.clone(), op.clone(), step)?;

    let mut x = x0.clone();
    let mut residual = t.residual(&x)?;
    for iterations in 0..max_iter {
        if residual <= tol {
            return Ok(OracleResult {
                point: x,
                certified_residual: residual,
                method: OracleMethod::Extragradient,
                iterations,
            });
        }
        let y = set.project(&(&x - op.apply(&x)? * lambda))?;
        x = set.project(&(&x - op.apply(&y)? * lambda))?;
        if x.iter().any(|e| !e.is_finite()) {
            break;
        }
        residual = t.residual(&x)?;
    }
    if residual <= tol {
        return Ok(OracleResult {
            point: x,
            certified_residual: residual,
            method: OracleMethod::Extragradient,
            iterations: max_iter,
        });
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual,
    })
}

/// Exact nearest point of `A1 ∩ A2` to `x`.
///
/// Stacks both systems into `A y = b`, diagonalizes `A^T A` once, and
/// returns `p + N N^T (x - p)` with `p` the minimum-norm solution and `N` an
/// orthonormal null-space basis.
pub fn subspace_intersection_projection(
    first: &ConvexSet,
    second: &ConvexSet,
    x: &Vector,
) -> Result<OracleResult> {
    let (a1, a2) = match (first, second) {
        (ConvexSet::AffineSubspace(a1), ConvexSet::AffineSubspace(a2)) => (a1, a2),
        _ => {
            return Err(Error::Schema(
                "subspace oracle needs two affine subspaces".into(),
            ))
        }
    };
    let n = a1.matrix().ncols();
    if a2.matrix().ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a2.matrix().ncols(),
        });
    }
    check_dim(n, x)?;

    let (m1, m2) = (a1.matrix().nrows(), a2.matrix().nrows());
    let mut stacked = Matrix::zeros(m1 + m2, n);
    stacked.rows_mut(0, m1).copy_from(a1.matrix());
    stacked.rows_mut(m1, m2).copy_from(a2.matrix());
    let mut rhs = Vector::zeros(m1 + m2);
    rhs.rows_mut(0, m1).copy_from(a1.rhs());
    rhs.rows_mut(m1, m2).copy_from(a2.rhs());

    let normal = stacked.transpose() * &stacked;
    let eig = SymmetricEigen::new(normal);
    let cut = eig.eigenvalues.amax() * 1e-10;
    let at_b = stacked.transpose() * &rhs;

    let mut particular = Vector::zeros(n);
    let mut null_cols = Vec::new();
    for i in 0..n {
        let v = eig.eigenvectors.column(i);
        if eig.eigenvalues[i] > cut {
            particular += v * (v.dot(&at_b) / eig.eigenvalues[i]);
        } else {
            null_cols.push(v.into_owned());
        }
    }
    let residual = (&stacked * &particular - &rhs).norm();
    if residual > 1e-9 * (1.0 + rhs.norm()) {
        return Err(Error::InconsistentSystem { residual });
    }

    let offset = x - &particular;
    let mut point = particular;
    for v in &null_cols {
        point += v * v.dot(&offset);
    }
    let certified_residual = (&stacked * &point - &rhs).norm();
    Ok(OracleResult {
        point,
        certified_residual,
        method: OracleMethod::AnalyticSubspace,
        iterations: 0,
    })
}

/// Grid point inside `set` with the smallest residual
/// `||x - P(x - lambda h(x))||`, ties going to the lexicographically
/// smallest point.
///
/// Grid nodes are `lower + i * resolution` within `[lower, upper]`; `lambda`
/// is `alpha` for operators with a finite constant and 1 otherwise.
pub fn grid_search_vip(
    set: &ConvexSet,
    op: &IsmOperator,
    lower: &Vector,
    upper: &Vector,
    resolution: f64,
) -> Result<OracleResult> {
    let dim = set.dim();
    if dim > 3 {
        return Err(Error::GridDimension(dim));
    }
    check_dim(dim, lower)?;
    check_dim(dim, upper)?;
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::InvalidGrid(format!("resolution {resolution}")));
    }
    let mut counts = Vec::with_capacity(dim);
    for i in 0..dim {
        let span = upper[i] - lower[i];
        if !(span >= 0.0) || !span.is_finite() {
            return Err(Error::InvalidGrid(format!("bounds inverted at index {i}")));
        }
        counts.push((span / resolution + 1e-9).floor() as usize + 1);
    }
    let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
    if total.is_none_or(|t| t > GRID_POINT_LIMIT) {
        return Err(Error::InvalidGrid("too many grid points".into()));
    }

    let lambda = if op.alpha().is_finite() { op.alpha() } else { 1.0 };
    let step = validate_step(Some(lambda), &[op.alpha()])?;
    let t = StepOperator::new(set.clone(), op.clone(), step)?;

    let mut best: Option<(f64, Vector)> = None;
    let mut index = vec![0usize; dim];
    let mut visited = 0;
    'outer: loop {
        let p = Vector::from_fn(dim, |i, _| lower[i] + index[i] as f64 * resolution);
        if set.distance(&p)? <= 1e-12 {
            let r = t.residual(&p)?;
            if best.as_ref().is_none_or(|(b, _)| r < *b) {
                best = Some((r, p));
            }
        }
        visited += 1;
        // Odometer increment, last coordinate fastest.
        let mut axis = dim;
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            index[axis] += 1;
            if index[axis] < counts[axis] {
                break;
            }
            index[axis] = 0;
        }
    }
    debug_assert_eq!(Some(visited), total);
    let (certified_residual, point) = best.ok_or(Error::NoGridPoint)?;
    Ok(OracleResult {
        point,
        certified_residual,
        method: OracleMethod::Grid,
        iterations: visited,
    })
}
