//! Closed convex sets in `R^n` and their metric projections.
//!
//! Every set exposes the nearest-point map `P_D`. For all variants except
//! [`ConvexSet::Intersection`] the projection is exact (closed form or a
//! finite algorithm). Intersections are projected with Dykstra's correction
//! scheme, which converges to the nearest point of the intersection and not
//! merely to some point of it.

use nalgebra::SVD;

use crate::{check_dim, check_vector, Error, Matrix, Result, Vector};

/// Default tolerance for intersection projections.
pub const INTERSECTION_TOL: f64 = 1e-10;
/// Default sweep budget for intersection projections.
pub const INTERSECTION_MAX_ITER: usize = 100_000;

/// `{x : <normal, x> <= offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let normal_sq = checked_normal(&normal, offset)?;
        Ok(Self {
            normal,
            offset,
            normal_sq,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn project(&self, x: &Vector) -> Vector {
        let excess = self.normal.dot(x) - self.offset;
        if excess <= 0.0 {
            x.clone()
        } else {
            x - &self.normal * (excess / self.normal_sq)
        }
    }
}

/// `{x : <normal, x> = offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let normal_sq = checked_normal(&normal, offset)?;
        Ok(Self {
            normal,
            offset,
            normal_sq,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn project(&self, x: &Vector) -> Vector {
        let gap = self.normal.dot(x) - self.offset;
        x - &self.normal * (gap / self.normal_sq)
    }
}

fn checked_normal(normal: &Vector, offset: f64) -> Result<f64> {
    check_vector(normal, "normal")?;
    if !offset.is_finite() {
        return Err(Error::NonFinite("offset"));
    }
    let normal_sq = normal.norm_squared();
    if normal_sq == 0.0 {
        return Err(Error::ZeroNormal);
    }
    Ok(normal_sq)
}

/// Axis-aligned box `{x : lower <= x <= upper}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Vector,
    upper: Vector,
}

impl BoxSet {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        check_vector(&lower, "box lower bound")?;
        check_vector(&upper, "box upper bound")?;
        check_dim(lower.len(), &upper)?;
        if let Some(index) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::InvertedBox { index });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    fn project(&self, x: &Vector) -> Vector {
        Vector::from_iterator(
            x.len(),
            x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .map(|(&v, (&lo, &hi))| v.clamp(lo, hi)),
        )
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vector,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        check_vector(&center, "ball center")?;
        if !radius.is_finite() {
            return Err(Error::NonFinite("radius"));
        }
        if radius <= 0.0 {
            return Err(Error::NonPositiveRadius(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn project(&self, x: &Vector) -> Vector {
        let offset = x - &self.center;
        let dist = offset.norm();
        if dist <= self.radius {
            x.clone()
        } else {
            &self.center + offset * (self.radius / dist)
        }
    }
}

/// Solution set `{x : A x = b}` of a consistent linear system.
///
/// The pseudo-inverse of `A` is computed once at construction from an SVD
/// with a relative rank cutoff, so rank-deficient systems project onto the
/// minimum-norm correction `x - A^+(Ax - b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    matrix: Matrix,
    rhs: Vector,
    pinv: Matrix,
}

impl AffineSubspace {
    pub fn new(matrix: Matrix, rhs: Vector) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::EmptyVector);
        }
        if matrix.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("constraint matrix"));
        }
        check_vector(&rhs, "rhs")?;
        check_dim(matrix.nrows(), &rhs)?;

        let svd = SVD::new(matrix.clone(), true, true);
        let sigma_max = svd.singular_values.max();
        let cutoff = sigma_max * f64::EPSILON * matrix.nrows().max(matrix.ncols()) as f64 * 16.0;
        let pinv = svd
            .pseudo_inverse(cutoff)
            .map_err(|e| Error::Schema(e.to_string()))?;

        let residual = (&matrix * (&pinv * &rhs) - &rhs).norm();
        if residual > 1e-9 * (1.0 + rhs.norm()) {
            return Err(Error::InconsistentSystem { residual });
        }
        Ok(Self { matrix, rhs, pinv })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &Vector {
        &self.rhs
    }

    fn project(&self, x: &Vector) -> Vector {
        let gap = &self.matrix * x - &self.rhs;
        x - &self.pinv * gap
    }
}

/// Nonempty intersection of sets sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Intersection {
    members: Vec<ConvexSet>,
    dim: usize,
}

impl Intersection {
    pub fn new(members: Vec<ConvexSet>) -> Result<Self> {
        let dim = members.first().ok_or(Error::EmptyIntersection)?.dim();
        if let Some(bad) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { members, dim })
    }

    pub fn members(&self) -> &[ConvexSet] {
        &self.members
    }
}

/// A closed convex set of `R^n` with a metric projection.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Halfspace(Halfspace),
    Hyperplane(Hyperplane),
    Box(BoxSet),
    Ball(Ball),
    AffineSubspace(AffineSubspace),
    /// Unit standard simplex `{x >= 0, sum x = 1}`.
    Simplex { dim: usize },
    WholeSpace { dim: usize },
    Intersection(Intersection),
}

impl ConvexSet {
    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        Halfspace::new(normal, offset).map(Self::Halfspace)
    }

    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        Hyperplane::new(normal, offset).map(Self::Hyperplane)
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        BoxSet::new(lower, upper).map(Self::Box)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        Ball::new(center, radius).map(Self::Ball)
    }

    pub fn affine_subspace(matrix: Matrix, rhs: Vector) -> Result<Self> {
        AffineSubspace::new(matrix, rhs).map(Self::AffineSubspace)
    }

    /// Linear span of the given columns, encoded as the null space of the
    /// orthogonal complement. An empty column list yields `{0}`.
    pub fn span(dim: usize, columns: &[Vector]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        for c in columns {
            check_vector(c, "spanning vector")?;
            check_dim(dim, c)?;
        }
        let complement = if columns.is_empty() {
            Matrix::identity(dim, dim)
        } else {
            let basis = Matrix::from_columns(columns);
            let svd = SVD::new(basis.clone(), true, false);
            let u = svd.u.expect("requested U");
            let rank_cut = svd.singular_values.max() * 1e-12;
            let rank = svd.singular_values.iter().filter(|&&s| s > rank_cut).count();
            // Project the identity off the column space; the remaining rows
            // span the orthogonal complement (possibly with redundancy).
            let range = u.columns(0, rank).into_owned();
            let proj_off = Matrix::identity(dim, dim) - &range * range.transpose();
            if rank == dim {
                return Ok(Self::WholeSpace { dim });
            }
            proj_off
        };
        Self::affine_subspace(complement, Vector::zeros(dim))
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self::Simplex { dim })
    }

    pub fn whole_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self::WholeSpace { dim })
    }

    pub fn intersection(members: Vec<ConvexSet>) -> Result<Self> {
        Intersection::new(members).map(Self::Intersection)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Halfspace(h) => h.normal.len(),
            Self::Hyperplane(h) => h.normal.len(),
            Self::Box(b) => b.lower.len(),
            Self::Ball(b) => b.center.len(),
            Self::AffineSubspace(a) => a.matrix.ncols(),
            Self::Simplex { dim } | Self::WholeSpace { dim } => *dim,
            Self::Intersection(i) => i.dim,
        }
    }

    /// Metric projection of `x`; see [`project`].
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x)?;
        Ok(match self {
            Self::Halfspace(h) => h.project(x),
            Self::Hyperplane(h) => h.project(x),
            Self::Box(b) => b.project(x),
            Self::Ball(b) => b.project(x),
            Self::AffineSubspace(a) => a.project(x),
            Self::Simplex { .. } => project_simplex(x),
            Self::WholeSpace { .. } => x.clone(),
            Self::Intersection(i) => {
                return project_intersection(
                    &i.members,
                    x,
                    INTERSECTION_TOL,
                    INTERSECTION_MAX_ITER,
                )
            }
        })
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }
}

/// Nearest point of `set` to `x`.
pub fn project(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    set.project(x)
}

/// Whether `x` lies within distance `tol` of `set`.
pub fn contains(set: &ConvexSet, x: &Vector, tol: f64) -> Result<bool> {
    Ok(set.distance(x)? <= tol)
}

/// Sort-and-threshold projection onto the unit simplex.
pub fn project_simplex(x: &Vector) -> Vector {
    let mut sorted: Vec<f64> = x.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.map(|v| (v - theta).max(0.0))
}

/// Dykstra's alternating projections with correction terms.
///
/// Sweeps the members in order until one full sweep moves both the iterate
/// and the correction terms by at most `tol` and the iterate is within `tol`
/// of every member. The iterate alone can sit still for a sweep while the
/// corrections are still far from settled. Exhausting
/// `max_iter` sweeps is reported as [`Error::NotConverged`].
pub fn project_intersection(
    members: &[ConvexSet],
    x: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<Vector> {
    let first = members.first().ok_or(Error::EmptyIntersection)?;
    check_dim(first.dim(), x)?;
    if members.len() == 1 {
        return first.project(x);
    }

    let mut y = x.clone();
    let mut corrections = vec![Vector::zeros(x.len()); members.len()];
    let mut worst = f64::INFINITY;
    for _ in 0..max_iter {
        let previous = y.clone();
        let mut drift = 0.0;
        for (set, correction) in members.iter().zip(corrections.iter_mut()) {
            let shifted = &y + &*correction;
            let p = set.project(&shifted)?;
            let updated = shifted - &p;
            drift += (&updated - &*correction).norm_squared();
            *correction = updated;
            y = p;
        }
        let moved = (&y - &previous).norm();
        if moved <= tol && drift.sqrt() <= tol {
            worst = 0.0;
            for set in members {
                worst = worst.max(set.distance(&y)?);
            }
            if worst <= tol {
                return Ok(y);
            }
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: worst,
    })
}
