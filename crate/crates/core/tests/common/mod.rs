#![allow(dead_code)]

use std::path::PathBuf;

use csvip_core::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-scale..scale))
}

pub fn rand_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn skew(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = rand_mat(rng, n, n);
    (&a - a.transpose()) * 0.5
}

/// `B (I + K) B^T` with `B` of rank at most `rank`: PSD symmetric part, and
/// the skew part lives on the same range, so the map is ism but possibly
/// singular.
pub fn ism_matrix(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> Matrix {
    let b = rand_mat(rng, n, rank);
    let core = Matrix::identity(rank, rank) + skew(rng, rank);
    &b * core * b.transpose()
}

/// `A A^T + c I + K`: symmetric part bounded below by `c`.
pub fn strongly_monotone(rng: &mut ChaCha8Rng, n: usize, c: f64) -> Matrix {
    let a = rand_mat(rng, n, n) * 0.5;
    &a * a.transpose() + Matrix::identity(n, n) * c + skew(rng, n) * 0.5
}

/// Operator `x -> M (x - z)`, which vanishes at `z`.
pub fn zero_at(matrix: Matrix, z: &Vector) -> IsmOperator {
    let shift = -(&matrix * z);
    IsmOperator::affine(matrix, shift).unwrap()
}

/// A box, ball or halfspace containing `z`, sometimes with `z` on its
/// boundary.
pub fn set_containing(rng: &mut ChaCha8Rng, z: &Vector) -> ConvexSet {
    let n = z.len();
    let on_boundary = rng.random_bool(0.3);
    match rng.random_range(0..3) {
        0 => {
            let mut lo = Vector::from_fn(n, |i, _| z[i] - rng.random_range(0.1..2.0));
            let hi = Vector::from_fn(n, |i, _| z[i] + rng.random_range(0.1..2.0));
            if on_boundary {
                lo[0] = z[0];
            }
            ConvexSet::boxed(lo, hi).unwrap()
        }
        1 => {
            let center = z + rand_vec(rng, n, 1.0);
            let gap = (z - &center).norm();
            let radius = if on_boundary {
                gap
            } else {
                gap + rng.random_range(0.1..1.0)
            };
            ConvexSet::ball(center, radius.max(1e-3)).unwrap()
        }
        _ => {
            let mut normal = rand_vec(rng, n, 1.0);
            if normal.norm() < 1e-3 {
                normal[0] = 1.0;
            }
            let slack = if on_boundary {
                0.0
            } else {
                rng.random_range(0.0..1.0)
            };
            let offset = normal.dot(z) + slack;
            ConvexSet::halfspace(normal, offset).unwrap()
        }
    }
}

/// Any of the set families, in dimension `n`.
pub fn any_set(rng: &mut ChaCha8Rng, n: usize) -> ConvexSet {
    let anchor = rand_vec(rng, n, 2.0);
    match rng.random_range(0..8) {
        0..=2 => set_containing(rng, &anchor),
        3 => {
            let normal = rand_vec(rng, n, 1.0) + Vector::from_element(n, 0.1);
            let offset = rng.random_range(-1.0..1.0);
            ConvexSet::hyperplane(normal, offset).unwrap()
        }
        4 => {
            let rows = rng.random_range(1..=n);
            let a = rand_mat(rng, rows, n);
            let b = &a * &anchor;
            ConvexSet::affine_subspace(a, b).unwrap()
        }
        5 => ConvexSet::simplex(n).unwrap(),
        6 => ConvexSet::whole_space(n).unwrap(),
        _ => {
            let first = set_containing(rng, &anchor);
            let second = set_containing(rng, &anchor);
            ConvexSet::intersection(vec![first, second]).unwrap()
        }
    }
}

pub fn is_intersection(set: &ConvexSet) -> bool {
    matches!(set, ConvexSet::Intersection(_))
}

/// Projection accuracy to expect: exact formulas are good to rounding,
/// Dykstra only to its stopping tolerance.
pub fn projection_tol(set: &ConvexSet, exact: f64) -> f64 {
    if is_intersection(set) {
        csvip_core::geometry::INTERSECTION_TOL * 10.0
    } else {
        exact
    }
}

pub fn dist(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm()
}
