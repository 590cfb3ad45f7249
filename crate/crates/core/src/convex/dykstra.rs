//! Dykstra's alternating projections onto intersections of halfspaces.

use nalgebra::DMatrix;

use crate::{check_dim, Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    /// Stop once a full sweep moves the iterate by less than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Every 20 sweeps, and before giving up, try the exact projection onto
    /// the constraints Dykstra currently treats as active, and accept it if
    /// it satisfies the optimality conditions.
    pub polish: bool,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100_000, polish: true }
    }
}

/// Projects `point` onto `{y : ⟨a_j, y⟩ ≤ b_j ∀j}` with Dykstra's algorithm.
///
/// The intersection must be nonempty.
pub fn project_halfspaces(
    normals: &[Vector],
    offsets: &[f64],
    point: &Vector,
    opts: &ProjectionOptions,
) -> Result<Vector> {
    check_dim(normals.len(), offsets.len())?;
    for a in normals {
        check_dim(point.len(), a.len())?;
    }
    let violated = |y: &Vector| normals.iter().zip(offsets).any(|(a, b)| a.dot(y) > *b);
    if !violated(point) {
        return Ok(point.clone());
    }
    let sq: Vec<f64> = normals.iter().map(|a| a.norm_squared()).collect();
    let mut x = point.clone();
    let mut increments = vec![Vector::zeros(point.len()); normals.len()];
    let mut residual = f64::INFINITY;
    for sweep in 0..opts.max_iter {
        let prev = x.clone();
        for (j, a) in normals.iter().enumerate() {
            let z = &x + &increments[j];
            let excess = a.dot(&z) - offsets[j];
            x = if excess > 0.0 { &z - a * (excess / sq[j]) } else { z.clone() };
            increments[j] = z - &x;
        }
        residual = (&x - prev).norm();
        if residual < opts.tol {
            return Ok(x);
        }
        if opts.polish && sweep % 20 == 19 {
            if let Some(y) = polish(normals, offsets, point, &increments) {
                return Ok(y);
            }
        }
    }
    if opts.polish {
        if let Some(y) = polish(normals, offsets, point, &increments) {
            return Ok(y);
        }
    }
    Err(Error::ProjectionNotConverged { residual })
}

/// Exact projection onto the equality set of the constraints with nonzero
/// Dykstra increments, returned only if it is feasible and its multipliers
/// are nonnegative.
fn polish(normals: &[Vector], offsets: &[f64], point: &Vector, increments: &[Vector]) -> Option<Vector> {
    let active: Vec<usize> = (0..normals.len()).filter(|&j| increments[j].amax() > 0.0).collect();
    if active.is_empty() {
        return None;
    }
    let n = point.len();
    let mut a = DMatrix::zeros(active.len(), n);
    let mut r = Vector::zeros(active.len());
    for (row, &j) in active.iter().enumerate() {
        a.set_row(row, &normals[j].transpose());
        r[row] = normals[j].dot(point) - offsets[j];
    }
    let gram = &a * a.transpose();
    let mult = gram.svd(true, true).solve(&r, 1e-12).ok()?;
    let scale = 1.0 + point.amax() + offsets.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let lscale = 1.0 + mult.amax();
    if mult.iter().any(|l| *l < -1e-12 * lscale) {
        return None;
    }
    let y = point - a.transpose() * mult;
    let feasible = normals.iter().zip(offsets).all(|(a, b)| a.dot(&y) <= b + 1e-12 * scale);
    let tight = active.iter().all(|&j| (normals[j].dot(&y) - offsets[j]).abs() <= 1e-10 * scale);
    (feasible && tight).then_some(y)
}
