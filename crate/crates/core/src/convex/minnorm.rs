//! Wolfe's minimum-norm-point algorithm for convex hulls of finite point sets.

use nalgebra::DMatrix;

use crate::{check_dim, Error, Result, Vector};

/// Default relative tolerance on the Wolfe duality gap.
pub const DEFAULT_TOL_MNP: f64 = 1e-12;

const WEIGHT_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormResult {
    /// `Σ coefficients[i] · points[i]`.
    pub point: Vector,
    pub norm: f64,
    /// Convex weights over the input points.
    pub coefficients: Vec<f64>,
    /// `‖x‖² − min_i ⟨x, p_i⟩` at the returned point.
    pub gap: f64,
    /// `max_i ‖p_i‖²`, the scale the gap tolerance is relative to.
    pub scale: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub(crate) fn default_max_iter(n_points: usize) -> usize {
    1000 + 20 * n_points
}

/// Minimum-norm element of `conv(points)` with default tolerances.
pub fn min_norm_point(points: &[Vector]) -> Result<MinNormResult> {
    min_norm_point_with(points, DEFAULT_TOL_MNP, default_max_iter(points.len()))
}

/// Minimum-norm element of `conv(points)`.
///
/// Terminates once the duality gap is at most `tol · max_i ‖p_i‖²`. When the
/// iteration cap is hit first, [`Error::MinNormNotConverged`] reports the gap
/// of the best point found.
pub fn min_norm_point_with(points: &[Vector], tol: f64, max_iter: usize) -> Result<MinNormResult> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidSet("min-norm point of an empty list".into()))?;
    for p in points {
        check_dim(first.len(), p.len())?;
    }
    let res = wolfe(points, tol, max_iter);
    if res.converged {
        Ok(res)
    } else {
        Err(Error::MinNormNotConverged { gap: res.gap })
    }
}

/// Core iteration; assumes a nonempty list of equal-length vectors.
pub(crate) fn wolfe(points: &[Vector], tol: f64, max_iter: usize) -> MinNormResult {
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max);
    let threshold = tol * scale;

    let start = (0..points.len())
        .min_by(|&i, &j| points[i].norm_squared().total_cmp(&points[j].norm_squared()))
        .unwrap_or(0);
    let mut active = vec![start];
    let mut weights = vec![1.0];
    let mut x = points[start].clone();
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let (j, min_dot) = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, x.dot(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        gap = (x.norm_squared() - min_dot).max(0.0);
        if gap <= threshold || active.contains(&j) {
            converged = gap <= threshold.max(64.0 * f64::EPSILON * scale);
            break;
        }
        active.push(j);
        weights.push(0.0);

        loop {
            let alpha = affine_minimizer(points, &active);
            if alpha.iter().all(|&a| a > WEIGHT_EPS) {
                weights = alpha;
                break;
            }
            // step from the current weights towards alpha until one weight hits zero
            let theta = weights
                .iter()
                .zip(&alpha)
                .filter(|(_, &a)| a <= WEIGHT_EPS)
                .map(|(&w, &a)| if w - a > 0.0 { w / (w - a) } else { 0.0 })
                .fold(1.0, f64::min);
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = (1.0 - theta) * *w + theta * a;
            }
            let mut k = 0;
            let mut removed = false;
            while k < active.len() {
                if weights[k] <= WEIGHT_EPS && active.len() > 1 {
                    active.remove(k);
                    weights.remove(k);
                    removed = true;
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            if !removed || active.len() == 1 {
                break;
            }
        }
        if !active.contains(&j) {
            // the entering point was dropped again: no further descent is possible numerically
            converged = gap <= threshold.max(1e-10 * scale);
            break;
        }
        x = combine(points, &active, &weights);
    }

    let mut coefficients = vec![0.0; points.len()];
    for (&i, &w) in active.iter().zip(&weights) {
        coefficients[i] += w;
    }
    MinNormResult {
        norm: x.norm(),
        point: x,
        coefficients,
        gap,
        scale,
        converged,
        iterations,
    }
}

fn combine(points: &[Vector], active: &[usize], weights: &[f64]) -> Vector {
    let mut x = Vector::zeros(points[0].len());
    for (&i, &w) in active.iter().zip(weights) {
        x.axpy(w, &points[i], 1.0);
    }
    x
}

/// Weights summing to one that minimize `‖Σ α_i p_i‖` over the affine hull of
/// the active points, computed by least squares in the coordinates
/// `x = p_0 + Σ β_i (p_i − p_0)`.
fn affine_minimizer(points: &[Vector], active: &[usize]) -> Vec<f64> {
    let base = &points[active[0]];
    if active.len() == 1 {
        return vec![1.0];
    }
    let dim = base.len();
    let cols = active.len() - 1;
    let mut b = DMatrix::zeros(dim, cols);
    for (c, &i) in active[1..].iter().enumerate() {
        b.set_column(c, &(&points[i] - base));
    }
    let svd = b.svd(true, true);
    let rhs = -base;
    let beta = svd
        .solve(&rhs, 1e-13 * svd.singular_values.max().max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| Vector::zeros(cols));
    let mut alpha = Vec::with_capacity(active.len());
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter().copied());
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn examples() {
        let r = min_norm_point(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert!((r.point.clone() - v(&[0.5, 0.5])).norm() < 1e-12);
        assert!((r.norm - 0.5f64.sqrt()).abs() < 1e-12);

        let r = min_norm_point(&[v(&[2.0]), v(&[3.0])]).unwrap();
        assert_eq!(r.point, v(&[2.0]));
        assert_eq!(r.coefficients, vec![1.0, 0.0]);

        let r = min_norm_point(&[v(&[1.0, 1.0]), v(&[-1.0, 1.0])]).unwrap();
        assert!((r.point.clone() - v(&[0.0, 1.0])).norm() < 1e-12);
        assert!((r.coefficients[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn origin_inside_hull() {
        let pts = [v(&[1.0, 0.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0])];
        let r = min_norm_point(&pts).unwrap();
        assert!(r.norm < 1e-9);
        let s: f64 = r.coefficients.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_and_collinear_points() {
        let pts = [v(&[1.0, 1.0]), v(&[1.0, 1.0]), v(&[2.0, 2.0]), v(&[3.0, 3.0])];
        let r = min_norm_point(&pts).unwrap();
        assert!((r.point - v(&[1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_gap() {
        let pts = [v(&[1.0, -1.0]), v(&[2.0, 0.5]), v(&[1.0, 1.5]), v(&[3.0, -2.0])];
        assert!(min_norm_point(&pts).unwrap().iterations > 1);
        match min_norm_point_with(&pts, 0.0, 1) {
            Err(Error::MinNormNotConverged { gap }) => assert!(gap > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(min_norm_point(&[]).is_err());
    }
}
