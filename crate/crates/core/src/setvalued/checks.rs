//! Empirical checkers for the standing hypotheses on `F`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SetMap;
use crate::convex::{sphere_sample, unit};
use crate::{check_dim, Error, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityWitness {
    pub x1: Vector,
    pub x2: Vector,
    pub t: f64,
    pub direction: Vector,
    /// `σ(b*, F(t x₁ + (1−t) x₂)) − [t σ(b*, F(x₁)) + (1−t) σ(b*, F(x₂))]`.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    pub passed: bool,
    pub checks: usize,
    /// Triple and direction with the largest violation seen.
    pub worst: Option<ConcavityWitness>,
}

/// Violation of the support-function form of the concavity inclusion at one
/// triple and dual direction; positive values falsify concavity.
pub fn concavity_violation(map: &SetMap, x1: &Vector, x2: &Vector, t: f64, direction: &Vector) -> Result<f64> {
    let mid = x1 * t + x2 * (1.0 - t);
    let lhs = map.support_map(&mid, direction)?;
    let rhs = t * map.support_map(x1, direction)? + (1.0 - t) * map.support_map(x2, direction)?;
    Ok(lhs - rhs)
}

/// Samples triples `(x₁, x₂, t)` in a box and dual directions, and tests
/// `σ(b*, F(mid)) ≤ t σ(b*, F(x₁)) + (1−t) σ(b*, F(x₂)) + tol`.
///
/// The probe set always starts with the box diagonal `(lower, upper)` at
/// `t ∈ {1/4, 1/2, 3/4}` and the signed coordinate directions, followed by
/// `n_samples` random triples and `n_directions` random unit directions.
pub fn check_concavity(
    map: &SetMap,
    lower: &Vector,
    upper: &Vector,
    n_samples: usize,
    n_directions: usize,
    seed: u64,
    tol: f64,
) -> Result<ConcavityReport> {
    let n = map.domain_dim();
    let m = map.codomain_dim();
    check_dim(n, lower.len())?;
    check_dim(n, upper.len())?;

    let mut directions: Vec<Vector> = Vec::with_capacity(2 * m + n_directions);
    for i in 0..m {
        directions.push(unit(m, i, 1.0));
        directions.push(unit(m, i, -1.0));
    }
    directions.extend(sphere_sample(m, n_directions, seed, None)?);

    let mut triples: Vec<(Vector, Vector, f64)> =
        [0.25, 0.5, 0.75].iter().map(|&t| (lower.clone(), upper.clone(), t)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    for _ in 0..n_samples {
        let a = uniform_in_box(&mut rng, lower, upper);
        let b = uniform_in_box(&mut rng, lower, upper);
        triples.push((a, b, rng.random::<f64>()));
    }

    let mut worst: Option<ConcavityWitness> = None;
    let mut checks = 0;
    for (x1, x2, t) in &triples {
        for d in &directions {
            let violation = concavity_violation(map, x1, x2, *t, d)?;
            checks += 1;
            if worst.as_ref().is_none_or(|w| violation > w.violation) {
                worst = Some(ConcavityWitness {
                    x1: x1.clone(),
                    x2: x2.clone(),
                    t: *t,
                    direction: d.clone(),
                    violation,
                });
            }
        }
    }
    let passed = worst.as_ref().is_none_or(|w| w.violation <= tol);
    Ok(ConcavityReport { passed, checks, worst })
}

pub(crate) fn uniform_in_box<R: Rng>(rng: &mut R, lower: &Vector, upper: &Vector) -> Vector {
    Vector::from_iterator(
        lower.len(),
        lower.iter().zip(upper.iter()).map(|(l, u)| l + (u - l) * rng.random::<f64>()),
    )
}

/// `max ‖y‖` over `y ∈ F(x)` and `x` on a regular grid of the box with
/// `points_per_axis` nodes per coordinate (endpoints included).
///
/// A finite value certifies that `F(x) ⊆ κ·B` on the probed region.
pub fn check_bounded(map: &SetMap, lower: &Vector, upper: &Vector, points_per_axis: usize) -> Result<f64> {
    let n = map.domain_dim();
    check_dim(n, lower.len())?;
    check_dim(n, upper.len())?;
    if points_per_axis < 2 {
        return Err(Error::InvalidProblem("grid needs at least two points per axis".into()));
    }
    let mut kappa: f64 = 0.0;
    let mut index = vec![0usize; n];
    loop {
        let x = Vector::from_iterator(
            n,
            index.iter().enumerate().map(|(i, &k)| {
                lower[i] + (upper[i] - lower[i]) * k as f64 / (points_per_axis - 1) as f64
            }),
        );
        kappa = kappa.max(map.max_norm_at(&x)?);
        // odometer increment over the grid
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(kappa);
            }
            index[axis] += 1;
            if index[axis] < points_per_axis {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}
