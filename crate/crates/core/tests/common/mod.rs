#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use setinc_core::setvalued::AffineGenerator;
use setinc_core::{ConvexSet, Matrix, Mode, Problem, SetMap, Vector};

#[derive(Debug, Clone, Copy)]
pub enum TargetKind {
    Ball,
    Polytope,
    Orthant,
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)))
}

pub fn gaussian_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Random affine fan `conv{A_i x + b_i}` with a random target of the given
/// kind; orthant targets get linear generators and cone mode.
pub fn random_fan_problem(seed: u64, n: usize, m: usize, k: usize, kind: TargetKind) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let linear = matches!(kind, TargetKind::Orthant);
    let gens = (0..k)
        .map(|_| {
            let a = gaussian_mat(&mut rng, m, n);
            let b = if linear { Vector::zeros(m) } else { gaussian_vec(&mut rng, m) };
            AffineGenerator::new(a, b)
        })
        .collect();
    let map = SetMap::affine_fan(gens).unwrap();
    let (target, mode) = match kind {
        TargetKind::Ball => {
            let c = gaussian_vec(&mut rng, m) * 0.5;
            (ConvexSet::ball(c, rng.random_range(0.5..2.0)).unwrap(), Mode::Bounded)
        }
        TargetKind::Polytope => {
            let count = rng.random_range(1..=m + 3);
            let verts = (0..count).map(|_| gaussian_vec(&mut rng, m)).collect();
            (ConvexSet::vpolytope(verts).unwrap(), Mode::Bounded)
        }
        TargetKind::Orthant => {
            let cone = if rng.random::<bool>() {
                ConvexSet::nonpositive_orthant(m)
            } else {
                ConvexSet::nonnegative_orthant(m)
            };
            (cone.unwrap(), Mode::Cone)
        }
    };
    Problem::new(map, target, mode).unwrap()
}

pub fn kind_of(index: usize) -> TargetKind {
    [TargetKind::Ball, TargetKind::Polytope, TargetKind::Orthant][index % 3]
}

pub fn v(x: &[f64]) -> Vector {
    Vector::from_column_slice(x)
}
