use nalgebra::DMatrix;

use crate::{check_dim, check_finite, Error, Result, Vector};

/// `{x : ⟨a_j, x⟩ ≤ b_j ∀j}`, used as an exact description of solution sets
/// on instances where it is known analytically.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    normals: Vec<Vector>,
    offsets: Vec<f64>,
}

impl Polyhedron {
    pub fn new(normals: Vec<Vector>, offsets: Vec<f64>) -> Result<Self> {
        check_dim(normals.len(), offsets.len())?;
        let first = normals
            .first()
            .ok_or_else(|| Error::InvalidSet("polyhedron needs at least one inequality".into()))?;
        for a in &normals {
            check_dim(first.len(), a.len())?;
            check_finite(a.as_slice(), "polyhedron normal")?;
        }
        check_finite(&offsets, "polyhedron offset")?;
        Ok(Self { normals, offsets })
    }

    pub fn dim(&self) -> usize {
        self.normals[0].len()
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.normals.iter().zip(&self.offsets).all(|(a, b)| a.dot(x) <= b + tol)
    }

    /// Exact Euclidean projection by enumeration of active sets.
    ///
    /// The projection is the foot of `x` on the affine hull of some face, cut
    /// out by a linearly independent subset of at most `n` inequalities taken
    /// as equalities. Every candidate foot that is feasible is an upper bound,
    /// and the true projection is among them, so the closest feasible
    /// candidate is exact. Cost is `Σ_{k ≤ n} C(m, k)` small solves.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        if self.contains(x, 0.0) {
            return Ok(x.clone());
        }
        let n = self.dim();
        let m = self.normals.len();
        let scale = 1.0 + x.amax() + self.offsets.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut best: Option<(f64, Vector)> = None;
        let mut subset: Vec<usize> = Vec::new();
        for size in 1..=n.min(m) {
            subset.clear();
            subset.extend(0..size);
            loop {
                if let Some(foot) = self.foot(x, &subset) {
                    if self.contains(&foot, 1e-10 * scale) {
                        let d = (&foot - x).norm();
                        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                            best = Some((d, foot));
                        }
                    }
                }
                if !next_combination(&mut subset, m) {
                    break;
                }
            }
        }
        best.map(|(_, p)| p)
            .ok_or_else(|| Error::InvalidSet("polyhedron appears to be empty".into()))
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((self.project(x)? - x).norm())
    }

    /// Foot of `x` on `{y : ⟨a_j, y⟩ = b_j, j ∈ subset}`; `None` when the
    /// rows are linearly dependent.
    fn foot(&self, x: &Vector, subset: &[usize]) -> Option<Vector> {
        let n = self.dim();
        let k = subset.len();
        let mut a = DMatrix::zeros(k, n);
        let mut r = Vector::zeros(k);
        for (row, &j) in subset.iter().enumerate() {
            a.set_row(row, &self.normals[j].transpose());
            r[row] = self.normals[j].dot(x) - self.offsets[j];
        }
        let gram = &a * a.transpose();
        let chol = gram.clone().cholesky()?;
        let smallest = gram.diagonal().min();
        if smallest <= 0.0 {
            return None;
        }
        // reject nearly dependent rows
        let det = chol.determinant();
        let diag_prod: f64 = gram.diagonal().iter().product();
        if det <= 1e-12 * diag_prod {
            return None;
        }
        let mult = chol.solve(&r);
        Some(x - a.transpose() * mult)
    }
}

fn next_combination(subset: &mut [usize], m: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < m - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
