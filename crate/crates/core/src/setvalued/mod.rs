//! Concave set-valued maps `F: ℝⁿ ⇉ ℝᵐ` with nonempty, bounded, closed,
//! convex values.
//!
//! A map is concave when `F(t x₁ + (1−t) x₂) ⊆ t F(x₁) + (1−t) F(x₂)`, which
//! is the same as convexity of `x ↦ σ(b*, F(x))` for every dual direction
//! `b*`. All leaf constructions below are concave, and concavity is preserved
//! by Minkowski sums, nonnegative scaling, linear precomposition and
//! Cartesian products. [`SetMap::SingletonPoly`] is the exception: it exists
//! as a negative control for [`check_concavity`].

mod affine;
pub(crate) mod checks;

pub use affine::{AffinePiece, MaxAffine, MinAffine};
pub use checks::{check_bounded, check_concavity, concavity_violation, ConcavityReport, ConcavityWitness};

use crate::convex::DEDUP_TOL;
use crate::{check_dim, check_finite, Error, Matrix, Result, Vector};

/// Affine generator `x ↦ A x + b` of an [`SetMap::AffineFan`].
#[derive(Debug, Clone, PartialEq)]
pub struct AffineGenerator {
    pub matrix: Matrix,
    pub offset: Vector,
}

impl AffineGenerator {
    pub fn new(matrix: Matrix, offset: Vector) -> Self {
        Self { matrix, offset }
    }

    /// Linear generator with zero offset.
    pub fn linear(matrix: Matrix) -> Self {
        let m = matrix.nrows();
        Self { matrix, offset: Vector::zeros(m) }
    }

    pub fn eval(&self, x: &Vector) -> Vector {
        &self.matrix * x + &self.offset
    }
}

/// A generator of `F(x)` together with the Jacobian of the affine selection
/// that produces it near `x`.
///
/// For a dual direction `b*` in which `point` attains `σ(b*, F(x))`,
/// `jacobianᵀ b*` is a subgradient of `σ(b*, F(·))` at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGenerator {
    pub point: Vector,
    pub jacobian: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetMap {
    /// `F(x) = conv{A_i x + b_i}`.
    AffineFan { generators: Vec<AffineGenerator> },
    /// `F(x) = ρ(x) · B_Y` with `ρ ≥ 0` convex.
    Radial { rho: MaxAffine, codomain_dim: usize },
    /// `F(x) = [ψ(x), φ(x)] ⊆ ℝ`.
    Interval { psi: MinAffine, phi: MaxAffine },
    Sum(Box<SetMap>, Box<SetMap>),
    Scale(f64, Box<SetMap>),
    /// `x ↦ inner(T x)`.
    PreLinear(Matrix, Box<SetMap>),
    /// `x ↦ left(x) × right(x)`.
    Product(Box<SetMap>, Box<SetMap>),
    /// `x ↦ {p(x)}` on the real line, coefficients in ascending degree.
    /// Not concave in general.
    SingletonPoly { coefficients: Vec<f64> },
}

impl SetMap {
    pub fn affine_fan(generators: Vec<AffineGenerator>) -> Result<Self> {
        let map = SetMap::AffineFan { generators };
        map.validate()?;
        Ok(map)
    }

    /// Fan generated by linear operators: `F(x) = conv{A_i x}`.
    pub fn fan(matrices: Vec<Matrix>) -> Result<Self> {
        Self::affine_fan(matrices.into_iter().map(AffineGenerator::linear).collect())
    }

    pub fn radial(rho: MaxAffine, codomain_dim: usize) -> Result<Self> {
        let map = SetMap::Radial { rho, codomain_dim };
        map.validate()?;
        Ok(map)
    }

    pub fn interval(psi: MinAffine, phi: MaxAffine) -> Result<Self> {
        let map = SetMap::Interval { psi, phi };
        map.validate()?;
        Ok(map)
    }

    pub fn sum(left: SetMap, right: SetMap) -> Result<Self> {
        let map = SetMap::Sum(Box::new(left), Box::new(right));
        map.validate()?;
        Ok(map)
    }

    pub fn scale(factor: f64, inner: SetMap) -> Result<Self> {
        let map = SetMap::Scale(factor, Box::new(inner));
        map.validate()?;
        Ok(map)
    }

    pub fn pre_linear(matrix: Matrix, inner: SetMap) -> Result<Self> {
        let map = SetMap::PreLinear(matrix, Box::new(inner));
        map.validate()?;
        Ok(map)
    }

    pub fn product(left: SetMap, right: SetMap) -> Result<Self> {
        let map = SetMap::Product(Box::new(left), Box::new(right));
        map.validate()?;
        Ok(map)
    }

    pub fn singleton_poly(coefficients: Vec<f64>) -> Result<Self> {
        let map = SetMap::SingletonPoly { coefficients };
        map.validate()?;
        Ok(map)
    }

    /// Checks dimensional consistency and finiteness of the whole tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            SetMap::AffineFan { generators } => {
                let first = generators
                    .first()
                    .ok_or_else(|| Error::InvalidMap("affine fan needs at least one generator".into()))?;
                let (m, n) = first.matrix.shape();
                if m == 0 || n == 0 {
                    return Err(Error::InvalidMap("generator matrices must be nonempty".into()));
                }
                for g in generators {
                    check_dim(m, g.matrix.nrows())?;
                    check_dim(n, g.matrix.ncols())?;
                    check_dim(m, g.offset.len())?;
                    check_finite(g.matrix.as_slice(), "generator matrix")?;
                    check_finite(g.offset.as_slice(), "generator offset")?;
                }
                Ok(())
            }
            SetMap::Radial { codomain_dim, .. } => {
                if *codomain_dim == 0 {
                    Err(Error::InvalidMap("radial codomain dimension must be positive".into()))
                } else {
                    Ok(())
                }
            }
            SetMap::Interval { psi, phi } => check_dim(psi.dim(), phi.dim()),
            SetMap::Sum(l, r) => {
                l.validate()?;
                r.validate()?;
                check_dim(l.domain_dim(), r.domain_dim())?;
                check_dim(l.codomain_dim(), r.codomain_dim())
            }
            SetMap::Scale(factor, inner) => {
                if !factor.is_finite() || *factor < 0.0 {
                    return Err(Error::InvalidMap(format!("scale factor {factor} must be finite and nonnegative")));
                }
                inner.validate()
            }
            SetMap::PreLinear(t, inner) => {
                inner.validate()?;
                check_finite(t.as_slice(), "precomposition matrix")?;
                if t.ncols() == 0 {
                    return Err(Error::InvalidMap("precomposition matrix must be nonempty".into()));
                }
                check_dim(inner.domain_dim(), t.nrows())
            }
            SetMap::Product(l, r) => {
                l.validate()?;
                r.validate()?;
                check_dim(l.domain_dim(), r.domain_dim())
            }
            SetMap::SingletonPoly { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidMap("polynomial needs at least one coefficient".into()));
                }
                check_finite(coefficients, "polynomial coefficient")
            }
        }
    }

    pub fn domain_dim(&self) -> usize {
        match self {
            SetMap::AffineFan { generators } => generators[0].matrix.ncols(),
            SetMap::Radial { rho, .. } => rho.dim(),
            SetMap::Interval { phi, .. } => phi.dim(),
            SetMap::Sum(l, _) | SetMap::Product(l, _) => l.domain_dim(),
            SetMap::Scale(_, inner) => inner.domain_dim(),
            SetMap::PreLinear(t, _) => t.ncols(),
            SetMap::SingletonPoly { .. } => 1,
        }
    }

    pub fn codomain_dim(&self) -> usize {
        match self {
            SetMap::AffineFan { generators } => generators[0].matrix.nrows(),
            SetMap::Radial { codomain_dim, .. } => *codomain_dim,
            SetMap::Interval { .. } | SetMap::SingletonPoly { .. } => 1,
            SetMap::Sum(l, _) => l.codomain_dim(),
            SetMap::Scale(_, inner) | SetMap::PreLinear(_, inner) => inner.codomain_dim(),
            SetMap::Product(l, r) => l.codomain_dim() + r.codomain_dim(),
        }
    }

    /// True when the tree contains no radial leaf, so that `F(x)` has a
    /// finite generator description.
    pub fn is_fan_normalizable(&self) -> bool {
        match self {
            SetMap::Radial { .. } => false,
            SetMap::AffineFan { .. } | SetMap::Interval { .. } | SetMap::SingletonPoly { .. } => true,
            SetMap::Sum(l, r) | SetMap::Product(l, r) => l.is_fan_normalizable() && r.is_fan_normalizable(),
            SetMap::Scale(_, inner) | SetMap::PreLinear(_, inner) => inner.is_fan_normalizable(),
        }
    }

    /// True when the map normalizes to a fan generated by linear operators
    /// (an affine fan whose offsets all vanish).
    pub fn is_fan(&self) -> bool {
        match self.normalize() {
            SetMap::AffineFan { generators } => generators.iter().all(|g| g.offset.iter().all(|b| *b == 0.0)),
            _ => false,
        }
    }

    /// Points whose convex hull is `F(x)`, deduplicated.
    pub fn generators_at(&self, x: &Vector) -> Result<Vec<Vector>> {
        let mut points: Vec<Vector> = Vec::new();
        for g in self.local_generators(x, 0.0)? {
            if !points.iter().any(|p| (p - &g.point).amax() <= DEDUP_TOL) {
                points.push(g.point);
            }
        }
        Ok(points)
    }

    /// Generators of `F(x)` with the Jacobians of their affine selections.
    ///
    /// Piecewise-affine leaves contribute one entry per piece active within
    /// `tie_tol`, so that at kinks every active gradient is represented.
    pub fn local_generators(&self, x: &Vector, tie_tol: f64) -> Result<Vec<LocalGenerator>> {
        check_dim(self.domain_dim(), x.len())?;
        self.local_generators_unchecked(x, tie_tol)
    }

    fn local_generators_unchecked(&self, x: &Vector, tie_tol: f64) -> Result<Vec<LocalGenerator>> {
        Ok(match self {
            SetMap::AffineFan { generators } => generators
                .iter()
                .map(|g| LocalGenerator { point: g.eval(x), jacobian: g.matrix.clone() })
                .collect(),
            SetMap::Radial { .. } => return Err(Error::NotFanNormalizable),
            SetMap::Interval { psi, phi } => {
                let lo = psi.value(x);
                let hi = phi.value(x);
                if lo > hi {
                    return Err(Error::InvalidMap(format!("interval bounds inverted at x: ψ = {lo} > φ = {hi}")));
                }
                let mut out = Vec::new();
                for j in phi.active(x, tie_tol) {
                    let g = &phi.pieces()[j].gradient;
                    out.push(LocalGenerator { point: Vector::from_element(1, hi), jacobian: row_matrix(g) });
                }
                for j in psi.active(x, tie_tol) {
                    let g = &psi.pieces()[j].gradient;
                    out.push(LocalGenerator { point: Vector::from_element(1, lo), jacobian: row_matrix(g) });
                }
                out
            }
            SetMap::Sum(l, r) => {
                let gl = l.local_generators_unchecked(x, tie_tol)?;
                let gr = r.local_generators_unchecked(x, tie_tol)?;
                let mut out = Vec::with_capacity(gl.len() * gr.len());
                for a in &gl {
                    for b in &gr {
                        out.push(LocalGenerator { point: &a.point + &b.point, jacobian: &a.jacobian + &b.jacobian });
                    }
                }
                out
            }
            SetMap::Scale(factor, inner) => inner
                .local_generators_unchecked(x, tie_tol)?
                .into_iter()
                .map(|g| LocalGenerator { point: g.point * *factor, jacobian: g.jacobian * *factor })
                .collect(),
            SetMap::PreLinear(t, inner) => inner
                .local_generators_unchecked(&(t * x), tie_tol)?
                .into_iter()
                .map(|g| LocalGenerator { point: g.point, jacobian: g.jacobian * t })
                .collect(),
            SetMap::Product(l, r) => {
                let gl = l.local_generators_unchecked(x, tie_tol)?;
                let gr = r.local_generators_unchecked(x, tie_tol)?;
                let mut out = Vec::with_capacity(gl.len() * gr.len());
                for a in &gl {
                    for b in &gr {
                        out.push(LocalGenerator {
                            point: stack_vectors(&a.point, &b.point),
                            jacobian: stack_rows(&a.jacobian, &b.jacobian),
                        });
                    }
                }
                out
            }
            SetMap::SingletonPoly { coefficients } => {
                let (value, slope) = poly_eval(coefficients, x[0]);
                vec![LocalGenerator {
                    point: Vector::from_element(1, value),
                    jacobian: Matrix::from_element(1, 1, slope),
                }]
            }
        })
    }

    /// `σ(y*, F(x))`.
    pub fn support_map(&self, x: &Vector, dual: &Vector) -> Result<f64> {
        check_dim(self.domain_dim(), x.len())?;
        check_dim(self.codomain_dim(), dual.len())?;
        self.support_unchecked(x, dual)
    }

    fn support_unchecked(&self, x: &Vector, dual: &Vector) -> Result<f64> {
        Ok(match self {
            SetMap::AffineFan { generators } => generators
                .iter()
                .map(|g| dual.dot(&g.eval(x)))
                .fold(f64::NEG_INFINITY, f64::max),
            SetMap::Radial { rho, .. } => {
                let r = rho.value(x);
                if r < 0.0 {
                    return Err(Error::InvalidMap(format!("radial function negative at x: ρ = {r}")));
                }
                r * dual.norm()
            }
            SetMap::Interval { psi, phi } => {
                let lo = psi.value(x);
                let hi = phi.value(x);
                if lo > hi {
                    return Err(Error::InvalidMap(format!("interval bounds inverted at x: ψ = {lo} > φ = {hi}")));
                }
                if dual[0] >= 0.0 {
                    dual[0] * hi
                } else {
                    dual[0] * lo
                }
            }
            SetMap::Sum(l, r) => l.support_unchecked(x, dual)? + r.support_unchecked(x, dual)?,
            SetMap::Scale(factor, inner) => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * inner.support_unchecked(x, dual)?
                }
            }
            SetMap::PreLinear(t, inner) => inner.support_unchecked(&(t * x), dual)?,
            SetMap::Product(l, r) => {
                let m = l.codomain_dim();
                let top = dual.rows(0, m).into_owned();
                let bottom = dual.rows(m, dual.len() - m).into_owned();
                l.support_unchecked(x, &top)? + r.support_unchecked(x, &bottom)?
            }
            SetMap::SingletonPoly { coefficients } => dual[0] * poly_eval(coefficients, x[0]).0,
        })
    }

    /// `sup_{y ∈ F(x)} ‖y‖`, exact for fan-normalizable trees and radial leaves;
    /// Minkowski sums involving radial leaves use the triangle inequality.
    pub fn max_norm_at(&self, x: &Vector) -> Result<f64> {
        check_dim(self.domain_dim(), x.len())?;
        self.max_norm_unchecked(x)
    }

    fn max_norm_unchecked(&self, x: &Vector) -> Result<f64> {
        if self.is_fan_normalizable() {
            return Ok(self
                .local_generators_unchecked(x, 0.0)?
                .iter()
                .map(|g| g.point.norm())
                .fold(0.0, f64::max));
        }
        Ok(match self {
            SetMap::Radial { rho, .. } => rho.value(x).max(0.0),
            SetMap::Sum(l, r) => l.max_norm_unchecked(x)? + r.max_norm_unchecked(x)?,
            SetMap::Scale(factor, inner) => factor * inner.max_norm_unchecked(x)?,
            SetMap::PreLinear(t, inner) => inner.max_norm_unchecked(&(t * x))?,
            SetMap::Product(l, r) => l.max_norm_unchecked(x)?.hypot(r.max_norm_unchecked(x)?),
            _ => unreachable!("fan-normalizable leaves handled above"),
        })
    }

    /// Flattens combinator trees over affine fans (and single-piece interval
    /// maps) into a single [`SetMap::AffineFan`] with deduplicated generators.
    ///
    /// Subtrees that cannot be flattened exactly (radial maps, polynomial
    /// fixtures, intervals with several pieces) are kept as they are, with
    /// their flattenable children normalized. The operation is idempotent.
    pub fn normalize(&self) -> SetMap {
        match self {
            SetMap::AffineFan { generators } => SetMap::AffineFan { generators: dedup_generators(generators.clone()) },
            SetMap::Interval { psi, phi } if psi.pieces().len() == 1 && phi.pieces().len() == 1 => {
                let lo = &psi.pieces()[0];
                let hi = &phi.pieces()[0];
                let gens = vec![
                    AffineGenerator::new(row_matrix(&lo.gradient), Vector::from_element(1, lo.offset)),
                    AffineGenerator::new(row_matrix(&hi.gradient), Vector::from_element(1, hi.offset)),
                ];
                SetMap::AffineFan { generators: dedup_generators(gens) }
            }
            SetMap::Radial { .. } | SetMap::Interval { .. } | SetMap::SingletonPoly { .. } => self.clone(),
            SetMap::Sum(l, r) => match (l.normalize(), r.normalize()) {
                (SetMap::AffineFan { generators: a }, SetMap::AffineFan { generators: b }) => {
                    let mut out = Vec::with_capacity(a.len() * b.len());
                    for p in &a {
                        for q in &b {
                            out.push(AffineGenerator::new(&p.matrix + &q.matrix, &p.offset + &q.offset));
                        }
                    }
                    SetMap::AffineFan { generators: dedup_generators(out) }
                }
                (nl, nr) => SetMap::Sum(Box::new(nl), Box::new(nr)),
            },
            SetMap::Scale(factor, inner) => match inner.normalize() {
                SetMap::AffineFan { generators } => SetMap::AffineFan {
                    generators: dedup_generators(
                        generators
                            .into_iter()
                            .map(|g| AffineGenerator::new(g.matrix * *factor, g.offset * *factor))
                            .collect(),
                    ),
                },
                other => SetMap::Scale(*factor, Box::new(other)),
            },
            SetMap::PreLinear(t, inner) => match inner.normalize() {
                SetMap::AffineFan { generators } => SetMap::AffineFan {
                    generators: dedup_generators(
                        generators
                            .into_iter()
                            .map(|g| AffineGenerator::new(&g.matrix * t, g.offset))
                            .collect(),
                    ),
                },
                other => SetMap::PreLinear(t.clone(), Box::new(other)),
            },
            SetMap::Product(l, r) => match (l.normalize(), r.normalize()) {
                (SetMap::AffineFan { generators: a }, SetMap::AffineFan { generators: b }) => {
                    let mut out = Vec::with_capacity(a.len() * b.len());
                    for p in &a {
                        for q in &b {
                            out.push(AffineGenerator::new(
                                stack_rows(&p.matrix, &q.matrix),
                                stack_vectors(&p.offset, &q.offset),
                            ));
                        }
                    }
                    SetMap::AffineFan { generators: dedup_generators(out) }
                }
                (nl, nr) => SetMap::Product(Box::new(nl), Box::new(nr)),
            },
        }
    }

    /// Number of generators before deduplication (affine fans only).
    pub fn generator_count(&self) -> Option<usize> {
        match self {
            SetMap::AffineFan { generators } => Some(generators.len()),
            _ => None,
        }
    }
}

fn dedup_generators(generators: Vec<AffineGenerator>) -> Vec<AffineGenerator> {
    let mut out: Vec<AffineGenerator> = Vec::with_capacity(generators.len());
    for g in generators {
        let dup = out.iter().any(|h| {
            (&h.matrix - &g.matrix).amax() <= DEDUP_TOL && (&h.offset - &g.offset).amax() <= DEDUP_TOL
        });
        if !dup {
            out.push(g);
        }
    }
    out
}

fn row_matrix(g: &Vector) -> Matrix {
    Matrix::from_row_slice(1, g.len(), g.as_slice())
}

fn stack_vectors(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

fn stack_rows(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// Horner evaluation of `p(x)` and `p'(x)`.
fn poly_eval(coefficients: &[f64], x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for c in coefficients.iter().rev() {
        slope = slope * x + value;
        value = value * x + c;
    }
    (value, slope)
}
