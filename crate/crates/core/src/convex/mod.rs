//! Closed convex sets and their oracles.
//!
//! Every set used by the rest of the crate (the target `C`, unit balls, the
//! values `F(x)`) is a [`ConvexSet`]. Four shapes are supported: Euclidean
//! balls, V-polytopes (convex hulls of finitely many points), axis-aligned
//! boxes and polyhedral cones `{y : ⟨a_j, y⟩ ≤ 0 ∀j}`.
//!
//! Dual vectors are identified with primal ones through the Euclidean inner
//! product, so the support function of a set is a plain function on `ℝᵐ`.

mod dykstra;
mod minnorm;
mod sample;

pub use dykstra::{project_halfspaces, ProjectionOptions};
pub use minnorm::{min_norm_point, min_norm_point_with, MinNormResult, DEFAULT_TOL_MNP};

pub use sample::{sphere_sample, SphereRestriction};

use crate::{check_dim, check_finite, Error, Result, Vector};

/// Absolute tolerance used to merge duplicate vertices.
pub const DEDUP_TOL: f64 = 1e-12;

/// Relative tolerance of the polar-cone membership test used by
/// [`ConvexSet::support`] on cones.
const POLAR_TOL: f64 = 1e-8;

/// Geometric description of a [`ConvexSet`].
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball { center: Vector, radius: f64 },
    VPolytope { vertices: Vec<Vector> },
    Box { lower: Vector, upper: Vector },
    /// `{y : ⟨a_j, y⟩ ≤ 0 for every normal a_j}`.
    HCone { normals: Vec<Vector> },
}

/// A nonempty closed convex subset of `ℝᵐ`.
///
/// Values are immutable and validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet {
    shape: Shape,
    dim: usize,
}

impl ConvexSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { center, radius })
    }

    pub fn vpolytope(vertices: Vec<Vector>) -> Result<Self> {
        Self::new(Shape::VPolytope { vertices })
    }

    pub fn cube(lower: Vector, upper: Vector) -> Result<Self> {
        Self::new(Shape::Box { lower, upper })
    }

    pub fn hcone(normals: Vec<Vector>) -> Result<Self> {
        Self::new(Shape::HCone { normals })
    }

    /// The nonpositive orthant `ℝᵐ₋`.
    pub fn nonpositive_orthant(dim: usize) -> Result<Self> {
        Self::hcone((0..dim).map(|i| unit(dim, i, 1.0)).collect())
    }

    /// The nonnegative orthant `ℝᵐ₊`.
    pub fn nonnegative_orthant(dim: usize) -> Result<Self> {
        Self::hcone((0..dim).map(|i| unit(dim, i, -1.0)).collect())
    }

    /// Validates a shape and builds the set. Duplicate polytope vertices are
    /// merged.
    pub fn new(shape: Shape) -> Result<Self> {
        let (shape, dim) = match shape {
            Shape::Ball { center, radius } => {
                check_finite(center.as_slice(), "ball center")?;
                if !radius.is_finite() || radius < 0.0 {
                    return Err(Error::InvalidSet(format!("ball radius {radius} must be finite and nonnegative")));
                }
                nonzero_dim(center.len())?;
                let dim = center.len();
                (Shape::Ball { center, radius }, dim)
            }
            Shape::VPolytope { vertices } => {
                let dim = uniform_dim(&vertices, "polytope vertex")?;
                (Shape::VPolytope { vertices: dedup_points(vertices) }, dim)
            }
            Shape::Box { lower, upper } => {
                check_finite(lower.as_slice(), "box lower corner")?;
                check_finite(upper.as_slice(), "box upper corner")?;
                nonzero_dim(lower.len())?;
                check_dim(lower.len(), upper.len())?;
                if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
                    return Err(Error::InvalidSet("box lower corner exceeds upper corner".into()));
                }
                let dim = lower.len();
                (Shape::Box { lower, upper }, dim)
            }
            Shape::HCone { normals } => {
                let dim = uniform_dim(&normals, "cone normal")?;
                if normals.iter().any(|a| a.norm() == 0.0) {
                    return Err(Error::InvalidSet("cone normals must be nonzero".into()));
                }
                (Shape::HCone { normals }, dim)
            }
        };
        Ok(Self { shape, dim })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_cone(&self) -> bool {
        matches!(self.shape, Shape::HCone { .. })
    }

    pub fn is_bounded(&self) -> bool {
        !self.is_cone()
    }

    /// Support function `σ(d, C) = sup_{y ∈ C} ⟨d, y⟩`.
    ///
    /// For cones the value is `0` when `d` lies in the negative polar cone and
    /// `f64::INFINITY` otherwise.
    pub fn support(&self, direction: &Vector) -> Result<f64> {
        check_dim(self.dim, direction.len())?;
        Ok(match &self.shape {
            Shape::Ball { center, radius } => direction.dot(center) + radius * direction.norm(),
            Shape::VPolytope { vertices } => vertices
                .iter()
                .map(|v| direction.dot(v))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Box { lower, upper } => direction
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(d, (l, u))| if *d >= 0.0 { d * u } else { d * l })
                .sum(),
            Shape::HCone { .. } => {
                if self.in_negative_polar(direction)? {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        })
    }

    /// Tests `d ∈ C^⊖` for a cone through the Moreau decomposition:
    /// `d ∈ C^⊖` iff the projection of `d` onto `C` vanishes.
    pub fn in_negative_polar(&self, direction: &Vector) -> Result<bool> {
        let Shape::HCone { normals } = &self.shape else {
            return Err(Error::NotACone);
        };
        check_dim(self.dim, direction.len())?;
        let scale = direction.norm().max(f64::MIN_POSITIVE);
        // a nonnegative multiple of a single normal is always polar
        for a in normals {
            let cos = direction.dot(a) / (a.norm() * scale);
            if cos >= 1.0 - 1e-15 {
                return Ok(true);
            }
        }
        let p = self.project(direction)?;
        Ok(p.norm() <= POLAR_TOL * scale.max(1.0))
    }

    /// Euclidean projection with default options.
    pub fn project(&self, point: &Vector) -> Result<Vector> {
        self.project_with(point, &ProjectionOptions::default())
    }

    pub fn project_with(&self, point: &Vector, opts: &ProjectionOptions) -> Result<Vector> {
        check_dim(self.dim, point.len())?;
        match &self.shape {
            Shape::Ball { center, radius } => {
                let offset = point - center;
                let r = offset.norm();
                if r <= *radius {
                    Ok(point.clone())
                } else {
                    Ok(center + offset * (radius / r))
                }
            }
            Shape::VPolytope { vertices } => {
                let shifted: Vec<Vector> = vertices.iter().map(|v| v - point).collect();
                let mnp = minnorm::wolfe(&shifted, DEFAULT_TOL_MNP, minnorm::default_max_iter(shifted.len()));
                if !mnp.converged && mnp.gap > 1e-9 * mnp.scale.max(1.0) {
                    return Err(Error::MinNormNotConverged { gap: mnp.gap });
                }
                Ok(mnp.point + point)
            }
            Shape::Box { lower, upper } => Ok(Vector::from_iterator(
                self.dim,
                point
                    .iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(p, (l, u))| p.clamp(*l, *u)),
            )),
            Shape::HCone { normals } => {
                let offsets = vec![0.0; normals.len()];
                project_halfspaces(normals, &offsets, point, opts)
            }
        }
    }

    /// `dist(point, C)`.
    pub fn distance(&self, point: &Vector) -> Result<f64> {
        Ok((point - self.project(point)?).norm())
    }

    pub fn contains(&self, point: &Vector, tol: f64) -> Result<bool> {
        if let Shape::HCone { normals } = &self.shape {
            check_dim(self.dim, point.len())?;
            if normals.iter().all(|a| a.dot(point) <= 0.0) {
                return Ok(true);
            }
        }
        Ok(self.distance(point)? <= tol)
    }

    /// Conic generators of the negative polar cone
    /// `C^⊖ = {y* : ⟨y*, y⟩ ≤ 0 ∀y ∈ C}`; for an H-cone these are its normals.
    pub fn negative_polar(&self) -> Result<&[Vector]> {
        match &self.shape {
            Shape::HCone { normals } => Ok(normals),
            _ => Err(Error::NotACone),
        }
    }

    /// Vertices of `λA ⊕ μB` for two polytopes, deduplicated.
    pub fn minkowski_combination(a: &ConvexSet, lambda: f64, b: &ConvexSet, mu: f64) -> Result<ConvexSet> {
        let (Shape::VPolytope { vertices: va }, Shape::VPolytope { vertices: vb }) = (&a.shape, &b.shape) else {
            return Err(Error::InvalidSet("Minkowski combination needs two polytopes".into()));
        };
        check_dim(a.dim, b.dim)?;
        let mut out = Vec::with_capacity(va.len() * vb.len());
        for p in va {
            for q in vb {
                out.push(p * lambda + q * mu);
            }
        }
        ConvexSet::vpolytope(out)
    }
}

pub(crate) fn unit(dim: usize, i: usize, value: f64) -> Vector {
    let mut v = Vector::zeros(dim);
    v[i] = value;
    v
}

fn nonzero_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidSet("dimension must be positive".into()))
    } else {
        Ok(())
    }
}

fn uniform_dim(points: &[Vector], what: &'static str) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidSet(format!("{what} list must be nonempty")))?;
    nonzero_dim(first.len())?;
    for p in points {
        check_dim(first.len(), p.len())?;
        check_finite(p.as_slice(), what)?;
    }
    Ok(first.len())
}

/// Removes points within [`DEDUP_TOL`] (max-norm) of an earlier point,
/// preserving first occurrences.
pub(crate) fn dedup_points(points: Vec<Vector>) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| (q - &p).amax() <= DEDUP_TOL) {
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn support_examples() {
        let ball = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(ball.support(&v(&[3.0, 4.0])).unwrap(), 5.0);
        let poly = ConvexSet::vpolytope(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert_eq!(poly.support(&v(&[1.0, 1.0])).unwrap(), 1.0);
        let neg = ConvexSet::hcone(vec![v(&[1.0])]).unwrap();
        assert_eq!(neg.support(&v(&[2.0])).unwrap(), 0.0);
        assert_eq!(neg.support(&v(&[-1.0])).unwrap(), f64::INFINITY);
        let cube = ConvexSet::cube(v(&[-1.0, 0.0]), v(&[1.0, 2.0])).unwrap();
        assert_eq!(cube.support(&v(&[-1.0, 1.0])).unwrap(), 3.0);
    }

    #[test]
    fn support_dimension_mismatch() {
        let ball = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(
            ball.support(&v(&[1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn projection_examples() {
        let ball = ConvexSet::ball(v(&[0.0, 0.0]), 2.0).unwrap();
        let p = ball.project(&v(&[3.0, 4.0])).unwrap();
        assert!((p - v(&[1.2, 1.6])).norm() < 1e-15);
        assert_eq!(ball.distance(&v(&[3.0, 4.0])).unwrap(), 3.0);

        let neg = ConvexSet::hcone(vec![v(&[1.0])]).unwrap();
        assert_eq!(neg.project(&v(&[5.0])).unwrap(), v(&[0.0]));

        let orthant = ConvexSet::nonpositive_orthant(2).unwrap();
        assert!((orthant.distance(&v(&[1.0, 1.0])).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn segment_projection_matches_closed_form() {
        // closed form: clamp the parameter of the orthogonal foot to [0, 1]
        fn segment_proj(a: &Vector, b: &Vector, p: &Vector) -> Vector {
            let d = b - a;
            let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            a + d * t
        }
        let a = v(&[0.0, 0.0]);
        let b = v(&[1.0, 0.0]);
        let seg = ConvexSet::vpolytope(vec![a.clone(), b.clone()]).unwrap();
        for p in [v(&[2.0, 1.0]), v(&[0.3, -2.0]), v(&[-1.0, 0.5]), v(&[0.5, 0.0])] {
            let got = seg.project(&p).unwrap();
            let want = segment_proj(&a, &b, &p);
            assert!((got - want).norm() < 1e-12);
        }
        assert!((seg.distance(&v(&[2.0, 1.0])).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn contains_examples() {
        let ball = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert!(ball.contains(&v(&[0.5, 0.0]), 1e-9).unwrap());
        let neg = ConvexSet::hcone(vec![v(&[1.0])]).unwrap();
        assert!(neg.contains(&v(&[1e-12]), 1e-9).unwrap());
        let cube = ConvexSet::cube(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        assert!(!cube.contains(&v(&[2.0, 0.0]), 1e-9).unwrap());
    }

    #[test]
    fn negative_polar_generators() {
        let neg = ConvexSet::hcone(vec![v(&[1.0])]).unwrap();
        assert_eq!(neg.negative_polar().unwrap(), &[v(&[1.0])]);
        let orthant = ConvexSet::nonpositive_orthant(2).unwrap();
        assert_eq!(orthant.negative_polar().unwrap(), &[v(&[1.0, 0.0]), v(&[0.0, 1.0])]);
        let half = ConvexSet::hcone(vec![v(&[1.0, -1.0])]).unwrap();
        assert_eq!(half.negative_polar().unwrap(), &[v(&[1.0, -1.0])]);
        let ball = ConvexSet::ball(v(&[0.0]), 1.0).unwrap();
        assert_eq!(ball.negative_polar(), Err(Error::NotACone));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ConvexSet::ball(v(&[f64::NAN]), 1.0).is_err());
        assert!(ConvexSet::ball(v(&[0.0]), -1.0).is_err());
        assert!(ConvexSet::vpolytope(vec![]).is_err());
        assert!(ConvexSet::cube(v(&[1.0]), v(&[0.0])).is_err());
        assert!(ConvexSet::hcone(vec![v(&[0.0, 0.0])]).is_err());
        assert!(ConvexSet::vpolytope(vec![v(&[0.0]), v(&[0.0, 1.0])]).is_err());
    }

    #[test]
    fn vertices_are_deduplicated() {
        let poly = ConvexSet::vpolytope(vec![v(&[1.0, 0.0]), v(&[1.0 + 1e-14, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let Shape::VPolytope { vertices } = poly.shape() else { unreachable!() };
        assert_eq!(vertices.len(), 2);
    }

    #[test]
    fn general_cone_polar_membership() {
        // C = {y : y1 - y2 <= 0, -y1 <= 0}; C^⊖ = cone{(1,-1), (-1,0)}
        let cone = ConvexSet::hcone(vec![v(&[1.0, -1.0]), v(&[-1.0, 0.0])]).unwrap();
        assert_eq!(cone.support(&v(&[0.0, -1.0])).unwrap(), 0.0);
        assert_eq!(cone.support(&v(&[-3.0, -1.0])).unwrap(), 0.0);
        assert_eq!(cone.support(&v(&[0.0, 1.0])).unwrap(), f64::INFINITY);
        assert_eq!(cone.support(&v(&[1.0, 0.0])).unwrap(), f64::INFINITY);
    }
}
