//! Outer prederivatives given by operator fans, and the constants built on
//! them.
//!
//! An operator fan `H(v) = conv{A_1 v, …, A_k v}` is an outer prederivative
//! of `F` at `x̄` when `F(x) ⊆ F(x̄) + H(x − x̄) + ε‖x − x̄‖B` with `ε → 0`
//! as `x → x̄`. Its bound function is `ψ_H(v) = sup_{b* ∈ S*} σ(b*, H(v))`
//! and the positivity constant is
//!
//! ```text
//! Bconst = sup_{‖v‖ ≤ 1} min_i inf_{b* ∈ S*} ⟨b*, A_i v⟩.
//! ```
//!
//! Over the whole symmetric sphere the inner infimum is `−‖A_i v‖`, so this
//! constant is never positive for operator fans. With `S*` replaced by the
//! unit vectors of `C^⊖` (cone targets) it can be, and it then bounds the
//! slope of ν from below.

use nalgebra::SVD;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::box_samples;
use crate::convex::{sphere_sample, unit};
use crate::merit::{Bracket, Problem};
use crate::setvalued::SetMap;
use crate::{check_dim, ConvexSet, Error, Matrix, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFan {
    ops: Vec<Matrix>,
}

impl OperatorFan {
    pub fn new(ops: Vec<Matrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidMap("operator fan needs at least one operator".into()))?;
        if first.nrows() == 0 || first.ncols() == 0 {
            return Err(Error::InvalidMap("operators must be nonempty matrices".into()));
        }
        for a in &ops {
            check_dim(first.nrows(), a.nrows())?;
            check_dim(first.ncols(), a.ncols())?;
            crate::check_finite(a.as_slice(), "operator entry")?;
        }
        Ok(Self { ops })
    }

    /// The matrices of a map that normalizes to an affine fan.
    pub fn of_map(map: &SetMap) -> Result<Self> {
        match map.normalize() {
            SetMap::AffineFan { generators } => Self::new(generators.into_iter().map(|g| g.matrix).collect()),
            _ => Err(Error::NotFanNormalizable),
        }
    }

    pub fn ops(&self) -> &[Matrix] {
        &self.ops
    }

    /// Codomain dimension.
    pub fn m(&self) -> usize {
        self.ops[0].nrows()
    }

    /// Domain dimension.
    pub fn n(&self) -> usize {
        self.ops[0].ncols()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { ops: self.ops.iter().map(|a| a * factor).collect() }
    }

    /// Generators `A_i v` of `H(v)`.
    pub fn apply(&self, v: &Vector) -> Result<Vec<Vector>> {
        check_dim(self.n(), v.len())?;
        Ok(self.ops.iter().map(|a| a * v).collect())
    }
}

/// Dual directions over which `ψ_H` and `Bconst` are taken.
#[derive(Debug, Clone, PartialEq)]
pub enum DualRestriction {
    /// The whole unit sphere.
    Full,
    /// Unit vectors of `C^⊖` for an H-cone `C`.
    ConeRestricted(ConvexSet),
}

impl DualRestriction {
    pub fn cone(target: &ConvexSet) -> Result<Self> {
        if !target.is_cone() {
            return Err(Error::NotACone);
        }
        Ok(DualRestriction::ConeRestricted(target.clone()))
    }

    /// The natural restriction for a problem: cone-restricted in cone mode.
    pub fn for_problem(problem: &Problem) -> Self {
        if problem.target().is_cone() {
            DualRestriction::ConeRestricted(problem.target().clone())
        } else {
            DualRestriction::Full
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DualRestriction::Full => "full",
            DualRestriction::ConeRestricted(_) => "cone",
        }
    }
}

/// `ψ_H(v)`: `max_i ‖A_i v‖` on the full sphere, `max_i dist(A_i v, C)` over
/// `B* ∩ C^⊖`.
///
/// The cone value is taken over the ball rather than the sphere; the two
/// differ only when every `A_i v` lies in `C`, where the ball value `0` is
/// an upper bound.
pub fn psi_h(fan: &OperatorFan, v: &Vector, restriction: &DualRestriction) -> Result<f64> {
    let mut best: f64 = 0.0;
    for w in fan.apply(v)? {
        let value = match restriction {
            DualRestriction::Full => w.norm(),
            DualRestriction::ConeRestricted(c) => {
                check_dim(c.dim(), w.len())?;
                c.distance(&w)?
            }
        };
        best = best.max(value);
    }
    Ok(best)
}

/// `min_{b* ∈ S*} ⟨b*, w⟩` for the chosen restriction, in closed form.
///
/// With `K = C^⊖`: if some unit `b ∈ K` has `⟨b, w⟩ < 0` the minimum is
/// `−‖P_K(−w)‖ = −dist(−w, C)` (Moreau); otherwise `w` is nonnegative on
/// `K`, and the minimum of a linear function nonnegative on a finitely
/// generated cone over its unit vectors sits on a normalized generator.
pub fn inner_min(w: &Vector, restriction: &DualRestriction) -> Result<f64> {
    match restriction {
        DualRestriction::Full => Ok(-w.norm()),
        DualRestriction::ConeRestricted(c) => {
            let normals = c.negative_polar()?;
            if normals.is_empty() {
                return Err(Error::EmptyRestriction);
            }
            let neg = -w;
            let d = c.distance(&neg)?;
            if d > 1e-12 * (1.0 + w.norm()) {
                return Ok(-d);
            }
            Ok(normals
                .iter()
                .map(|a| a.dot(w) / a.norm())
                .fold(f64::INFINITY, f64::min)
                .max(0.0))
        }
    }
}

/// `min_i inner_min(A_i v)`, the objective of [`bconst`]; concave and
/// positively homogeneous in `v`.
pub fn bconst_objective(fan: &OperatorFan, v: &Vector, restriction: &DualRestriction) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for w in fan.apply(v)? {
        worst = worst.min(inner_min(&w, restriction)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BconstResult {
    pub value: f64,
    /// Maximizer in the unit ball (`0` when no direction beats `0`).
    pub argmax: Vector,
    /// Number of objective evaluations.
    pub evaluations: usize,
}

/// `sup_{‖v‖ ≤ 1} min_i inf_{b* ∈ S*} ⟨b*, A_i v⟩`.
///
/// The inner infimum is exact ([`inner_min`]). The outer objective is concave
/// and positively homogeneous, so the supremum is `0` or is attained on the
/// unit sphere; it is searched on `grid_density` sampled directions plus the
/// signed coordinate axes, and the best point is refined by a pattern search
/// on the sphere for `refine_iters` rounds. In one dimension the two unit
/// directions are checked exactly.
pub fn bconst(
    fan: &OperatorFan,
    restriction: &DualRestriction,
    grid_density: usize,
    refine_iters: usize,
    seed: u64,
) -> Result<BconstResult> {
    if let DualRestriction::ConeRestricted(c) = restriction {
        check_dim(c.dim(), fan.m())?;
    }
    let n = fan.n();
    let mut candidates: Vec<Vector> = Vec::new();
    for i in 0..n {
        candidates.push(unit(n, i, 1.0));
        candidates.push(unit(n, i, -1.0));
    }
    if n > 1 {
        candidates.extend(sphere_sample(n, grid_density, seed, None)?);
    }
    let mut evaluations = 0;
    let mut eval = |v: &Vector| -> Result<f64> {
        evaluations += 1;
        bconst_objective(fan, v, restriction)
    };
    let mut best = (Vector::zeros(n), 0.0);
    let mut best_sphere = (candidates[0].clone(), f64::NEG_INFINITY);
    for u in &candidates {
        let g = eval(u)?;
        if g > best_sphere.1 {
            best_sphere = (u.clone(), g);
        }
    }
    if n > 1 {
        let mut step = 0.5;
        for _ in 0..refine_iters {
            let mut improved = false;
            for i in 0..n {
                for sign in [1.0, -1.0] {
                    let mut trial = best_sphere.0.clone();
                    trial[i] += sign * step;
                    let norm = trial.norm();
                    if norm < 1e-12 {
                        continue;
                    }
                    trial /= norm;
                    let g = eval(&trial)?;
                    if g > best_sphere.1 {
                        best_sphere = (trial, g);
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
    }
    if best_sphere.1 > best.1 {
        best = best_sphere;
    }
    Ok(BconstResult { value: best.1, argmax: best.0, evaluations })
}

/// Fan attached to each point by a [`flat`] computation.
pub enum FanAssignment<'a> {
    Stationary(OperatorFan),
    PointDependent(Box<dyn Fn(&Vector) -> Result<OperatorFan> + 'a>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatResult {
    pub value: f64,
    /// Point attaining the minimum (`None` for stationary assignments).
    pub argmin: Option<Vector>,
    pub points: usize,
}

/// `inf` of [`bconst`] over sampled infeasible points of the box.
#[allow(clippy::too_many_arguments)]
pub fn flat(
    problem: &Problem,
    assignment: &FanAssignment<'_>,
    restriction: &DualRestriction,
    lower: &Vector,
    upper: &Vector,
    n_samples: usize,
    seed: u64,
    grid_density: usize,
    refine_iters: usize,
) -> Result<FlatResult> {
    match assignment {
        FanAssignment::Stationary(fan) => {
            let b = bconst(fan, restriction, grid_density, refine_iters, seed)?;
            Ok(FlatResult { value: b.value, argmin: None, points: 0 })
        }
        FanAssignment::PointDependent(f) => {
            check_dim(problem.n(), lower.len())?;
            let mut best: Option<(f64, Vector)> = None;
            let mut points = 0;
            for x in box_samples(lower, upper, n_samples, seed)? {
                if problem.value(&x)? <= problem.tol().feas {
                    continue;
                }
                points += 1;
                let b = bconst(&f(&x)?, restriction, grid_density, refine_iters, seed)?;
                if best.as_ref().is_none_or(|(v, _)| b.value < *v) {
                    best = Some((b.value, x));
                }
            }
            let (value, x) = best.ok_or(Error::NoInfeasibleSamples)?;
            Ok(FlatResult { value, argmin: Some(x), points })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusCheck {
    pub radius: f64,
    /// Smallest `ε` making the inclusion hold at every sample of this radius.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrederivativeReport {
    pub radii: Vec<RadiusCheck>,
    /// `ε` is zero at every radius.
    pub exact: bool,
    /// `ε` decreases along the radius schedule toward zero.
    pub vanishing: bool,
}

/// Fits `ε` in `F(x) ⊆ F(x₀) + H(x − x₀) + ε‖x − x₀‖B` on `n_samples`
/// points at each radius, by generator containment in the Minkowski sum.
pub fn verify_prederivative(
    map: &SetMap,
    x0: &Vector,
    fan: &OperatorFan,
    radii: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<PrederivativeReport> {
    check_dim(map.domain_dim(), x0.len())?;
    check_dim(map.domain_dim(), fan.n())?;
    check_dim(map.codomain_dim(), fan.m())?;
    let base = ConvexSet::vpolytope(map.generators_at(x0)?)?;
    let n = x0.len();
    let mut directions = Vec::with_capacity(2 * n + n_samples);
    for i in 0..n {
        directions.push(unit(n, i, 1.0));
        directions.push(unit(n, i, -1.0));
    }
    directions.extend(sphere_sample(n, n_samples, seed, None)?);

    let mut checks = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidProblem(format!("radius {r} must be positive")));
        }
        let mut epsilon: f64 = 0.0;
        for u in &directions {
            let d = u * r;
            let x = x0 + &d;
            let outer = ConvexSet::minkowski_combination(&base, 1.0, &ConvexSet::vpolytope(fan.apply(&d)?)?, 1.0)?;
            let crate::convex::Shape::VPolytope { vertices } = outer.shape() else { unreachable!() };
            for y in map.generators_at(&x)? {
                let scale = 1.0 + y.amax();
                if vertices.iter().any(|p| (p - &y).amax() <= 1e-12 * scale) {
                    continue;
                }
                epsilon = epsilon.max(outer.distance(&y)? / r);
            }
        }
        checks.push(RadiusCheck { radius: r, epsilon });
    }
    let exact = checks.iter().all(|c| c.epsilon == 0.0);
    let vanishing = match (checks.first(), checks.last()) {
        (Some(first), Some(last)) => {
            last.epsilon <= 1e-9
                || (checks.windows(2).all(|w| w[1].epsilon <= w[0].epsilon * (1.0 + 1e-9)) && last.epsilon < first.epsilon)
        }
        _ => true,
    };
    Ok(PrederivativeReport { radii: checks, exact, vanishing })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalBound {
    pub bracket: Bracket,
    pub psi: f64,
    /// `bracket.upper ≤ psi + tol`.
    pub holds: bool,
}

/// Compares the directional-derivative bracket of ν at `x0` along `v` with
/// `ψ_H(v)` on the full sphere.
pub fn directional_bound(
    problem: &Problem,
    fan: &OperatorFan,
    x0: &Vector,
    v: &Vector,
    t_schedule: &[f64],
    tol: f64,
) -> Result<DirectionalBound> {
    let bracket = problem.dirderiv_bracket(x0, v, t_schedule)?;
    let psi = psi_h(fan, v, &DualRestriction::Full)?;
    Ok(DirectionalBound { bracket, psi, holds: bracket.upper <= psi + tol })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BanachConstants {
    /// `min_{‖u*‖ = 1} ‖Λᵀ u*‖`.
    pub c_dual: f64,
    /// `sup_{‖y‖ = 1} dist(0, Λ⁻¹(y)) = ‖Λ⁺‖`.
    pub c_primal: f64,
    /// Surjectivity modulus, equal to `c_dual`.
    pub sur: f64,
}

/// Dual and primal Banach constants of a surjective `Λ`.
///
/// `c_dual` is the smallest singular value of `Λ`; `c_primal` is the norm of
/// the pseudo-inverse, computed separately so that `c_dual · c_primal = 1`
/// is a genuine check.
pub fn banach_constants(lambda: &Matrix) -> Result<BanachConstants> {
    crate::check_finite(lambda.as_slice(), "matrix entry")?;
    let (m, n) = lambda.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidProblem("matrix must be nonempty".into()));
    }
    if m > n {
        return Err(Error::RankDeficient { c_dual: 0.0 });
    }
    let sv = lambda.singular_values();
    let s_max = sv.max();
    let c_dual = sv.min();
    if c_dual <= 1e-12 * s_max {
        return Err(Error::RankDeficient { c_dual });
    }
    let pinv = SVD::new(lambda.clone(), true, true)
        .pseudo_inverse(0.0)
        .map_err(|e| Error::InvalidProblem(e.to_string()))?;
    let c_primal = pinv.singular_values().max();
    Ok(BanachConstants { c_dual, c_primal, sur: c_dual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupersetReport {
    pub restriction: &'static str,
    pub sampled: usize,
    /// Sampled directions with `ψ_H(v) ≤ tol`, i.e. in the guaranteed
    /// subset of the tangent cone.
    pub in_superset: Vec<Vector>,
    pub confirmed: usize,
    /// Superset directions the tangent test did not place in the cone.
    pub failures: Vec<Vector>,
}

/// Checks that directions with `A_i v ∈ C` for all `i` (cone targets) or
/// `A_i v = 0` (bounded targets) are tangent to `Solv` at `x̄`.
pub fn tangent_superset_check(
    problem: &Problem,
    xbar: &Vector,
    fan: &OperatorFan,
    n_directions: usize,
    seed: u64,
) -> Result<SupersetReport> {
    check_dim(problem.n(), fan.n())?;
    let merit = problem.value(xbar)?;
    if merit > problem.tol().feas {
        return Err(Error::NotASolution { merit });
    }
    let restriction = DualRestriction::for_problem(problem);
    let n = problem.n();
    let mut directions = Vec::with_capacity(2 * n + n_directions);
    for i in 0..n {
        directions.push(unit(n, i, 1.0));
        directions.push(unit(n, i, -1.0));
    }
    directions.extend(sphere_sample(n, n_directions, seed, None)?);

    let ts = crate::merit::default_t_schedule();
    let tol = 1e-9;
    let mut in_superset = Vec::new();
    let mut failures = Vec::new();
    for v in &directions {
        if psi_h(fan, v, &restriction)? > tol {
            continue;
        }
        let verdict = crate::analysis::tangent_test(problem, xbar, v, &ts, tol)?;
        if !matches!(verdict, crate::analysis::TangentVerdict::InCone { .. }) {
            failures.push(v.clone());
        }
        in_superset.push(v.clone());
    }
    Ok(SupersetReport {
        restriction: restriction.label(),
        sampled: directions.len(),
        confirmed: in_superset.len() - failures.len(),
        in_superset,
        failures,
    })
}

/// Random `rows × cols` Gaussian matrix from a ChaCha8 stream.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn s(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    fn i1_fan() -> OperatorFan {
        OperatorFan::new(vec![Matrix::from_element(1, 1, 1.0), Matrix::from_element(1, 1, 2.0)]).unwrap()
    }

    fn rminus() -> DualRestriction {
        DualRestriction::cone(&ConvexSet::nonpositive_orthant(1).unwrap()).unwrap()
    }

    #[test]
    fn psi_examples() {
        let f = i1_fan();
        assert_eq!(psi_h(&f, &s(1.0), &DualRestriction::Full).unwrap(), 2.0);
        assert_eq!(psi_h(&f, &s(-1.0), &rminus()).unwrap(), 0.0);
        assert_eq!(psi_h(&f, &s(1.0), &rminus()).unwrap(), 2.0);
    }

    #[test]
    fn bconst_examples() {
        let b = bconst(&i1_fan(), &rminus(), 64, 50, 0).unwrap();
        assert_eq!((b.value, b.argmax[0]), (1.0, 1.0));
        let single = OperatorFan::new(vec![Matrix::from_element(1, 1, 2.0)]).unwrap();
        assert_eq!(bconst(&single, &rminus(), 64, 50, 0).unwrap().value, 2.0);
        let full = bconst(&i1_fan(), &DualRestriction::Full, 64, 50, 0).unwrap();
        assert_eq!((full.value, full.argmax[0]), (0.0, 0.0));
    }

    #[test]
    fn flat_scales_linearly() {
        let p = instances::i1().problem;
        let fan = OperatorFan::of_map(p.map()).unwrap();
        let r = rminus();
        let lo = s(-5.0);
        let hi = s(5.0);
        let one = flat(&p, &FanAssignment::Stationary(fan.clone()), &r, &lo, &hi, 10, 0, 16, 10).unwrap();
        assert_eq!(one.value, 1.0);
        let three = flat(&p, &FanAssignment::Stationary(fan.scaled(3.0)), &r, &lo, &hi, 10, 0, 16, 10).unwrap();
        assert_eq!(three.value, 3.0);
        let moving = FanAssignment::PointDependent(Box::new(|_: &Vector| Ok(fan.clone())));
        let pd = flat(&p, &moving, &r, &lo, &hi, 20, 4, 16, 10).unwrap();
        assert_eq!(pd.value, 1.0);
        assert!(pd.points > 0);
    }

    #[test]
    fn inner_min_on_orthant() {
        // K = ℝ²₊; min over unit b ≥ 0 of ⟨b, w⟩
        let r = DualRestriction::cone(&ConvexSet::nonpositive_orthant(2).unwrap()).unwrap();
        let w = Vector::from_column_slice(&[3.0, 1.0]);
        assert_eq!(inner_min(&w, &r).unwrap(), 1.0);
        // b = (0, 1) gives −2; any unit b ≥ 0 gives ⟨b, w⟩ ≥ −‖w₋‖ = −2
        let w = Vector::from_column_slice(&[3.0, -2.0]);
        assert_eq!(inner_min(&w, &r).unwrap(), -2.0);
        let w = Vector::from_column_slice(&[-3.0, -4.0]);
        assert_eq!(inner_min(&w, &r).unwrap(), -5.0);
    }

    #[test]
    fn i3_cone_bconst_is_inverse_sqrt_two() {
        let inst = instances::i3_cone();
        let fan = OperatorFan::of_map(inst.problem.map()).unwrap();
        let b = bconst(&fan, &DualRestriction::for_problem(&inst.problem), 256, 200, 5).unwrap();
        assert!((b.value - 0.5f64.sqrt()).abs() < 1e-9, "{}", b.value);
    }

    #[test]
    fn prederivative_examples() {
        let p = instances::i1().problem;
        let fan = OperatorFan::of_map(p.map()).unwrap();
        let radii = [1.0, 0.1, 0.01];
        let r = verify_prederivative(p.map(), &s(0.7), &fan, &radii, 10, 1).unwrap();
        assert!(r.exact && r.vanishing);

        let sq = SetMap::singleton_poly(vec![0.0, 0.0, 1.0]).unwrap();
        let lin = OperatorFan::new(vec![Matrix::from_element(1, 1, 2.0)]).unwrap();
        let r = verify_prederivative(&sq, &s(1.0), &lin, &radii, 4, 1).unwrap();
        assert!(!r.exact && r.vanishing);
        for c in &r.radii {
            // |x² − 1 − 2(x − 1)| = (x − 1)², so ε(r) = r
            assert!((c.epsilon - c.radius).abs() < 1e-9 * c.radius.max(1.0));
        }

        let db = directional_bound(&p, &fan, &s(1.0), &s(-0.5), &crate::merit::default_t_schedule(), 1e-9).unwrap();
        assert_eq!((db.bracket.lower, db.psi, db.holds), (-1.0, 1.0, true));
    }

    #[test]
    fn banach_examples() {
        let b = banach_constants(&Matrix::from_element(1, 1, 2.0)).unwrap();
        assert_eq!((b.c_dual, b.c_primal, b.sur), (2.0, 0.5, 2.0));
        let b = banach_constants(&Matrix::identity(2, 2)).unwrap();
        assert_eq!((b.c_dual, b.c_primal, b.sur), (1.0, 1.0, 1.0));
        let b = banach_constants(&Matrix::from_diagonal(&Vector::from_column_slice(&[1.0, 3.0]))).unwrap();
        assert!((b.c_dual - 1.0).abs() < 1e-15 && (b.c_primal - 1.0).abs() < 1e-15);
        assert!(matches!(banach_constants(&Matrix::zeros(2, 2)), Err(Error::RankDeficient { .. })));
        assert!(matches!(banach_constants(&Matrix::zeros(3, 2)), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn superset_examples() {
        let p = instances::i1().problem;
        let fan = OperatorFan::of_map(p.map()).unwrap();
        let r = tangent_superset_check(&p, &s(0.0), &fan, 0, 0).unwrap();
        assert_eq!(r.in_superset, vec![s(-1.0)]);
        assert!(r.failures.is_empty());
        let r = tangent_superset_check(&p, &s(-1.0), &fan, 0, 0).unwrap();
        assert!(r.failures.is_empty());
        assert!(matches!(tangent_superset_check(&p, &s(1.0), &fan, 0, 0), Err(Error::NotASolution { .. })));
    }
}
