//! The merit function
//!
//! ```text
//! ν(x) = sup_{‖b*‖ ≤ 1} [σ(b*, F(x)) − σ(b*, C)]
//! ```
//!
//! and its first-order objects.
//!
//! Evaluation is primal: for any closed convex `C`,
//! `dist(y, C) = sup_{‖b*‖ ≤ 1} [⟨b*, y⟩ − σ(b*, C)]`, so `ν(x)` is the
//! excess `max_i dist(y_i, C)` over the generators `y_i` of `F(x)`. The dual
//! supremum is kept as a sampled cross-check ([`Problem::merit_dual_sampled`]).
//! In cone mode the dual variables range over `B* ∩ C^⊖`, where `σ(·, C)`
//! vanishes; the primal formula is the same.
//!
//! When `ν(x) > 0` the maximizing duals are the unit normals
//! `b*_i = (y_i − P_C y_i)/‖y_i − P_C y_i‖` of the farthest generators, and
//! `∂ν(x)` is the convex hull of `Aᵀ b*_i` over the affine selections `A`
//! active in direction `b*_i`.

use crate::convex::{min_norm_point_with, sphere_sample, ProjectionOptions, Shape, SphereRestriction, DEDUP_TOL};
use crate::setvalued::{LocalGenerator, SetMap};
use crate::{check_dim, ConvexSet, Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `C` bounded; dual variables in the unit ball.
    Bounded,
    /// `C` a closed convex cone; dual variables in `B* ∩ C^⊖`.
    Cone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `ν(x) ≤ feas` counts as feasible.
    pub feas: f64,
    /// Relative slack for active-set extraction.
    pub tie: f64,
    /// Relative duality-gap tolerance of the minimum-norm-point solver.
    pub mnp: f64,
    /// Dykstra stopping tolerance for cone projections.
    pub proj: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { feas: 1e-9, tie: 1e-8, mnp: 1e-12, proj: 1e-10 }
    }
}

/// Data `(F, C)` of the inclusion `F(x) ⊆ C`, with `x` ranging over `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    map: SetMap,
    target: ConvexSet,
    mode: Mode,
    tol: Tolerances,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Index into [`SetMap::local_generators`] (0 for radial maps).
    pub index: usize,
    pub point: Vector,
    pub projection: Vector,
    /// Unit normal `(point − projection)/‖point − projection‖`.
    pub dual: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeritReport {
    pub value: f64,
    /// Generators attaining the value within the tie tolerance; empty at
    /// feasible points.
    pub witnesses: Vec<Witness>,
    /// A subgradient of ν at the evaluation point (zero at feasible points).
    pub subgradient: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdifferentialHull {
    pub generators: Vec<Vector>,
}

/// Bounds `lower ≤ ν′(x; v) ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    /// `−∞` when no subgradient information is available (feasible `x`).
    pub lower: f64,
    pub upper: f64,
}

/// Which directions [`Problem::merit_dual_sampled_with`] draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualSampling {
    /// Whole sphere in bounded mode, sphere ∩ `C^⊖` in cone mode.
    Natural,
    /// Whole sphere regardless of the mode.
    Unrestricted,
}

/// Geometric step schedule `1, 10⁻¹, …, 10⁻⁶`.
pub fn default_t_schedule() -> Vec<f64> {
    (0..=6).map(|k| 10f64.powi(-k)).collect()
}

impl Problem {
    pub fn new(map: SetMap, target: ConvexSet, mode: Mode) -> Result<Self> {
        Self::with_tolerances(map, target, mode, Tolerances::default())
    }

    /// Bounded mode for bounded targets, cone mode for H-cones.
    pub fn infer(map: SetMap, target: ConvexSet) -> Result<Self> {
        let mode = if target.is_cone() { Mode::Cone } else { Mode::Bounded };
        Self::new(map, target, mode)
    }

    pub fn with_tolerances(map: SetMap, target: ConvexSet, mode: Mode, tol: Tolerances) -> Result<Self> {
        map.validate()?;
        check_dim(target.dim(), map.codomain_dim())?;
        if (mode == Mode::Cone) != target.is_cone() {
            return Err(Error::InvalidProblem(match mode {
                Mode::Cone => "cone mode requires an H-cone target".into(),
                Mode::Bounded => "bounded mode requires a bounded target".into(),
            }));
        }
        for (name, v) in [("feas", tol.feas), ("tie", tol.tie), ("mnp", tol.mnp), ("proj", tol.proj)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidProblem(format!("tolerance {name} must be finite and nonnegative")));
            }
        }
        Ok(Self { map, target, mode, tol })
    }

    pub fn map(&self) -> &SetMap {
        &self.map
    }

    pub fn target(&self) -> &ConvexSet {
        &self.target
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    /// Dimension of the unknown.
    pub fn n(&self) -> usize {
        self.map.domain_dim()
    }

    /// Dimension of the values `F(x)`.
    pub fn m(&self) -> usize {
        self.map.codomain_dim()
    }

    fn proj_opts(&self) -> ProjectionOptions {
        ProjectionOptions { tol: self.tol.proj, ..ProjectionOptions::default() }
    }

    fn tie_slack(&self, value: f64) -> f64 {
        self.tol.tie * value.abs().max(1.0)
    }

    /// `ν(x)`.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.merit(x)?.value)
    }

    /// `ν(x)` with witnesses and a subgradient.
    pub fn merit(&self, x: &Vector) -> Result<MeritReport> {
        check_dim(self.n(), x.len())?;
        if let SetMap::Radial { .. } = &self.map {
            return self.radial_merit(x);
        }
        if !self.map.is_fan_normalizable() {
            return Err(Error::NotFanNormalizable);
        }
        let generators = self.map.local_generators(x, self.tol.tie)?;
        self.merit_from_generators(x, &generators)
    }

    fn merit_from_generators(&self, x: &Vector, generators: &[LocalGenerator]) -> Result<MeritReport> {
        let opts = self.proj_opts();
        // project each distinct point once
        let mut projected: Vec<(usize, Vector, f64)> = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            if projected.iter().any(|(j, _, _)| (&generators[*j].point - &g.point).amax() <= DEDUP_TOL) {
                continue;
            }
            let p = self.target.project_with(&g.point, &opts)?;
            let d = (&g.point - &p).norm();
            projected.push((i, p, d));
        }
        let value = projected.iter().map(|(_, _, d)| *d).fold(0.0, f64::max);
        if value <= self.tol.feas {
            return Ok(MeritReport { value, witnesses: Vec::new(), subgradient: Vector::zeros(x.len()) });
        }
        let slack = self.tie_slack(value);
        let witnesses: Vec<Witness> = projected
            .into_iter()
            .filter(|(_, _, d)| *d >= value - slack)
            .map(|(i, p, d)| {
                let y = generators[i].point.clone();
                let dual = (&y - &p) / d;
                Witness { index: i, point: y, projection: p, dual }
            })
            .collect();
        let first = &witnesses[0];
        let subgradient = generators[first.index].jacobian.transpose() * &first.dual;
        Ok(MeritReport { value, witnesses, subgradient })
    }

    fn radial_ball(&self) -> Result<(&crate::MaxAffine, &Vector, f64)> {
        let SetMap::Radial { rho, .. } = &self.map else {
            return Err(Error::NotFanNormalizable);
        };
        let Shape::Ball { center, radius } = self.target.shape() else {
            return Err(Error::RadialNeedsBallTarget);
        };
        Ok((rho, center, *radius))
    }

    /// Excess of `ρ(x)·B` over `B(c, r)`: `max(0, ρ(x) + ‖c‖ − r)`, attained
    /// at the point of `ρ(x)·B` opposite to `c`.
    fn radial_merit(&self, x: &Vector) -> Result<MeritReport> {
        let (rho, center, radius) = self.radial_ball()?;
        let r = rho.value(x);
        if r < 0.0 {
            return Err(Error::InvalidMap(format!("radial function negative at x: ρ = {r}")));
        }
        let value = (r + center.norm() - radius).max(0.0);
        if value <= self.tol.feas {
            return Ok(MeritReport { value, witnesses: Vec::new(), subgradient: Vector::zeros(x.len()) });
        }
        let away = if center.norm() > 0.0 { -center / center.norm() } else { crate::convex::unit(center.len(), 0, 1.0) };
        let point = away * r;
        let offset = &point - center;
        let dual = &offset / offset.norm();
        let projection = center + &dual * radius;
        let active = rho.active(x, self.tol.tie);
        let subgradient = rho.pieces()[active[0]].gradient.clone();
        Ok(MeritReport { value, witnesses: vec![Witness { index: 0, point, projection, dual }], subgradient })
    }

    /// Dual discretization of ν with `count` sampled unit directions (restricted
    /// to `C^⊖` in cone mode), floored at 0 to account for `b* = 0`.
    pub fn merit_dual_sampled(&self, x: &Vector, count: usize, seed: u64) -> Result<f64> {
        self.merit_dual_sampled_with(x, count, seed, DualSampling::Natural)
    }

    pub fn merit_dual_sampled_with(&self, x: &Vector, count: usize, seed: u64, sampling: DualSampling) -> Result<f64> {
        check_dim(self.n(), x.len())?;
        let restriction = match (self.mode, sampling) {
            (Mode::Cone, DualSampling::Natural) => Some(SphereRestriction::NegativePolarOf(&self.target)),
            _ => None,
        };
        let directions = match sphere_sample(self.m(), count, seed, restriction) {
            Ok(d) => d,
            Err(Error::EmptyRestriction) => Vec::new(),
            Err(e) => return Err(e),
        };
        let mut best: f64 = 0.0;
        for b in &directions {
            let sc = self.target.support(b)?;
            if sc.is_infinite() {
                continue;
            }
            best = best.max(self.map.support_map(x, b)? - sc);
        }
        Ok(best)
    }

    /// Generators of `∂ν(x)` at an infeasible point.
    pub fn subdifferential_hull(&self, x: &Vector) -> Result<SubdifferentialHull> {
        let report = self.merit(x)?;
        if report.value <= self.tol.feas {
            return Err(Error::AtSolutionPoint);
        }
        let mut generators: Vec<Vector> = Vec::new();
        let mut push = |g: Vector| {
            if !generators.iter().any(|h| (h - &g).amax() <= DEDUP_TOL) {
                generators.push(g);
            }
        };
        if let SetMap::Radial { rho, .. } = &self.map {
            for j in rho.active(x, self.tol.tie) {
                push(rho.pieces()[j].gradient.clone());
            }
            return Ok(SubdifferentialHull { generators });
        }
        let locals = self.map.local_generators(x, self.tol.tie)?;
        for w in &report.witnesses {
            let dots: Vec<f64> = locals.iter().map(|g| w.dual.dot(&g.point)).collect();
            let best = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let slack = self.tie_slack(best);
            for (g, d) in locals.iter().zip(&dots) {
                if *d >= best - slack {
                    push(g.jacobian.transpose() * &w.dual);
                }
            }
        }
        Ok(SubdifferentialHull { generators })
    }

    /// Strong slope `dist(0, ∂ν(x))` at an infeasible point.
    pub fn slope(&self, x: &Vector) -> Result<f64> {
        let hull = self.subdifferential_hull(x)?;
        let mnp = min_norm_point_with(&hull.generators, self.tol.mnp, 1000 + 20 * hull.generators.len())?;
        Ok(mnp.norm)
    }

    /// Brackets the directional derivative `ν′(x; v)`.
    ///
    /// The upper end is the smallest difference quotient over `t_schedule`
    /// (quotients of a convex function decrease as `t ↓ 0`); the lower end is
    /// `max ⟨g, v⟩` over the subdifferential generators, which equals
    /// `ν′(x; v)` whenever `ν(x) > 0`.
    pub fn dirderiv_bracket(&self, x: &Vector, v: &Vector, t_schedule: &[f64]) -> Result<Bracket> {
        check_dim(self.n(), v.len())?;
        let base = self.value(x)?;
        let mut upper = f64::INFINITY;
        for &t in t_schedule {
            if t <= 0.0 {
                continue;
            }
            let q = (self.value(&(x + v * t))? - base) / t;
            upper = upper.min(q);
        }
        let lower = if base > self.tol.feas {
            self.subdifferential_hull(x)?
                .generators
                .iter()
                .map(|g| g.dot(v))
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            f64::NEG_INFINITY
        };
        Ok(Bracket { lower, upper })
    }
}
