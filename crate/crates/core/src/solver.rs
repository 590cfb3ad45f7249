//! Solving `F(x) ⊆ C` by minimizing ν.
//!
//! Solutions are exactly the zeros of ν, which are also its global
//! minimizers, so the optimal value is known to be `0` whenever the problem
//! is solvable. This makes the Polyak step `x⁺ = x − ν(x)/‖g‖² · g` available;
//! under a global error bound `dist(x, Solv) ≤ ν(x)/τ` it contracts the
//! distance to the solution set linearly.

use crate::merit::Problem;
use crate::setvalued::MaxAffine;
use crate::{check_dim, Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `ν(x)/‖g‖²`, using the optimal value 0.
    Polyak,
    /// Step length `c/√(k+1)` along `−g/‖g‖`.
    Diminishing { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol_feas: f64,
    pub step_rule: StepRule,
    /// Iterations without a 1% improvement of the best ν after which the
    /// solver falls back to diminishing steps and flags possible
    /// unsolvability.
    pub stall_window: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iter: 1000, tol_feas: 1e-9, step_rule: StepRule::Polyak, stall_window: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    IterCap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub nu: f64,
    /// Length of the step taken from this iterate (0 on the last row).
    pub step: f64,
    /// `dist(0, ∂ν(x))` at infeasible iterates, 0 at feasible ones.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// First feasible iterate, or the best one on [`SolveStatus::IterCap`].
    pub x_final: Vector,
    pub nu_final: f64,
    pub status: SolveStatus,
    /// Number of steps taken before termination.
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub iterates: Vec<Vector>,
    /// Set when ν stalled above the tolerance or a zero subgradient was met
    /// at an infeasible point.
    pub suspected_unsolvable: bool,
}

/// Subgradient method on ν started at `x0`.
pub fn solve(problem: &Problem, x0: &Vector, opts: &SolveOptions) -> Result<SolveResult> {
    check_dim(problem.n(), x0.len())?;
    if opts.max_iter == 0 {
        return Err(Error::InvalidProblem("max_iter must be at least 1".into()));
    }
    let mut x = x0.clone();
    let mut rule = opts.step_rule;
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let mut best = (x0.clone(), f64::INFINITY);
    let mut last_improvement = 0;
    let mut suspected_unsolvable = false;

    for k in 0..=opts.max_iter {
        let report = problem.merit(&x)?;
        let nu = report.value;
        iterates.push(x.clone());
        if nu <= opts.tol_feas {
            trace.push(TraceRow { iter: k, nu, step: 0.0, slope: 0.0 });
            return Ok(SolveResult {
                x_final: x,
                nu_final: nu,
                status: SolveStatus::Solved,
                iterations: k,
                trace,
                iterates,
                suspected_unsolvable,
            });
        }
        let slope = problem.slope(&x).unwrap_or_else(|_| report.subgradient.norm());
        if nu < 0.99 * best.1 {
            last_improvement = k;
        }
        if nu < best.1 {
            best = (x.clone(), nu);
        }
        let g = report.subgradient;
        let gnorm = g.norm();
        if k == opts.max_iter || gnorm == 0.0 {
            suspected_unsolvable |= gnorm == 0.0;
            trace.push(TraceRow { iter: k, nu, step: 0.0, slope });
            break;
        }
        if k - last_improvement >= opts.stall_window {
            if let StepRule::Polyak = rule {
                rule = StepRule::Diminishing { c: best.1 / gnorm.max(1.0) };
            }
            suspected_unsolvable = true;
        }
        let length = match rule {
            StepRule::Polyak => nu / gnorm,
            StepRule::Diminishing { c } => c / ((k + 1) as f64).sqrt(),
        };
        trace.push(TraceRow { iter: k, nu, step: length, slope });
        x -= g * (length / gnorm);
    }
    let iterations = trace.len() - 1;
    Ok(SolveResult {
        x_final: best.0,
        nu_final: best.1,
        status: SolveStatus::IterCap,
        iterations,
        trace,
        iterates,
        suspected_unsolvable,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub feasible: bool,
    pub merit: f64,
    /// Each generator of `F(x)` with its distance to `C`; empty for radial maps.
    pub per_generator: Vec<(Vector, f64)>,
    /// Generator containment and `ν(x) ≤ tol` agree.
    pub consistent: bool,
}

/// Certifies `F(x) ⊆ C` by generator containment, cross-checked with ν.
pub fn certify_solution(problem: &Problem, x: &Vector, tol: f64) -> Result<Certificate> {
    let merit = problem.value(x)?;
    let merit_feasible = merit <= tol;
    if !problem.map().is_fan_normalizable() {
        return Ok(Certificate { feasible: merit_feasible, merit, per_generator: Vec::new(), consistent: true });
    }
    let mut per_generator = Vec::new();
    for g in problem.map().local_generators(x, 0.0)? {
        let y = g.point;
        let d = problem.target().distance(&y)?;
        per_generator.push((y, d));
    }
    let feasible = per_generator.iter().all(|(_, d)| *d <= tol);
    Ok(Certificate { feasible, merit, per_generator, consistent: feasible == merit_feasible })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyOptions {
    pub max_iter: usize,
    /// Step length `c/√(k+1)` along the normalized subgradient.
    pub c: f64,
    pub tol_feas: f64,
}

impl Default for PenaltyOptions {
    fn default() -> Self {
        Self { max_iter: 100_000, c: 0.1, tol_feas: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyStatus {
    /// A zero subgradient of the penalized objective was found.
    Converged,
    IterCap,
    /// The penalized objective keeps decreasing far along the trajectory
    /// direction; `recession_slope` is the far-field slope observed.
    Diverged { recession_slope: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyResult {
    pub x_best: Vector,
    /// `ϑ(x) + λ ν(x)` at `x_best`.
    pub penalized_value: f64,
    pub objective_value: f64,
    pub merit_value: f64,
    pub feasible: bool,
    pub status: PenaltyStatus,
    pub iterations: usize,
    /// Largest gradient norm of the objective pieces.
    pub objective_lipschitz: f64,
}

impl PenaltyResult {
    /// Penalty weight `Lip(ϑ)/τ` above which the penalization is exact under
    /// an error bound with constant `τ`.
    pub fn exactness_threshold(&self, tau: f64) -> f64 {
        self.objective_lipschitz / tau
    }
}

/// Minimizes `ϑ(x) + λ ν(x)` by subgradient descent with diminishing steps.
pub fn penalty_minimize(
    problem: &Problem,
    objective: &MaxAffine,
    lambda: f64,
    x0: &Vector,
    opts: &PenaltyOptions,
) -> Result<PenaltyResult> {
    check_dim(problem.n(), x0.len())?;
    check_dim(problem.n(), objective.dim())?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidProblem(format!("penalty weight {lambda} must be positive")));
    }
    let penalized = |x: &Vector| -> Result<f64> { Ok(objective.value(x) + lambda * problem.value(x)?) };

    let mut x = x0.clone();
    let mut best = (x0.clone(), penalized(x0)?);
    let mut status = PenaltyStatus::IterCap;
    let mut iterations = opts.max_iter;
    for k in 0..opts.max_iter {
        let report = problem.merit(&x)?;
        let value = objective.value(&x) + lambda * report.value;
        if value < best.1 {
            best = (x.clone(), value);
        }
        let active = objective.active(&x, 0.0)[0];
        let g = &objective.pieces()[active].gradient + report.subgradient * lambda;
        let gnorm = g.norm();
        if gnorm == 0.0 {
            status = PenaltyStatus::Converged;
            iterations = k;
            break;
        }
        x -= g * (opts.c / (((k + 1) as f64).sqrt() * gnorm));
    }
    let last = penalized(&x)?;
    if last < best.1 {
        best = (x.clone(), last);
    }

    if status == PenaltyStatus::IterCap {
        let d = &x - x0;
        if d.norm() > 0.0 {
            let dir = &d / d.norm();
            let scale = 1.0 + x0.norm();
            let (s1, s2) = (1e6 * scale, 1e9 * scale);
            let f1 = penalized(&(x0 + &dir * s1))?;
            let f2 = penalized(&(x0 + &dir * s2))?;
            let slope = (f2 - f1) / (s2 - s1);
            if slope < -1e-6 {
                status = PenaltyStatus::Diverged { recession_slope: slope };
            }
        }
    }

    let (x_best, penalized_value) = best;
    let merit_value = problem.value(&x_best)?;
    Ok(PenaltyResult {
        objective_value: objective.value(&x_best),
        feasible: merit_value <= opts.tol_feas,
        merit_value,
        penalized_value,
        x_best,
        status,
        iterations,
        objective_lipschitz: objective.lipschitz(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn s(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn polyak_on_i1_takes_one_step() {
        let p = instances::i1().problem;
        let r = solve(&p, &s(5.0), &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Solved);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.x_final, s(0.0));
        assert_eq!(r.trace[0].nu, 10.0);
        assert_eq!(r.trace[0].step, 5.0);
        assert_eq!(r.trace[0].slope, 2.0);
    }

    #[test]
    fn feasible_start_solves_at_iteration_zero() {
        let p = instances::i1().problem;
        let r = solve(&p, &s(-1.0), &SolveOptions::default()).unwrap();
        assert_eq!((r.status, r.iterations), (SolveStatus::Solved, 0));
        assert_eq!(r.x_final, s(-1.0));
    }

    #[test]
    fn unsolvable_problem_is_flagged() {
        // F(x) = [x − 3, x + 3] is wider than [−1, 1], so ν ≥ 2 everywhere
        let map = crate::SetMap::affine_fan(vec![
            crate::setvalued::AffineGenerator::new(crate::Matrix::from_element(1, 1, 1.0), s(3.0)),
            crate::setvalued::AffineGenerator::new(crate::Matrix::from_element(1, 1, 1.0), s(-3.0)),
        ])
        .unwrap();
        let p = Problem::new(map, crate::ConvexSet::cube(s(-1.0), s(1.0)).unwrap(), crate::Mode::Bounded).unwrap();
        let r = solve(&p, &s(4.0), &SolveOptions { max_iter: 300, ..Default::default() }).unwrap();
        assert_eq!(r.status, SolveStatus::IterCap);
        assert!(r.suspected_unsolvable);
        assert!(r.nu_final >= 2.0 && r.nu_final < 2.0 + 1e-3);
    }

    #[test]
    fn certificates() {
        let p = instances::i1().problem;
        let c = certify_solution(&p, &s(0.0), 1e-9).unwrap();
        assert!(c.feasible && c.consistent);
        assert_eq!(c.per_generator.iter().map(|(_, d)| *d).collect::<Vec<_>>(), vec![0.0, 0.0]);
        let c = certify_solution(&p, &s(0.1), 1e-9).unwrap();
        assert!(!c.feasible && c.consistent);
        let max = c.per_generator.iter().map(|(_, d)| *d).fold(0.0, f64::max);
        assert!((max - 0.2).abs() < 1e-15);

        let i4 = instances::i4().problem;
        let c = certify_solution(&i4, &Vector::from_column_slice(&[1.0, 1.0]), 1e-9).unwrap();
        assert!(c.feasible && c.consistent);
    }

    #[test]
    fn zero_objective_penalty_reduces_to_solving() {
        let p = instances::i1().problem;
        let zero = MaxAffine::from_pairs(vec![(s(0.0), 0.0)]).unwrap();
        let r = penalty_minimize(&p, &zero, 1.0, &s(5.0), &PenaltyOptions::default()).unwrap();
        assert_eq!(r.status, PenaltyStatus::Converged);
        assert!(r.feasible);
    }
}
