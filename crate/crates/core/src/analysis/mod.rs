//! Error bounds, audits of them, and tangent-cone membership.
//!
//! The error-bound constant is the infimum of the strong slope over the
//! infeasible region; here it is estimated by sampling a box, so every value
//! reported is region-restricted. Audits compare `dist(x, Solv)` against
//! `ν(x)/τ`, using either a solver-found solution (an upper bound on the
//! distance) or an exact [`Polyhedron`] description of `Solv`.

mod polyhedron;

pub use polyhedron::Polyhedron;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::merit::Problem;
use crate::setvalued::checks::uniform_in_box;
use crate::solver::{solve, SolveOptions, SolveStatus};
use crate::{check_dim, Error, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeSample {
    pub x: Vector,
    pub nu: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBoundEstimate {
    /// Smallest sampled slope over infeasible samples.
    pub tau_hat: f64,
    /// Infeasible samples, box draws first, then the extra points.
    pub samples: Vec<SlopeSample>,
    pub argmin: Vector,
}

fn check_box(lower: &Vector, upper: &Vector) -> Result<()> {
    check_dim(lower.len(), upper.len())?;
    if lower.iter().zip(upper.iter()).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
        return Err(Error::InvalidProblem("region box must satisfy lower < upper componentwise".into()));
    }
    Ok(())
}

/// `n_samples` uniform points of the box, drawn from a single stream so that
/// a larger count extends a smaller one.
pub fn box_samples(lower: &Vector, upper: &Vector, n_samples: usize, seed: u64) -> Result<Vec<Vector>> {
    check_box(lower, upper)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_samples).map(|_| uniform_in_box(&mut rng, lower, upper)).collect())
}

/// Estimates the error-bound constant as the smallest slope over infeasible
/// box samples and `extra_points` (typically solver iterates).
pub fn estimate_erbom(
    problem: &Problem,
    lower: &Vector,
    upper: &Vector,
    n_samples: usize,
    seed: u64,
    extra_points: &[Vector],
) -> Result<ErrorBoundEstimate> {
    check_dim(problem.n(), lower.len())?;
    let points = box_samples(lower, upper, n_samples, seed)?;
    let mut samples = Vec::new();
    for x in points.iter().chain(extra_points) {
        check_dim(problem.n(), x.len())?;
        let nu = problem.value(x)?;
        if nu > problem.tol().feas {
            samples.push(SlopeSample { x: x.clone(), nu, slope: problem.slope(x)? });
        }
    }
    let best = samples
        .iter()
        .min_by(|a, b| a.slope.total_cmp(&b.slope))
        .ok_or(Error::NoInfeasibleSamples)?;
    Ok(ErrorBoundEstimate { tau_hat: best.slope, argmin: best.x.clone(), samples: samples.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditVerdict {
    Confirmed,
    /// The solver solution is too far, but it need not be the nearest one.
    Unresolved,
    /// The exact distance exceeds `ν(x)/τ`.
    Violated,
}

impl AuditVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            AuditVerdict::Confirmed => "CONFIRMED",
            AuditVerdict::Unresolved => "UNRESOLVED",
            AuditVerdict::Violated => "VIOLATED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditEntry {
    pub x: Vector,
    pub nu: f64,
    /// `ν(x)/τ`.
    pub bound: f64,
    /// `‖x − x_found‖` for the solver solution, `+∞` if the solver failed.
    pub solver_distance: f64,
    pub exact_distance: Option<f64>,
    pub verdict: AuditVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub tau: f64,
    pub entries: Vec<AuditEntry>,
    pub confirmed: usize,
    pub unresolved: usize,
    pub violated: usize,
}

/// Absolute slack used when comparing distances with `ν(x)/τ`.
pub fn audit_slack(x: &Vector) -> f64 {
    1e-9 * (1.0 + x.amax())
}

/// Checks `dist(x, Solv) ≤ ν(x)/τ` at sampled points of the box.
pub fn audit_error_bound(
    problem: &Problem,
    tau: f64,
    lower: &Vector,
    upper: &Vector,
    n_samples: usize,
    seed: u64,
    exact: Option<&Polyhedron>,
    solve_opts: &SolveOptions,
) -> Result<AuditReport> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidProblem(format!("tau {tau} must be positive")));
    }
    check_dim(problem.n(), lower.len())?;
    if let Some(p) = exact {
        check_dim(problem.n(), p.dim())?;
    }
    let mut entries = Vec::with_capacity(n_samples);
    for x in box_samples(lower, upper, n_samples, seed)? {
        let nu = problem.value(&x)?;
        let bound = nu / tau;
        let slack = audit_slack(&x);
        let run = solve(problem, &x, solve_opts)?;
        let solver_distance = match run.status {
            SolveStatus::Solved => (&x - &run.x_final).norm(),
            SolveStatus::IterCap => f64::INFINITY,
        };
        let exact_distance = exact.map(|p| p.distance(&x)).transpose()?;
        let verdict = match exact_distance {
            Some(d) if d > bound + slack => AuditVerdict::Violated,
            Some(_) => AuditVerdict::Confirmed,
            None if solver_distance <= bound + slack => AuditVerdict::Confirmed,
            None => AuditVerdict::Unresolved,
        };
        entries.push(AuditEntry { x, nu, bound, solver_distance, exact_distance, verdict });
    }
    let count = |v: AuditVerdict| entries.iter().filter(|e| e.verdict == v).count();
    Ok(AuditReport {
        tau,
        confirmed: count(AuditVerdict::Confirmed),
        unresolved: count(AuditVerdict::Unresolved),
        violated: count(AuditVerdict::Violated),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TangentVerdict {
    /// `ν(x̄ + t v)/t ≤ tol` at this `t`.
    InCone { t: f64, quotient: f64 },
    /// Smallest-step quotient and fitted linear growth both exceed the
    /// tolerance.
    NotInCone { quotient: f64, growth: f64 },
    Unresolved { lower: f64, upper: f64 },
}

impl TangentVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            TangentVerdict::InCone { .. } => "InCone",
            TangentVerdict::NotInCone { .. } => "NotInCone",
            TangentVerdict::Unresolved { .. } => "Unresolved",
        }
    }
}

/// Decides whether `v` lies in the contingent cone of `Solv` at `x̄`, using
/// `T(Solv, x̄) = {v : ν′(x̄; v) ≤ 0}`.
pub fn tangent_test(problem: &Problem, xbar: &Vector, v: &Vector, t_schedule: &[f64], tol: f64) -> Result<TangentVerdict> {
    check_dim(problem.n(), xbar.len())?;
    check_dim(problem.n(), v.len())?;
    let base = problem.value(xbar)?;
    if base > problem.tol().feas {
        return Err(Error::NotASolution { merit: base });
    }
    let mut ts: Vec<f64> = t_schedule.iter().copied().filter(|t| *t > 0.0).collect();
    if ts.is_empty() {
        return Err(Error::InvalidProblem("t schedule needs a positive step".into()));
    }
    ts.sort_by(|a, b| b.total_cmp(a));

    let mut values = Vec::with_capacity(ts.len());
    for &t in &ts {
        let nu = problem.value(&(xbar + v * t))?;
        let q = nu / t;
        if q <= tol {
            return Ok(TangentVerdict::InCone { t, quotient: q });
        }
        values.push((t, nu, q));
    }

    let q_last = values[values.len() - 1].2;
    let tail = &values[values.len().saturating_sub(3)..];
    let growth = tail.iter().map(|(t, nu, _)| t * nu).sum::<f64>() / tail.iter().map(|(t, _, _)| t * t).sum::<f64>();
    let stable = values.len() < 2 || (q_last - values[values.len() - 2].2).abs() <= 0.5 * q_last;
    let margin = tol.max(1e-9);
    if q_last > tol + margin && growth > tol && stable {
        return Ok(TangentVerdict::NotInCone { quotient: q_last, growth });
    }
    let upper = values.iter().map(|(_, _, q)| *q).fold(f64::INFINITY, f64::min);
    Ok(TangentVerdict::Unresolved { lower: 0.0, upper })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakSharpRow {
    pub iter: usize,
    pub nu: f64,
    /// `ν(x_k)/τ`.
    pub bound: f64,
    /// Exact distance when available, else `‖x_k − x_last‖` when the last
    /// iterate is feasible.
    pub distance: Option<f64>,
    pub holds: bool,
    /// Largest subgradient norm seen up to this iterate.
    pub lipschitz: f64,
    /// `dist(x_{k+1})² ≤ dist(x_k)²(1 − τ²/L²)`, when both distances are exact.
    pub contracts: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakSharpReport {
    pub tau: f64,
    pub rows: Vec<WeakSharpRow>,
    pub all_hold: bool,
    /// The trace ends feasible and the final distance is within slack of 0.
    pub vanishing: bool,
    pub all_contract: bool,
}

/// Checks `dist(x_k, Solv) ≤ ν(x_k)/τ` along a sequence of iterates, and the
/// Polyak contraction `dist(x_{k+1})² ≤ dist(x_k)²(1 − τ²/L²)` where exact
/// distances are known.
pub fn weak_sharp_audit(problem: &Problem, iterates: &[Vector], tau: f64, exact: Option<&Polyhedron>) -> Result<WeakSharpReport> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidProblem(format!("tau {tau} must be positive")));
    }
    let last = iterates.last().ok_or_else(|| Error::InvalidProblem("empty trace".into()))?;
    let last_feasible = problem.value(last)? <= problem.tol().feas;
    let mut rows: Vec<WeakSharpRow> = Vec::with_capacity(iterates.len());
    let mut lipschitz: f64 = 0.0;
    for (k, x) in iterates.iter().enumerate() {
        let report = problem.merit(x)?;
        lipschitz = lipschitz.max(report.subgradient.norm());
        let bound = report.value / tau;
        let distance = match exact {
            Some(p) => Some(p.distance(x)?),
            None if last_feasible => Some((x - last).norm()),
            None => None,
        };
        let holds = distance.is_none_or(|d| d <= bound + audit_slack(x));
        rows.push(WeakSharpRow { iter: k, nu: report.value, bound, distance, holds, lipschitz, contracts: None });
    }
    if exact.is_some() {
        let l_max = lipschitz;
        for k in 0..rows.len().saturating_sub(1) {
            let (d0, d1) = (rows[k].distance.unwrap_or(0.0), rows[k + 1].distance.unwrap_or(0.0));
            let factor = if l_max > 0.0 { (1.0 - (tau / l_max).powi(2)).max(0.0) } else { 1.0 };
            rows[k].contracts = Some(d1 * d1 <= d0 * d0 * factor + audit_slack(&iterates[k]));
        }
    }
    let final_row = &rows[rows.len() - 1];
    let vanishing = last_feasible && final_row.distance.is_none_or(|d| d <= audit_slack(last).sqrt());
    Ok(WeakSharpReport {
        tau,
        all_hold: rows.iter().all(|r| r.holds),
        all_contract: rows.iter().all(|r| r.contracts != Some(false)),
        vanishing,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::merit::default_t_schedule;

    fn s(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn i1_estimate_and_audit() {
        let inst = instances::i1();
        let est = estimate_erbom(&inst.problem, &s(-5.0), &s(5.0), 1000, 7, &[]).unwrap();
        assert_eq!(est.tau_hat, 2.0);
        assert!(est.samples.iter().all(|smp| smp.x[0] > 0.0));
        let exact = inst.solution_set.as_ref();
        let a = audit_error_bound(&inst.problem, 2.0, &s(-5.0), &s(5.0), 50, 1, exact, &SolveOptions::default()).unwrap();
        assert_eq!((a.violated, a.unresolved, a.confirmed), (0, 0, 50));
        let a = audit_error_bound(&inst.problem, 3.0, &s(-5.0), &s(5.0), 50, 1, exact, &SolveOptions::default()).unwrap();
        assert_eq!(a.violated, a.entries.iter().filter(|e| e.x[0] > 0.0).count());
        assert!(a.violated > 0);
    }

    #[test]
    fn feasible_region_has_no_samples() {
        let p = instances::i1().problem;
        assert_eq!(estimate_erbom(&p, &s(-5.0), &s(-1.0), 10, 0, &[]), Err(Error::NoInfeasibleSamples));
    }

    #[test]
    fn i2_fan_tau_is_one() {
        let p = instances::i2_fan().problem;
        assert_eq!(estimate_erbom(&p, &s(-5.0), &s(5.0), 500, 3, &[]).unwrap().tau_hat, 1.0);
    }

    #[test]
    fn i1_tangent_examples() {
        let p = instances::i1().problem;
        let ts = default_t_schedule();
        let in_cone = tangent_test(&p, &s(0.0), &s(-1.0), &ts, 1e-9).unwrap();
        assert_eq!(in_cone, TangentVerdict::InCone { t: 1.0, quotient: 0.0 });
        match tangent_test(&p, &s(0.0), &s(1.0), &ts, 1e-9).unwrap() {
            TangentVerdict::NotInCone { quotient, growth } => assert_eq!((quotient, growth), (2.0, 2.0)),
            other => panic!("{other:?}"),
        }
        for v in [-3.0, 0.5, 7.0] {
            assert_eq!(tangent_test(&p, &s(-1.0), &s(v), &ts, 1e-9).unwrap().label(), "InCone");
        }
        assert_eq!(tangent_test(&p, &s(1.0), &s(1.0), &ts, 1e-9), Err(Error::NotASolution { merit: 2.0 }));
    }

    #[test]
    fn weak_sharp_on_i1_trace() {
        let inst = instances::i1();
        let run = solve(&inst.problem, &s(5.0), &SolveOptions::default()).unwrap();
        let r = weak_sharp_audit(&inst.problem, &run.iterates, 2.0, inst.solution_set.as_ref()).unwrap();
        assert!(r.all_hold && r.vanishing && r.all_contract);
        let constant = vec![s(-1.0); 4];
        let r = weak_sharp_audit(&inst.problem, &constant, 2.0, None).unwrap();
        assert!(r.all_hold && r.vanishing);
    }
}
