//! Command implementations; each returns a [`Report`].

use std::path::PathBuf;

use serde_json::{json, Value};
use setinc_core::analysis::{audit_error_bound, estimate_erbom, tangent_test, AuditVerdict, TangentVerdict};
use setinc_core::merit::default_t_schedule;
use setinc_core::prederivative::{
    banach_constants, bconst, directional_bound, flat, psi_h, verify_prederivative, DualRestriction, FanAssignment,
    OperatorFan,
};
use setinc_core::solver::{certify_solution, solve, SolveOptions, SolveStatus};
use setinc_core::{sphere_sample, Error, Matrix, Vector};

use crate::report::{mat_json, real, vec_json};
use crate::{check_len, parse_region, CliError, Loaded, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    Full,
    Cone,
}

/// Flags shared by the problem commands; unset values take per-command
/// defaults.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub seed: u64,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub region: Option<String>,
    pub tau: Option<f64>,
    pub restriction: Option<Restriction>,
    pub trace: Option<PathBuf>,
    pub max_iter: Option<usize>,
}

const DEFAULT_REGION: f64 = 5.0;
const PREDERIV_RADII: [f64; 4] = [1.0, 0.1, 0.01, 0.001];

fn region(loaded: &Loaded, opts: &Options) -> Result<(Vector, Vector, String), CliError> {
    let n = loaded.problem.n();
    let text = opts.region.clone().unwrap_or_else(|| format!("{},{}", -DEFAULT_REGION, DEFAULT_REGION));
    let (lo, hi) = parse_region(&text, n)?;
    Ok((lo, hi, text))
}

fn base(command: &str, loaded: &Loaded, opts: &Options) -> Report {
    let t = loaded.problem.tol();
    Report::new(command, Some(loaded.hash())).config("seed", opts.seed).config(
        "tolerances",
        json!({ "feas": t.feas, "tie": t.tie, "mnp": t.mnp, "proj": t.proj }),
    )
}

/// Coordinate directions `±e_i` followed by `count` sphere samples.
fn probe_directions(n: usize, count: usize, seed: u64) -> Result<Vec<Vector>, CliError> {
    let mut out = Vec::with_capacity(2 * n + count);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = Vector::zeros(n);
            e[i] = s;
            out.push(e);
        }
    }
    out.extend(sphere_sample(n, count, seed, None)?);
    Ok(out)
}

pub fn eval(loaded: &Loaded, x: &Vector, opts: &Options) -> Result<Report, CliError> {
    let p = &loaded.problem;
    check_len(x, p.n(), "x")?;
    let samples = opts.samples.unwrap_or(1000);
    let m = p.merit(x)?;
    let feasible = m.value <= p.tol().feas;
    let witnesses: Vec<Value> = m
        .witnesses
        .iter()
        .map(|w| {
            json!({
                "index": w.index,
                "point": vec_json(&w.point),
                "projection": vec_json(&w.projection),
                "dual": vec_json(&w.dual),
            })
        })
        .collect();
    let sampled = match p.merit_dual_sampled(x, samples, opts.seed) {
        Ok(v) => real(v),
        Err(Error::NotFanNormalizable) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    let slope = if feasible { Value::Null } else { real(p.slope(x)?) };
    let mut r = base("eval", loaded, opts).config("samples", samples);
    r.result = json!({
        "x": vec_json(x),
        "merit": real(m.value),
        "feasible": feasible,
        "witnesses": witnesses,
        "subgradient": vec_json(&m.subgradient),
        "slope": slope,
        "dual_sampled": sampled,
    });
    Ok(r)
}

pub fn run_solve(loaded: &Loaded, x0: &Vector, opts: &Options) -> Result<Report, CliError> {
    let p = &loaded.problem;
    check_len(x0, p.n(), "x0")?;
    let sopts = SolveOptions {
        max_iter: opts.max_iter.unwrap_or(1000),
        tol_feas: opts.tol.unwrap_or(1e-9),
        ..SolveOptions::default()
    };
    let run = solve(p, x0, &sopts)?;
    if let Some(path) = &opts.trace {
        write_trace(path, &run.trace)?;
    }
    let mut r = base("solve", loaded, opts)
        .config("tol", sopts.tol_feas)
        .config("max_iter", sopts.max_iter)
        .config("step_rule", "polyak")
        .config("trace", opts.trace.as_ref().map(|p| p.display().to_string()));
    r.result = json!({
        "x0": vec_json(x0),
        "status": match run.status { SolveStatus::Solved => "Solved", SolveStatus::IterCap => "IterCap" },
        "x_final": vec_json(&run.x_final),
        "nu_final": real(run.nu_final),
        "iterations": run.iterations,
        "suspected_unsolvable": run.suspected_unsolvable,
        "trace_rows": run.trace.len(),
    });
    Ok(r)
}

fn write_trace(path: &PathBuf, rows: &[setinc_core::solver::TraceRow]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["iter", "nu", "step", "slope"]).map_err(io)?;
    for row in rows {
        w.write_record([row.iter.to_string(), row.nu.to_string(), row.step.to_string(), row.slope.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn certify(loaded: &Loaded, x: &Vector, opts: &Options) -> Result<Report, CliError> {
    let p = &loaded.problem;
    check_len(x, p.n(), "x")?;
    let tol = opts.tol.unwrap_or(1e-9);
    let c = certify_solution(p, x, tol)?;
    let gens: Vec<Value> = c
        .per_generator
        .iter()
        .map(|(y, d)| json!({ "point": vec_json(y), "distance": real(*d) }))
        .collect();
    let mut r = base("certify", loaded, opts).config("tol", tol);
    r.result = json!({
        "x": vec_json(x),
        "feasible": c.feasible,
        "merit": real(c.merit),
        "consistent": c.consistent,
        "per_generator": gens,
    });
    Ok(r)
}

pub fn audit(loaded: &Loaded, opts: &Options) -> Result<Report, CliError> {
    let p = &loaded.problem;
    let (lo, hi, region_text) = region(loaded, opts)?;
    let samples = opts.samples.unwrap_or(1000);
    let est = estimate_erbom(p, &lo, &hi, samples, opts.seed, &[])?;
    let tau = opts.tau.unwrap_or(est.tau_hat);
    let audit_seed = opts.seed.wrapping_add(1);
    let sopts = SolveOptions { tol_feas: opts.tol.unwrap_or(1e-9), ..SolveOptions::default() };
    let a = audit_error_bound(p, tau, &lo, &hi, samples, audit_seed, loaded.solution_set.as_ref(), &sopts)?;
    let flagged: Vec<Value> = a
        .entries
        .iter()
        .filter(|e| e.verdict != AuditVerdict::Confirmed)
        .take(20)
        .map(|e| {
            json!({
                "x": vec_json(&e.x),
                "nu": real(e.nu),
                "bound": real(e.bound),
                "solver_distance": real(e.solver_distance),
                "exact_distance": e.exact_distance.map(real),
                "verdict": e.verdict.as_str(),
            })
        })
        .collect();
    let mut r = base("audit", loaded, opts)
        .config("region", region_text)
        .config("samples", samples)
        .config("audit_seed", audit_seed)
        .config("tau", opts.tau.map(real))
        .config("tol", sopts.tol_feas);
    r.result = json!({
        "estimate": {
            "tau_hat": real(est.tau_hat),
            "argmin": vec_json(&est.argmin),
            "infeasible_samples": est.samples.len(),
            "scope": "sampled region",
        },
        "audit": {
            "tau": real(tau),
            "exact_solution_set": loaded.solution_set.is_some(),
            "confirmed": a.confirmed,
            "unresolved": a.unresolved,
            "violated": a.violated,
            "flagged": flagged,
        },
    });
    Ok(r)
}

/// Directions of the default tangent sweep: 41 evenly spaced points of
/// `[−1, 1]` on the line, coordinate and sampled unit directions otherwise.
pub fn tangent_directions(n: usize, samples: usize, seed: u64) -> Result<Vec<Vector>, CliError> {
    if n == 1 {
        return Ok((0..=40).map(|k| Vector::from_element(1, -1.0 + k as f64 / 20.0)).collect());
    }
    probe_directions(n, samples, seed)
}

pub fn tangent(loaded: &Loaded, xbar: &Vector, dirs: Option<Vec<Vector>>, opts: &Options) -> Result<Report, CliError> {
    let p = &loaded.problem;
    check_len(xbar, p.n(), "x")?;
    let tol = opts.tol.unwrap_or(1e-9);
    let samples = opts.samples.unwrap_or(32);
    let explicit = dirs.is_some();
    let dirs = match dirs {
        Some(d) => d,
        None => tangent_directions(p.n(), samples, opts.seed)?,
    };
    let ts = default_t_schedule();
    let mut rows = Vec::with_capacity(dirs.len());
    let mut counts = [0usize; 3];
    for v in &dirs {
        check_len(v, p.n(), "direction")?;
        let verdict = tangent_test(p, xbar, v, &ts, tol)?;
        let detail = match verdict {
            TangentVerdict::InCone { t, quotient } => {
                counts[0] += 1;
                json!({ "t": t, "quotient": real(quotient) })
            }
            TangentVerdict::NotInCone { quotient, growth } => {
                counts[1] += 1;
                json!({ "quotient": real(quotient), "growth": real(growth) })
            }
            TangentVerdict::Unresolved { lower, upper } => {
                counts[2] += 1;
                json!({ "lower": real(lower), "upper": real(upper) })
            }
        };
        rows.push(json!({ "v": vec_json(v), "verdict": verdict.label(), "detail": detail }));
    }
    let mut r = base("tangent", loaded, opts)
        .config("tol", tol)
        .config("t_schedule", ts.clone())
        .config("directions", if explicit { "explicit" } else { "default sweep" });
    if !explicit && p.n() > 1 {
        r = r.config("samples", samples);
    }
    r.result = json!({
        "x": vec_json(xbar),
        "in_cone": counts[0],
        "not_in_cone": counts[1],
        "unresolved": counts[2],
        "verdicts": rows,
    });
    Ok(r)
}

fn fan_or_self(loaded: &Loaded, fan: Option<Vec<Matrix>>) -> Result<(OperatorFan, &'static str), CliError> {
    match fan {
        Some(ops) => Ok((OperatorFan::new(ops)?, "explicit")),
        None => Ok((OperatorFan::of_map(loaded.problem.map())?, "self")),
    }
}

pub fn prederiv(loaded: &Loaded, x0: &Vector, fan: Option<Vec<Matrix>>, opts: &Options) -> Result<Report, CliError> {
    let p = &loaded.problem;
    check_len(x0, p.n(), "x0")?;
    let (fan, source) = fan_or_self(loaded, fan)?;
    let samples = opts.samples.unwrap_or(16);
    let tol = opts.tol.unwrap_or(1e-9);
    let inclusion = verify_prederivative(p.map(), x0, &fan, &PREDERIV_RADII, samples, opts.seed)?;
    let cone = p.target().is_cone().then(|| DualRestriction::ConeRestricted(p.target().clone()));
    let ts = default_t_schedule();
    let mut table = Vec::new();
    let mut all_hold = true;
    for v in probe_directions(p.n(), samples, opts.seed.wrapping_add(1))? {
        let db = directional_bound(p, &fan, x0, &v, &ts, tol)?;
        all_hold &= db.holds;
        let psi_cone = match &cone {
            Some(c) => real(psi_h(&fan, &v, c)?),
            None => Value::Null,
        };
        table.push(json!({
            "v": vec_json(&v),
            "psi_full": real(db.psi),
            "psi_cone": psi_cone,
            "dirderiv_lower": real(db.bracket.lower),
            "dirderiv_upper": real(db.bracket.upper),
            "holds": db.holds,
        }));
    }
    let mut r = base("prederiv", loaded, opts)
        .config("fan", source)
        .config("samples", samples)
        .config("radii", PREDERIV_RADII.to_vec())
        .config("tol", tol);
    r.result = json!({
        "x0": vec_json(x0),
        "fan": fan.ops().iter().map(mat_json).collect::<Vec<_>>(),
        "inclusion": {
            "radii": inclusion.radii.iter().map(|c| json!({ "radius": c.radius, "epsilon": real(c.epsilon) })).collect::<Vec<_>>(),
            "exact": inclusion.exact,
            "vanishing": inclusion.vanishing,
        },
        "directional_bound_holds": all_hold,
        "psi_table": table,
    });
    Ok(r)
}

pub fn run_bconst(loaded: &Loaded, fan: Option<Vec<Matrix>>, opts: &Options) -> Result<Report, CliError> {
    let p = &loaded.problem;
    let (fan, source) = fan_or_self(loaded, fan)?;
    let choice = opts.restriction.unwrap_or(if p.target().is_cone() { Restriction::Cone } else { Restriction::Full });
    let restriction = match choice {
        Restriction::Full => DualRestriction::Full,
        Restriction::Cone => DualRestriction::cone(p.target())?,
    };
    let grid = opts.samples.unwrap_or(256);
    let refine = 200;
    let b = bconst(&fan, &restriction, grid, refine, opts.seed)?;
    let full = bconst(&fan, &DualRestriction::Full, grid, refine, opts.seed)?;
    let (lo, hi, region_text) = region(loaded, opts)?;
    let fl = flat(p, &FanAssignment::Stationary(fan.clone()), &restriction, &lo, &hi, 0, opts.seed, grid, refine)?;
    let slope = match estimate_erbom(p, &lo, &hi, 1000, opts.seed, &[]) {
        Ok(e) => Some(e),
        Err(Error::NoInfeasibleSamples) => None,
        Err(e) => return Err(e.into()),
    };
    let comparison = slope.as_ref().map(|e| {
        json!({
            "tau_hat": real(e.tau_hat),
            "argmin": vec_json(&e.argmin),
            "bconst_le_slope": b.value <= e.tau_hat + 1e-9,
        })
    });
    let mut r = base("bconst", loaded, opts)
        .config("restriction", restriction.label())
        .config("fan", source)
        .config("grid", grid)
        .config("refine_iters", refine)
        .config("region", region_text)
        .config("slope_samples", 1000);
    r.result = json!({
        "bconst": real(b.value),
        "argmax": vec_json(&b.argmax),
        "flat": real(fl.value),
        "full_sphere_bconst": real(full.value),
        "full_sphere_note": "over the whole symmetric sphere the inner infimum is -max_i |A_i v|, so this value is never positive",
        "slope_comparison": comparison,
    });
    Ok(r)
}

pub fn banach(matrix: &Matrix) -> Result<Report, CliError> {
    let b = banach_constants(matrix)?;
    let mut r = Report::new("banach", None).config("matrix", mat_json(matrix));
    r.result = json!({
        "c_dual": real(b.c_dual),
        "c_primal": real(b.c_primal),
        "sur": real(b.sur),
        "product": real(b.c_dual * b.c_primal),
    });
    Ok(r)
}
