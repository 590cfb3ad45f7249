//! Problem-file generators for robust feasibility and ideal points.

use setinc_core::setvalued::AffineGenerator;
use setinc_core::{ConvexSet, Matrix, Problem, SetMap, Vector};

use crate::problem_file::{ProblemFile, TargetSpec};
use crate::CliError;

/// Robust constraint `P(ω) x ∈ C` for every scenario `ω`: with
/// `F(x) = conv{P(ω) x}` the inclusion `F(x) ⊆ C` holds exactly when every
/// scenario is satisfied, by convexity of `C`.
pub fn build_robust(scenarios: Vec<Matrix>, target: &TargetSpec) -> Result<ProblemFile, CliError> {
    let map = SetMap::fan(scenarios)?;
    let target: ConvexSet = target.build()?;
    let problem = Problem::infer(map, target)?;
    Ok(ProblemFile::from_problem(&problem, Some("robust"), None))
}

/// Ideal point of `f(R)` for linear `f = M`: `F(x) = conv{M r − M x : r ∈ R}`
/// and `C = ℝᵐ₊`, so `F(x) ⊆ C` iff `M x` is dominated by every `M r`.
pub fn build_ideal(points: &[Vector], objective: &Matrix) -> Result<ProblemFile, CliError> {
    if points.is_empty() {
        return Err(CliError::Parse("ideal-point builder needs at least one point".into()));
    }
    let (m, n) = objective.shape();
    let gens = points
        .iter()
        .map(|r| {
            crate::check_len(r, n, "point")?;
            Ok(AffineGenerator::new(-objective, objective * r))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let map = SetMap::affine_fan(gens)?;
    let problem = Problem::infer(map, ConvexSet::nonnegative_orthant(m)?)?;
    let solution_set = (objective == &Matrix::identity(m, n) && m == n).then(|| {
        // x ≤ componentwise minimum of R
        let normals = (0..n).map(|i| unit(n, i)).collect();
        let offsets = (0..n).map(|i| points.iter().map(|r| r[i]).fold(f64::INFINITY, f64::min)).collect();
        setinc_core::analysis::Polyhedron::new(normals, offsets)
    });
    let solution_set = solution_set.transpose()?;
    Ok(ProblemFile::from_problem(&problem, Some("ideal"), solution_set.as_ref()))
}

fn unit(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}
