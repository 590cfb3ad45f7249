//! JSON problem files.
//!
//! Matrices are lists of rows. Every file carries `"version": 1`.

use serde::{Deserialize, Serialize};
use setinc_core::analysis::Polyhedron;
use setinc_core::convex::Shape;
use setinc_core::instances::Instance;
use setinc_core::setvalued::{AffineGenerator, AffinePiece};
use setinc_core::{ConvexSet, Matrix, MaxAffine, MinAffine, Mode, Problem, SetMap, Tolerances, Vector};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub m: usize,
    pub map: MapSpec,
    pub target: TargetSpec,
    pub mode: ModeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesSpec>,
    /// Exact solution set `{x : ⟨a_j, x⟩ ≤ b_j}` when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_set: Option<PolyhedronSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Bounded,
    Cone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSpec {
    pub feas: f64,
    pub tie: f64,
    pub mnp: f64,
    pub proj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub gradient: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub matrix: Rows,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    AffineFan { generators: Vec<GeneratorSpec> },
    Radial { pieces: Vec<PieceSpec>, codomain_dim: usize },
    Interval { psi: Vec<PieceSpec>, phi: Vec<PieceSpec> },
    Sum { left: Box<MapSpec>, right: Box<MapSpec> },
    Scale { factor: f64, inner: Box<MapSpec> },
    PreLinear { matrix: Rows, inner: Box<MapSpec> },
    Product { left: Box<MapSpec>, right: Box<MapSpec> },
    SingletonPoly { coefficients: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Vpolytope { vertices: Rows },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Hcone { normals: Rows },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyhedronSpec {
    pub normals: Rows,
    pub offsets: Vec<f64>,
}

pub fn matrix_from_rows(rows: &Rows) -> Result<Matrix, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(CliError::Parse("matrix must have at least one nonempty row".into()));
    }
    if let Some(bad) = rows.iter().find(|row| row.len() != c) {
        return Err(CliError::Dimension(format!("ragged matrix: row of length {} where {c} expected", bad.len())));
    }
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    if data.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Parse("matrix entries must be finite".into()));
    }
    Ok(Matrix::from_row_slice(r, c, &data))
}

pub fn rows_from_matrix(m: &Matrix) -> Rows {
    m.row_iter().map(|row| row.iter().copied().collect()).collect()
}

pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn vectors(rows: &Rows) -> Vec<Vector> {
    rows.iter().map(|r| vector(r)).collect()
}

fn pieces(specs: &[PieceSpec]) -> Vec<AffinePiece> {
    specs.iter().map(|p| AffinePiece::new(vector(&p.gradient), p.offset)).collect()
}

fn piece_specs(pieces: &[AffinePiece]) -> Vec<PieceSpec> {
    pieces.iter().map(|p| PieceSpec { gradient: p.gradient.as_slice().to_vec(), offset: p.offset }).collect()
}

impl MapSpec {
    pub fn build(&self) -> Result<SetMap, CliError> {
        Ok(match self {
            MapSpec::AffineFan { generators } => {
                let gens = generators
                    .iter()
                    .map(|g| Ok(AffineGenerator::new(matrix_from_rows(&g.matrix)?, vector(&g.offset))))
                    .collect::<Result<Vec<_>, CliError>>()?;
                SetMap::affine_fan(gens)?
            }
            MapSpec::Radial { pieces: p, codomain_dim } => SetMap::radial(MaxAffine::new(pieces(p))?, *codomain_dim)?,
            MapSpec::Interval { psi, phi } => {
                SetMap::interval(MinAffine::new(pieces(psi))?, MaxAffine::new(pieces(phi))?)?
            }
            MapSpec::Sum { left, right } => SetMap::sum(left.build()?, right.build()?)?,
            MapSpec::Scale { factor, inner } => SetMap::scale(*factor, inner.build()?)?,
            MapSpec::PreLinear { matrix, inner } => SetMap::pre_linear(matrix_from_rows(matrix)?, inner.build()?)?,
            MapSpec::Product { left, right } => SetMap::product(left.build()?, right.build()?)?,
            MapSpec::SingletonPoly { coefficients } => SetMap::singleton_poly(coefficients.clone())?,
        })
    }

    pub fn from_map(map: &SetMap) -> Self {
        match map {
            SetMap::AffineFan { generators } => MapSpec::AffineFan {
                generators: generators
                    .iter()
                    .map(|g| GeneratorSpec { matrix: rows_from_matrix(&g.matrix), offset: g.offset.as_slice().to_vec() })
                    .collect(),
            },
            SetMap::Radial { rho, codomain_dim } => {
                MapSpec::Radial { pieces: piece_specs(rho.pieces()), codomain_dim: *codomain_dim }
            }
            SetMap::Interval { psi, phi } => {
                MapSpec::Interval { psi: piece_specs(psi.pieces()), phi: piece_specs(phi.pieces()) }
            }
            SetMap::Sum(l, r) => MapSpec::Sum { left: Box::new(Self::from_map(l)), right: Box::new(Self::from_map(r)) },
            SetMap::Scale(f, inner) => MapSpec::Scale { factor: *f, inner: Box::new(Self::from_map(inner)) },
            SetMap::PreLinear(t, inner) => {
                MapSpec::PreLinear { matrix: rows_from_matrix(t), inner: Box::new(Self::from_map(inner)) }
            }
            SetMap::Product(l, r) => {
                MapSpec::Product { left: Box::new(Self::from_map(l)), right: Box::new(Self::from_map(r)) }
            }
            SetMap::SingletonPoly { coefficients } => MapSpec::SingletonPoly { coefficients: coefficients.clone() },
        }
    }
}

impl TargetSpec {
    pub fn build(&self) -> Result<ConvexSet, CliError> {
        Ok(match self {
            TargetSpec::Ball { center, radius } => ConvexSet::ball(vector(center), *radius)?,
            TargetSpec::Vpolytope { vertices } => ConvexSet::vpolytope(vectors(vertices))?,
            TargetSpec::Box { lower, upper } => ConvexSet::cube(vector(lower), vector(upper))?,
            TargetSpec::Hcone { normals } => ConvexSet::hcone(vectors(normals))?,
        })
    }

    pub fn from_set(set: &ConvexSet) -> Self {
        let rows = |vs: &[Vector]| vs.iter().map(|v| v.as_slice().to_vec()).collect();
        match set.shape() {
            Shape::Ball { center, radius } => TargetSpec::Ball { center: center.as_slice().to_vec(), radius: *radius },
            Shape::VPolytope { vertices } => TargetSpec::Vpolytope { vertices: rows(vertices) },
            Shape::Box { lower, upper } => {
                TargetSpec::Box { lower: lower.as_slice().to_vec(), upper: upper.as_slice().to_vec() }
            }
            Shape::HCone { normals } => TargetSpec::Hcone { normals: rows(normals) },
        }
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if file.version != FORMAT_VERSION {
            return Err(CliError::Parse(format!("unsupported version {} (expected {FORMAT_VERSION})", file.version)));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    /// Builds and validates the problem; declared dimensions must match.
    pub fn problem(&self) -> Result<Problem, CliError> {
        let map = self.map.build()?;
        let target = self.target.build()?;
        if map.domain_dim() != self.n {
            return Err(CliError::Dimension(format!("map domain is {} but n = {}", map.domain_dim(), self.n)));
        }
        if map.codomain_dim() != self.m || target.dim() != self.m {
            return Err(CliError::Dimension(format!(
                "m = {} but map codomain is {} and target dimension is {}",
                self.m,
                map.codomain_dim(),
                target.dim()
            )));
        }
        let mode = match self.mode {
            ModeSpec::Bounded => Mode::Bounded,
            ModeSpec::Cone => Mode::Cone,
        };
        let tol = self
            .tolerances
            .map(|t| Tolerances { feas: t.feas, tie: t.tie, mnp: t.mnp, proj: t.proj })
            .unwrap_or_default();
        Ok(Problem::with_tolerances(map, target, mode, tol)?)
    }

    pub fn solution_set(&self) -> Result<Option<Polyhedron>, CliError> {
        let Some(spec) = &self.solution_set else { return Ok(None) };
        let p = Polyhedron::new(vectors(&spec.normals), spec.offsets.clone())?;
        if p.dim() != self.n {
            return Err(CliError::Dimension(format!("solution set lives in dimension {} but n = {}", p.dim(), self.n)));
        }
        Ok(Some(p))
    }

    pub fn from_problem(problem: &Problem, name: Option<&str>, solution_set: Option<&Polyhedron>) -> Self {
        let t = problem.tol();
        let tolerances = (*t != Tolerances::default())
            .then_some(TolerancesSpec { feas: t.feas, tie: t.tie, mnp: t.mnp, proj: t.proj });
        ProblemFile {
            version: FORMAT_VERSION,
            name: name.map(str::to_owned),
            n: problem.n(),
            m: problem.m(),
            map: MapSpec::from_map(problem.map()),
            target: TargetSpec::from_set(problem.target()),
            mode: match problem.mode() {
                Mode::Bounded => ModeSpec::Bounded,
                Mode::Cone => ModeSpec::Cone,
            },
            tolerances,
            solution_set: solution_set.map(|p| PolyhedronSpec {
                normals: p.normals().iter().map(|a| a.as_slice().to_vec()).collect(),
                offsets: p.offsets().to_vec(),
            }),
        }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        Self::from_problem(&inst.problem, Some(inst.name), inst.solution_set.as_ref())
    }
}
