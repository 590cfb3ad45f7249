//! Reference instances with known solution sets.

use crate::analysis::Polyhedron;
use crate::setvalued::{AffineGenerator, MaxAffine, SetMap};
use crate::{ConvexSet, Matrix, Mode, Problem, Vector};

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: &'static str,
    pub problem: Problem,
    /// `Solv` as a polyhedron, when known in closed form.
    pub solution_set: Option<Polyhedron>,
}

pub const NAMES: [&str; 6] = ["i1", "i2", "i2-fan", "i3", "i3-cone", "i4"];

fn v(x: &[f64]) -> Vector {
    Vector::from_column_slice(x)
}

fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_row_slice(rows, cols, data)
}

fn build(name: &'static str, map: SetMap, target: ConvexSet, mode: Mode, solv: (Vec<Vector>, Vec<f64>)) -> Instance {
    let problem = Problem::new(map, target, mode).expect("builtin instance is valid");
    let solution_set = Some(Polyhedron::new(solv.0, solv.1).expect("builtin polyhedron is valid"));
    Instance { name, problem, solution_set }
}

/// `F(x) = conv{x, 2x}` on the line, `C = ℝ₋`; `Solv = ℝ₋`.
pub fn i1() -> Instance {
    let map = SetMap::fan(vec![m(1, 1, &[1.0]), m(1, 1, &[2.0])]).unwrap();
    let target = ConvexSet::nonpositive_orthant(1).unwrap();
    build("i1", map, target, Mode::Cone, (vec![v(&[1.0])], vec![0.0]))
}

/// `F(x) = |x|·B`, `C = 2B`; `Solv = [−2, 2]`.
pub fn i2() -> Instance {
    let map = SetMap::radial(MaxAffine::abs_1d(), 1).unwrap();
    let target = ConvexSet::ball(v(&[0.0]), 2.0).unwrap();
    build("i2", map, target, Mode::Bounded, (vec![v(&[1.0]), v(&[-1.0])], vec![2.0, 2.0]))
}

/// `F(x) = conv{x, −x}`, `C = [−2, 2]`; the fan form of [`i2`].
pub fn i2_fan() -> Instance {
    let map = SetMap::fan(vec![m(1, 1, &[1.0]), m(1, 1, &[-1.0])]).unwrap();
    let target = ConvexSet::cube(v(&[-2.0]), v(&[2.0])).unwrap();
    build("i2-fan", map, target, Mode::Bounded, (vec![v(&[1.0]), v(&[-1.0])], vec![2.0, 2.0]))
}

fn i3_map() -> SetMap {
    SetMap::fan(vec![Matrix::identity(2, 2), m(2, 2, &[1.0, 0.5, 0.0, 1.0])]).unwrap()
}

/// `F(x) = conv{x, A x}` with `A = [[1, ½], [0, 1]]`, `C = [−1, 1]²`.
pub fn i3() -> Instance {
    let target = ConvexSet::cube(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
    let normals = vec![
        v(&[1.0, 0.0]),
        v(&[-1.0, 0.0]),
        v(&[0.0, 1.0]),
        v(&[0.0, -1.0]),
        v(&[1.0, 0.5]),
        v(&[-1.0, -0.5]),
    ];
    build("i3", i3_map(), target, Mode::Bounded, (normals, vec![1.0; 6]))
}

/// The fan of [`i3`] with `C = ℝ²₋`.
pub fn i3_cone() -> Instance {
    let target = ConvexSet::nonpositive_orthant(2).unwrap();
    let normals = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 0.5])];
    build("i3-cone", i3_map(), target, Mode::Cone, (normals, vec![0.0; 3]))
}

/// Ideal point of `R = {(1,2), (2,1), (3,3)}`: `F(x) = conv{r − x}`, `C = ℝ²₊`.
pub fn i4() -> Instance {
    let gens = [[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]]
        .iter()
        .map(|r| AffineGenerator::new(-Matrix::identity(2, 2), v(r)))
        .collect();
    let map = SetMap::affine_fan(gens).unwrap();
    let target = ConvexSet::nonnegative_orthant(2).unwrap();
    build("i4", map, target, Mode::Cone, (vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])], vec![1.0, 1.0]))
}

pub fn by_name(name: &str) -> Option<Instance> {
    match name {
        "i1" => Some(i1()),
        "i2" => Some(i2()),
        "i2-fan" | "i2_fan" => Some(i2_fan()),
        "i3" => Some(i3()),
        "i3-cone" | "i3_cone" => Some(i3_cone()),
        "i4" => Some(i4()),
        _ => None,
    }
}
