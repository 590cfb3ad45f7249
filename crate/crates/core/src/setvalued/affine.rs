use crate::{check_dim, check_finite, Error, Result, Vector};

/// One affine piece `x ↦ ⟨gradient, x⟩ + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub gradient: Vector,
    pub offset: f64,
}

impl AffinePiece {
    pub fn new(gradient: Vector, offset: f64) -> Self {
        Self { gradient, offset }
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        self.gradient.dot(x) + self.offset
    }
}

fn validate(pieces: &[AffinePiece]) -> Result<usize> {
    let first = pieces
        .first()
        .ok_or_else(|| Error::InvalidMap("piecewise-affine function needs at least one piece".into()))?;
    let dim = first.gradient.len();
    if dim == 0 {
        return Err(Error::InvalidMap("piece gradients must be nonempty".into()));
    }
    for p in pieces {
        check_dim(dim, p.gradient.len())?;
        check_finite(p.gradient.as_slice(), "affine piece gradient")?;
        check_finite(&[p.offset], "affine piece offset")?;
    }
    Ok(dim)
}

/// Pieces within `tol · max(1, |best|)` of the extreme value `best`.
fn near(values: &[f64], best: f64, tol: f64) -> Vec<usize> {
    let slack = tol * best.abs().max(1.0);
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| (**v - best).abs() <= slack)
        .map(|(i, _)| i)
        .collect()
}

macro_rules! piecewise {
    ($name:ident, $fold:expr, $init:expr, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            pieces: Vec<AffinePiece>,
            dim: usize,
        }

        impl $name {
            pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
                let dim = validate(&pieces)?;
                Ok(Self { pieces, dim })
            }

            /// Convenience constructor from `(gradient, offset)` pairs.
            pub fn from_pairs(pairs: Vec<(Vector, f64)>) -> Result<Self> {
                Self::new(pairs.into_iter().map(|(g, h)| AffinePiece::new(g, h)).collect())
            }

            pub fn pieces(&self) -> &[AffinePiece] {
                &self.pieces
            }

            pub fn dim(&self) -> usize {
                self.dim
            }

            pub fn value(&self, x: &Vector) -> f64 {
                self.pieces.iter().map(|p| p.eval(x)).fold($init, $fold)
            }

            /// Indices of the pieces attaining the value within a relative tolerance.
            pub fn active(&self, x: &Vector, tol: f64) -> Vec<usize> {
                let values: Vec<f64> = self.pieces.iter().map(|p| p.eval(x)).collect();
                let best = values.iter().copied().fold($init, $fold);
                near(&values, best, tol)
            }
        }
    };
}

piecewise!(MaxAffine, f64::max, f64::NEG_INFINITY, "Convex piecewise-affine function `max_j (⟨g_j, x⟩ + h_j)`.");
piecewise!(MinAffine, f64::min, f64::INFINITY, "Concave piecewise-affine function `min_j (⟨g_j, x⟩ + h_j)`.");

impl MaxAffine {
    /// Largest gradient norm, a global Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        self.pieces.iter().map(|p| p.gradient.norm()).fold(0.0, f64::max)
    }

    /// `|x|` on the real line.
    pub fn abs_1d() -> Self {
        Self::from_pairs(vec![(Vector::from_element(1, 1.0), 0.0), (Vector::from_element(1, -1.0), 0.0)])
            .expect("valid pieces")
    }
}

impl MinAffine {
    /// `−|x|` on the real line.
    pub fn neg_abs_1d() -> Self {
        Self::from_pairs(vec![(Vector::from_element(1, 1.0), 0.0), (Vector::from_element(1, -1.0), 0.0)])
            .expect("valid pieces")
    }
}
