//! Solver and certification toolkit for set-inclusive generalized equations
//!
//! ```text
//! find x ∈ ℝⁿ such that F(x) ⊆ C
//! ```
//!
//! where `F: ℝⁿ ⇉ ℝᵐ` is a concave set-valued map with nonempty, bounded,
//! closed and convex values and `C ⊆ ℝᵐ` is closed and convex (either bounded
//! or a polyhedral cone).
//!
//! The problem is reformulated through the merit function
//!
//! ```text
//! ν(x) = sup_{‖b*‖ ≤ 1} [ σ(b*, F(x)) − σ(b*, C) ]  =  sup_{y ∈ F(x)} dist(y, C)
//! ```
//!
//! which is convex, nonnegative and vanishes exactly on the solution set.
//! On top of it the crate provides:
//!
//! * [`convex`]: closed convex sets with support, projection, distance and
//!   minimum-norm-point oracles;
//! * [`setvalued`]: concave set-valued maps (affine fans, radial maps,
//!   interval maps and their combinators);
//! * [`merit`]: evaluation of ν, its subdifferential, slope and directional
//!   derivative brackets;
//! * [`solver`]: Polyak subgradient solver, solution certificates and exact
//!   penalization;
//! * [`analysis`]: error-bound constant estimation and audits, tangent-cone
//!   membership;
//! * [`prederivative`]: operator fans as outer prederivatives, the constants
//!   `Bconst` and `flat`, Banach constants.

pub mod analysis;
pub mod convex;
mod error;
pub mod instances;
pub mod merit;
pub mod prederivative;
pub mod setvalued;
pub mod solver;

pub use error::{Error, Result};

/// Library version, echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Dense real vector.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

pub use convex::{min_norm_point, sphere_sample, ConvexSet, MinNormResult, SphereRestriction};
pub use merit::{Mode, Problem, Tolerances};
pub use setvalued::{MaxAffine, MinAffine, SetMap};

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

pub(crate) fn check_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
