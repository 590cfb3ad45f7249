use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("operation requires an H-cone")]
    NotACone,
    #[error("Dykstra projection did not converge (residual {residual:e})")]
    ProjectionNotConverged { residual: f64 },
    #[error("minimum-norm point did not converge (duality gap {gap:e})")]
    MinNormNotConverged { gap: f64 },
    #[error("map is not fan-normalizable (contains a radial component)")]
    NotFanNormalizable,
    #[error("radial maps are only supported with a ball target")]
    RadialNeedsBallTarget,
    #[error("point is a solution; the active dual set has no finite description there")]
    AtSolutionPoint,
    #[error("no infeasible points found in the sampled region")]
    NoInfeasibleSamples,
    #[error("point is not a solution (merit {merit})")]
    NotASolution { merit: f64 },
    #[error("unit sphere has empty intersection with the dual restriction")]
    EmptyRestriction,
    #[error("matrix is rank deficient (dual Banach constant {c_dual:e})")]
    RankDeficient { c_dual: f64 },
}

impl Error {
    /// Short machine-readable category, used as the CLI error prefix.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionError",
            Error::NonFinite(_)
            | Error::InvalidSet(_)
            | Error::InvalidMap(_)
            | Error::InvalidProblem(_) => "ParseError",
            Error::NotACone => "NotACone",
            Error::ProjectionNotConverged { .. } | Error::MinNormNotConverged { .. } => {
                "ConvergenceError"
            }
            Error::NotFanNormalizable => "NotFanNormalizable",
            Error::RadialNeedsBallTarget => "RadialNeedsBallTarget",
            Error::AtSolutionPoint => "AtSolutionPoint",
            Error::NoInfeasibleSamples => "NoInfeasibleSamples",
            Error::NotASolution { .. } => "NotASolution",
            Error::EmptyRestriction => "EmptyRestriction",
            Error::RankDeficient { .. } => "RankDeficient",
        }
    }
}
