use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coupling scheme {scheme} cannot be combined with drive {drive}")]
    InvalidCombination { scheme: String, drive: String },

    #[error("time-dependent drive requested; only the rotating-frame continuous-wave problem is supported")]
    TimeDependentDrive,

    #[error("non-unique steady state (pivot {pivot:.3e} at row {row})")]
    NonUniqueSteadyState { row: usize, pivot: f64 },

    #[error("steady state did not converge: residual {residual:.3e} exceeds {tolerance:.1e}")]
    Convergence { residual: f64, tolerance: f64 },

    #[error("truncation did not converge: tail mass {tail_mass:.3e} at n_max = {n_max}")]
    Truncation { n_max: usize, tail_mass: f64 },

    #[error("integration step underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("correlator undefined: population {population:.3e} below 1e-12")]
    UndefinedCorrelator { population: f64 },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("phase-space grid too small: integrated Wigner norm {norm:.6} differs from 1")]
    GridTooSmall { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
