use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent k = {k} is not admissible (requires k >= {floor})")]
    InvalidExponent { k: f64, floor: f64 },

    #[error("failed to bracket the bridge amplitude: I({lo:e}) = {f_lo}, I({hi:e}) = {f_hi}")]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("quadrature tolerance not met: requested {requested:e}, achieved {achieved:e}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    #[error("dimension mismatch: field dimension {field}, region dimension {region}")]
    DimensionMismatch { field: usize, region: usize },

    #[error("exact ball quadrature is unavailable in dimension {dim} (supported: 1..=3)")]
    UnsupportedDimension { dim: usize },

    #[error("slab integration requires a certified separable integrand")]
    NonSeparableIntegrand,

    #[error("value {value} is outside the admissible interval ({lo}, {hi})")]
    OutsideAdmissible { value: f64, lo: f64, hi: f64 },

    #[error("scalar field has no gradient evaluator")]
    MissingGradient,

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
