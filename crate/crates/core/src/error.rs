use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("a point needs at least one coordinate")]
    EmptyPoint,

    #[error("non-finite coordinate {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("composition needs at least one operator")]
    EmptyComposition,

    #[error("step factor undefined: d_Z(x) = {distance} does not exceed beta = {beta}")]
    GammaUndefined { distance: f64, beta: f64 },

    #[error("zero-width slab: ARM requires positive half-width (slab {index})")]
    ZeroWidthSlab { index: usize },

    #[error("feasibility problem needs at least one set")]
    EmptyProblem,

    #[error("relaxation tau = {tau} at iteration {k} is outside [{margin}, 2 - {margin}]")]
    InvalidTau { k: usize, tau: f64, margin: f64 },

    #[error("iterate became non-finite at iteration {k}")]
    NonFiniteIterate { k: usize },

    #[error("trace is missing {0}")]
    MissingSnapshots(&'static str),

    #[error("trace has {len} records, need more than {needed}")]
    TraceTooShort { len: usize, needed: usize },
}
