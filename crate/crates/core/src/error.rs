use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice side must be odd and at least 3, got L = {0}")]
    EvenOrSmallSide(usize),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("lattice size {side}^{dim} overflows usize")]
    SizeOverflow { side: usize, dim: usize },
    #[error("frequency {z:?} lies outside the band |z_k| <= {half}; fold it with alias_fold first")]
    OutOfBand { z: Vec<i64>, half: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid kernel configuration: {0}")]
    InvalidKernel(String),
    #[error("field kind {field} cannot drive a {measure} measure")]
    KindMismatch { field: &'static str, measure: &'static str },
    #[error("|gamma| = {gamma} is not subcritical (must be < sqrt(2n) = {limit})")]
    Supercritical { gamma: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource guard: {needed} bytes requested, budget is {budget}")]
    Budget { needed: u64, budget: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
