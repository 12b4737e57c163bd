use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value lies outside the domain of a deformed function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A requested basis exceeds the dimension cap.
    #[error("basis dimension {dimension} exceeds cap {cap}")]
    Resource { dimension: usize, cap: usize },

    #[error("operators live on different bases")]
    BasisMismatch,

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Off-block leakage found while splitting a Hamiltonian into polyads.
    #[error("structure error: entry ({row}, {col}) = {value:e} couples polyads {from} and {to}")]
    Structure {
        row: usize,
        col: usize,
        value: f64,
        from: u32,
        to: u32,
    },

    #[error("matrix is not symmetric (max deviation {0:e})")]
    Asymmetric(f64),

    /// Fewer informative levels (excluding a ground reference) than free parameters.
    #[error("underdetermined fit: {levels} informative levels for {params} free parameters")]
    Underdetermined { levels: usize, params: usize },

    #[error("invalid model: {0}")]
    InvalidSpec(String),
}
