use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric argument fell outside its admissible range.
    #[error("parameter out of range: {0}")]
    Domain(&'static str),

    #[error("not enough nonzero step distances to estimate a contraction factor")]
    InsufficientData,

    #[error("map leaves the interval: f({x}) = {fx}")]
    NotSelfMap { x: f64, fx: f64 },

    #[error("map is not certified contractive (factor {factor})")]
    NotContractive { factor: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("zero diagonal entry at index {0}")]
    ZeroDiagonal(usize),

    #[error("problem too large: size {size} exceeds limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("matrix is singular (pivot column {column})")]
    SingularMatrix { column: usize },

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("index ({row}, {col}) out of bounds for {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("malformed matrix structure: {0}")]
    InvalidStructure(&'static str),
}
