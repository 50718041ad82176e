use thiserror::Error;

/// Errors surfaced by the analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("block {block} must be Hermitian; entry ({i},{j}) breaks conjugate symmetry")]
    NotHermitian {
        block: &'static str,
        i: usize,
        j: usize,
    },

    #[error("matrix is not symmetric at entry ({i},{j})")]
    NotSymmetric { i: usize, j: usize },

    #[error("matrix is not skew-symmetric at entry ({i},{j})")]
    NotSkewSymmetric { i: usize, j: usize },

    #[error("blocks {first} and {second} must be entrywise equal for this case")]
    BlocksDiffer {
        first: &'static str,
        second: &'static str,
    },

    #[error("mask entry ({i},{j}) is {value}, expected 0 or 1")]
    NonBinaryMask { i: usize, j: usize, value: f64 },

    #[error("weight {name} must be finite and positive")]
    InvalidWeight { name: &'static str },

    #[error("weight {name} is required for this case")]
    MissingWeight { name: &'static str },

    #[error("weight {name} is only meaningful for case (iii)")]
    UnexpectedWeight { name: &'static str },

    #[error("{which} has zero norm; relative weights are undefined unless its perturbation is excluded")]
    ZeroRhsNorm { which: &'static str },

    #[error("perturbation block {block} is nonzero but its weight is excluded")]
    ExcludedBlockNonzero { block: &'static str },

    #[error("constraint matrix is rank deficient (min/max factor diagonal {min_diag:e}/{max_diag:e}); check excluded-weight configuration")]
    RankDeficient { min_diag: f64, max_diag: f64 },

    #[error("infeasible exclusion: residual row {row} is nonzero but every perturbation acting on it is excluded or masked out")]
    Infeasible { row: usize },

    #[error("numerically singular pivot at elimination step {index}")]
    SingularPivot { index: usize },

    #[error("{what} has a nonzero imaginary part; the real reduction requires exactly real data")]
    NonzeroImaginaryPart { what: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
