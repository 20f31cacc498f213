use thiserror::Error;

/// Errors produced by validation, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("row count {rows} is not divisible by block length {d}")]
    RowsNotBlocked { rows: usize, d: usize },

    #[error("column {col} has norm {norm} but unit norm is required")]
    ColumnNotNormalized { col: usize, norm: f64 },

    #[error(
        "block {block} is not orthonormal (deviation {deviation:.3e}); \
         run orthonormalize_blocks first"
    )]
    BlockNotOrthonormal { block: usize, deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("rank-deficient {what}: smallest singular value {smin:.3e} vs largest {smax:.3e}")]
    RankDeficient { what: String, smin: f64, smax: f64 },

    #[error("combinatorial budget exceeded: {subsets} subsets > budget {budget}")]
    BudgetExceeded { subsets: u128, budget: u64 },

    #[error("measurement is not in the range of the dictionary (relative residual {residual:.3e})")]
    Infeasible { residual: f64 },

    #[error("zero vector not allowed: {0}")]
    ZeroVector(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
