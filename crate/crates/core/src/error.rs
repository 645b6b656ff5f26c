use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("shift {shift} is within {distance:e} of an eigenvalue")]
    SingularShift { shift: f64, distance: f64 },

    #[error("rank-one update is singular (denominator {denominator:e})")]
    SingularUpdate { denominator: f64 },

    #[error("operator is identically zero")]
    ZeroOperator,

    #[error("vector set is empty")]
    EmptySet,

    #[error("vectors do not resolve the identity (Frobenius defect {defect:e}, tolerance {tolerance:e})")]
    NotIdentity { defect: f64, tolerance: f64 },

    #[error("column {index} of the operator has norm {norm}, expected 1")]
    ColumnNorm { index: usize, norm: f64 },

    #[error("expected the standard basis as decomposition in column mode")]
    NotStandardBasis,

    #[error("cannot build a tight frame of {m} vectors in dimension {n} (need m >= n)")]
    InfeasibleFrame { n: usize, m: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "no feasible candidate at step {step} (best rank margin {best_rank_margin:e}, \
         best potential margin {best_potential_margin:e})"
    )]
    Infeasible {
        step: usize,
        best_rank_margin: f64,
        best_potential_margin: f64,
    },

    #[error("index {index} out of range for {m} vectors")]
    Index { index: usize, m: usize },

    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("exhaustive search over {count} subsets exceeds the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },
}
