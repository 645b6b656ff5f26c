//! Deterministic subset selection for restricted invertibility.
//!
//! Given a square operator `L` and vectors `v_1, ..., v_m` with
//! `sum_i v_i v_i^T = I`, [`run_selection`] picks
//! `t = floor(eps^2 * ||L||_F^2 / ||L||_2^2)` indices such that the images
//! `L v_i` are linearly independent and the smallest eigenvalue of their
//! Gram matrix exceeds `(1 - eps)^2 * ||L||_F^2 / m`.
//!
//! The selection walks a barrier `b` down from `b0` by `delta` per step while
//! keeping the potential `tr(L^T (A - bI)^{-1} L)` from increasing, where `A`
//! is the sum of the outer products chosen so far.
//!
//! The result can be checked independently with [`certificate::verify`], and
//! on small instances compared against an exhaustive search in [`oracle`].
//!
//! ```
//! use rinv_core::{run_selection, verify, Decomposition, DenseMatrix, PivotRule, Tolerances};
//!
//! let dec = Decomposition::from_standard_basis(DenseMatrix::identity(4)).unwrap();
//! let tol = Tolerances::default();
//! let result = run_selection(&dec, 0.5, PivotRule::FirstFeasible, &tol).unwrap();
//! assert_eq!(result.sigma, vec![0]);
//!
//! let cert = verify(&dec, 0.5, &result.sigma, &tol).unwrap();
//! assert!(cert.passes);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod decomposition;
mod error;
pub mod matrix;
pub mod oracle;
pub mod selector;
mod tolerance;

pub use certificate::{verify, verify_classical, Certificate, CertificateRecord};
pub use decomposition::{Decomposition, FrameMode};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, SymEigen, Vector};
pub use oracle::{compare_to_guarantee, exhaustive_best_subset, OracleReport};
pub use selector::{
    compute_schedule, run_selection, PivotRule, Schedule, SelectionResult, SelectionState,
    SelectorConfig, StepTrace,
};
pub use tolerance::Tolerances;
