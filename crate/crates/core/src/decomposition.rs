//! The selector's input: a square operator and a decomposition of the identity.
//!
//! The vectors `v_i` are stored as the rows of an `m x n` matrix `V`, so the
//! resolution of the identity reads `V^T V = I_n`.

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::matrix::{spectral_norm, DenseMatrix, Vector};
use crate::{Error, Result, Tolerances};

/// How strictly the input is validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameMode {
    /// Any `v_1..v_m` with `sum v_i v_i^T = I`.
    Frame,
    /// `v_i = e_i` and every column of `L` has unit norm.
    ClassicalColumns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    operator: DenseMatrix,
    frame: DenseMatrix,
    mode: FrameMode,
}

impl Decomposition {
    /// Checks dimensions only; call [`Decomposition::validate`] for the
    /// resolution-of-identity check.
    pub fn new(operator: DenseMatrix, frame: DenseMatrix, mode: FrameMode) -> Result<Self> {
        if !operator.is_square() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}; pad with zero rows or columns",
                operator.rows(),
                operator.cols()
            )));
        }
        let n = operator.rows();
        if n == 0 {
            return Err(Error::Dimension("operator is empty".into()));
        }
        if frame.cols() != n {
            return Err(Error::Dimension(format!(
                "frame vectors have length {}, operator is {n}x{n}",
                frame.cols()
            )));
        }
        if frame.rows() == 0 {
            return Err(Error::EmptySet);
        }
        Ok(Decomposition {
            operator,
            frame,
            mode,
        })
    }

    /// `v_i = e_i` in `Frame` mode.
    pub fn from_standard_basis(operator: DenseMatrix) -> Result<Self> {
        let n = operator.rows();
        Self::new(operator, DenseMatrix::identity(n), FrameMode::Frame)
    }

    /// `v_i = e_i` in `ClassicalColumns` mode, validated.
    pub fn classical(operator: DenseMatrix, tol: &Tolerances) -> Result<Self> {
        let n = operator.rows();
        Self::new(
            operator,
            DenseMatrix::identity(n),
            FrameMode::ClassicalColumns,
        )?
        .validate(tol)
    }

    pub fn validate(self, tol: &Tolerances) -> Result<Self> {
        self.check(tol)?;
        Ok(self)
    }

    /// Non-consuming form of [`Decomposition::validate`].
    pub fn check(&self, tol: &Tolerances) -> Result<()> {
        let n = self.n();
        let tolerance = tol.frame_defect * n as f64;
        let defect = self.identity_defect();
        if !(defect <= tolerance) {
            return Err(Error::NotIdentity { defect, tolerance });
        }
        if self.mode == FrameMode::ClassicalColumns {
            if self.frame != DenseMatrix::identity(n) {
                return Err(Error::NotStandardBasis);
            }
            check_unit_columns(&self.operator, tol)?;
        }
        Ok(())
    }

    /// `||sum_i v_i v_i^T - I||_F`.
    pub fn identity_defect(&self) -> f64 {
        let v = self.frame.as_nalgebra();
        let n = self.n();
        (v.transpose() * v - DMatrix::identity(n, n)).norm()
    }

    pub fn n(&self) -> usize {
        self.operator.rows()
    }

    pub fn m(&self) -> usize {
        self.frame.rows()
    }

    pub fn operator(&self) -> &DenseMatrix {
        &self.operator
    }

    /// The `m x n` matrix whose rows are the `v_i`.
    pub fn frame(&self) -> &DenseMatrix {
        &self.frame
    }

    pub fn mode(&self) -> FrameMode {
        self.mode
    }

    pub fn vector(&self, i: usize) -> Vector {
        self.frame.row(i)
    }

    /// `L v_i`.
    pub fn image(&self, i: usize) -> Vector {
        self.operator.as_nalgebra() * self.frame.row(i)
    }

    /// The `n x m` matrix `L V^T` whose columns are the `L v_i`.
    pub fn images(&self) -> DMatrix<f64> {
        self.operator.as_nalgebra() * self.frame.as_nalgebra().transpose()
    }

    /// Same vectors, reordered so that new index `k` holds old vector `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.m();
        let mut seen = vec![false; m];
        if perm.len() != m {
            return Err(Error::Dimension(format!(
                "permutation of length {} for {m} vectors",
                perm.len()
            )));
        }
        for &p in perm {
            if p >= m {
                return Err(Error::Index { index: p, m });
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::DuplicateIndex(p));
            }
        }
        let v = self.frame.as_nalgebra();
        let frame = DMatrix::from_fn(m, self.n(), |r, c| v[(perm[r], c)]);
        Ok(Decomposition {
            operator: self.operator.clone(),
            frame: DenseMatrix::from_nalgebra(frame)?,
            mode: self.mode,
        })
    }

    pub fn with_operator(&self, operator: DenseMatrix) -> Result<Self> {
        Self::new(operator, self.frame.clone(), self.mode)
    }
}

fn check_unit_columns(l: &DenseMatrix, tol: &Tolerances) -> Result<()> {
    let worst = (0..l.cols())
        .map(|j| (j, l.column(j).norm()))
        .max_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()));
    match worst {
        Some((index, norm)) if !((norm - 1.0).abs() <= tol.unit_column) => {
            Err(Error::ColumnNorm { index, norm })
        }
        _ => Ok(()),
    }
}

/// Entries uniform on `[-1, 1)`: `2 * (x >> 11) * 2^-53 - 1` for successive
/// 64-bit outputs `x` of ChaCha20 seeded with `seed_from_u64(seed)` on `stream`.
fn uniform_entries(seed: u64, stream: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count)
        .map(|_| {
            let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            2.0 * unit - 1.0
        })
        .collect()
}

const FRAME_STREAM: u64 = 0;
const OPERATOR_STREAM: u64 = 1;

/// A random Parseval frame: `m` vectors in `R^n` with `sum v_i v_i^T = I`.
///
/// An `m x n` matrix of uniform entries (row-major, see [`uniform_entries`])
/// is orthonormalized column-wise by Householder QR; its rows are the `v_i`.
/// The result depends only on `(n, m, seed)`.
pub fn random_tight_frame(n: usize, m: usize, seed: u64) -> Result<DenseMatrix> {
    if n == 0 || m < n {
        return Err(Error::InfeasibleFrame { n, m });
    }
    let raw = DMatrix::from_row_slice(m, n, &uniform_entries(seed, FRAME_STREAM, m * n));
    DenseMatrix::from_nalgebra(raw.qr().q())
}

/// A random `n x n` operator with uniform entries, scaled to spectral norm 1.
pub fn random_operator(n: usize, seed: u64) -> DenseMatrix {
    let raw = DenseMatrix::from_row_major(n, n, &uniform_entries(seed, OPERATOR_STREAM, n * n))
        .expect("finite entries");
    let s = spectral_norm(&raw);
    raw.scaled(1.0 / s)
}

/// `diag(1, ..., cond)` with geometrically spaced entries.
pub fn conditioned_diagonal(n: usize, cond: f64) -> DenseMatrix {
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                1.0
            } else {
                cond.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    DenseMatrix::from_diagonal(&diag)
}

/// Rescales every column to unit norm. Fails on a zero column.
pub fn normalize_columns(l: &DenseMatrix) -> Result<DenseMatrix> {
    let mut m = l.as_nalgebra().clone();
    for (j, mut col) in m.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::ColumnNorm { index: j, norm });
        }
        col /= norm;
    }
    DenseMatrix::from_nalgebra(m)
}
