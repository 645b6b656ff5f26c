//! Dense real linear algebra used throughout the crate.
//!
//! Storage and the symmetric eigensolver come from `nalgebra`; this module
//! adds the validated [`DenseMatrix`] wrapper, descending-order spectra, and
//! the resolvent, rank-one update and Gram helpers the selector needs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result, Tolerances};

pub type Vector = DVector<f64>;

/// A real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a matrix from `rows * cols` entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries given for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_nalgebra(m: DMatrix<f64>) -> Result<Self> {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(DenseMatrix(m))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    /// Square diagonal matrix. Panics on non-finite entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        assert!(diag.iter().all(|x| x.is_finite()), "non-finite diagonal");
        DenseMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn row(&self, i: usize) -> Vector {
        self.0.row(i).transpose()
    }

    pub fn column(&self, j: usize) -> Vector {
        self.0.column(j).into_owned()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        DenseMatrix(&self.0 * factor)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

/// Spectrum of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest eigenvalue magnitude, i.e. the spectral norm.
    pub fn norm(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0_f64, |acc, l| acc.max(l.abs()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = &self.eigenvectors
            * DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        scaled * self.eigenvectors.transpose()
    }

    /// `f(S) = V diag(f(lambda)) V^T`, symmetrized.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            scaled.column_mut(j).scale_mut(fl);
        }
        let m = scaled * self.eigenvectors.transpose();
        (&m + m.transpose()) * 0.5
    }

    /// `(S - shift I)^{-1}` from this decomposition.
    pub fn shifted_inverse(&self, shift: f64) -> Result<DenseMatrix> {
        let guard = Tolerances::DEFAULT.singular_shift * self.norm().max(1.0);
        let distance = self
            .eigenvalues
            .iter()
            .map(|l| (l - shift).abs())
            .fold(f64::INFINITY, f64::min);
        if distance <= guard {
            return Err(Error::SingularShift { shift, distance });
        }
        DenseMatrix::from_nalgebra(self.apply(|l| 1.0 / (l - shift)))
    }

    /// Eigenvalues at or below `kernel * ||S||_2` in magnitude count as zero.
    pub fn kernel_threshold(&self, tol: &Tolerances) -> f64 {
        tol.kernel * self.norm()
    }
}

fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).amax() / scale
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
pub fn sym_eigendecomposition(s: &DenseMatrix) -> Result<SymEigen> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let asymmetry = relative_asymmetry(s.as_nalgebra());
    if asymmetry > Tolerances::DEFAULT.symmetry {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(sym_eigen_unchecked(s.as_nalgebra()))
}

pub(crate) fn sym_eigen_unchecked(m: &DMatrix<f64>) -> SymEigen {
    let n = m.nrows();
    if n == 0 {
        return SymEigen {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
        };
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    SymEigen {
        eigenvalues,
        eigenvectors,
    }
}

/// `(S - shift I)^{-1}` for symmetric `S`.
pub fn shifted_inverse(s: &DenseMatrix, shift: f64) -> Result<DenseMatrix> {
    sym_eigendecomposition(s)?.shifted_inverse(shift)
}

/// Rank-one update of an inverse: given `M^{-1}`, returns `(M + w w^T)^{-1}`.
pub fn sherman_morrison_inverse(m_inv: &DenseMatrix, w: &Vector) -> Result<DenseMatrix> {
    let n = m_inv.rows();
    if !m_inv.is_square() || w.len() != n {
        return Err(Error::Dimension(format!(
            "rank-one update of a {}x{} inverse by a vector of length {}",
            m_inv.rows(),
            m_inv.cols(),
            w.len()
        )));
    }
    let m = m_inv.as_nalgebra();
    let left = m * w;
    let right = m.transpose() * w;
    let denominator = 1.0 + w.dot(&left);
    if denominator.abs() <= Tolerances::DEFAULT.singular_update {
        return Err(Error::SingularUpdate { denominator });
    }
    DenseMatrix::from_nalgebra(m - (left * right.transpose()) / denominator)
}

pub fn frobenius_norm_sq(l: &DenseMatrix) -> f64 {
    l.as_nalgebra().norm_squared()
}

/// Largest singular value, computed as `sqrt(lambda_max(L^T L))`.
pub fn spectral_norm(l: &DenseMatrix) -> f64 {
    if l.rows() == 0 || l.cols() == 0 {
        return 0.0;
    }
    let m = l.as_nalgebra();
    let gram = m.transpose() * m;
    sym_eigen_unchecked(&gram).eigenvalues[0].max(0.0).sqrt()
}

/// `||L||_F^2 / ||L||_2^2`.
pub fn stable_rank(l: &DenseMatrix) -> Result<f64> {
    if l.is_zero() {
        return Err(Error::ZeroOperator);
    }
    let s = spectral_norm(l);
    Ok(frobenius_norm_sq(l) / (s * s))
}

/// Smallest eigenvalue of the Gram matrix `G_jk = w_j . w_k`.
///
/// This equals the smallest eigenvalue of `sum w_i w_i^T` on the span of the
/// vectors, and is positive exactly when they are linearly independent.
pub fn gram_min_eigenvalue(vectors: &[Vector]) -> Result<f64> {
    let first = vectors.first().ok_or(Error::EmptySet)?;
    let n = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::Dimension(format!(
            "mixed vector lengths {n} and {}",
            bad.len()
        )));
    }
    let cols = DMatrix::from_columns(vectors);
    Ok(gram_min_of_columns(&cols))
}

pub(crate) fn gram_min_of_columns(cols: &DMatrix<f64>) -> f64 {
    let gram = cols.transpose() * cols;
    *sym_eigen_unchecked(&gram)
        .eigenvalues
        .last()
        .expect("nonempty gram")
}

/// Checks `after[0] >= before[0] >= after[1] >= ... >= before[n-1]` with an
/// absolute slack. Both spectra are descending; this is the ordering forced
/// by a rank-one positive semidefinite update.
pub fn interlaces(before: &[f64], after: &[f64], slack: f64) -> bool {
    if before.len() != after.len() {
        return false;
    }
    let n = before.len();
    (0..n)
        .all(|i| after[i] + slack >= before[i] && (i + 1 == n || before[i] + slack >= after[i + 1]))
}
