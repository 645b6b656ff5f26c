//! The barrier potential `Phi_b(A) = tr(L^T (A - bI)^{-1} L)` and the
//! per-step checks built on it.
//!
//! Everything here is evaluated in the eigenbasis of `A`: with
//! `A = U diag(lambda) U^T` and `r_i = ||(U^T L)_i||^2`,
//! `Phi_b(A) = sum_i r_i / (lambda_i - b)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{Schedule, SelectionState};
use crate::matrix::{sym_eigendecomposition, DenseMatrix, SymEigen};
use crate::{Error, Result, Tolerances};

/// `A` in its eigenbasis together with the row masses of `U^T L`.
#[derive(Debug, Clone)]
pub(crate) struct SpectralView<'a> {
    pub eigen: &'a SymEigen,
    /// `U^T L`.
    pub rotated: DMatrix<f64>,
    /// Squared row norms of `rotated`.
    pub mass: Vec<f64>,
    pub kernel_threshold: f64,
}

impl<'a> SpectralView<'a> {
    pub fn new(eigen: &'a SymEigen, l: &DenseMatrix, tol: &Tolerances) -> Self {
        let rotated = eigen.eigenvectors.transpose() * l.as_nalgebra();
        let mass = rotated.row_iter().map(|r| r.norm_squared()).collect();
        SpectralView {
            eigen,
            rotated,
            mass,
            kernel_threshold: eigen.kernel_threshold(tol),
        }
    }

    fn is_kernel(&self, i: usize) -> bool {
        self.eigen.eigenvalues[i].abs() <= self.kernel_threshold
    }

    pub fn check_shift(&self, b: f64) -> Result<()> {
        let guard = Tolerances::DEFAULT.singular_shift * self.eigen.norm().max(1.0);
        let distance = self
            .eigen
            .eigenvalues
            .iter()
            .map(|l| (l - b).abs())
            .fold(f64::INFINITY, f64::min);
        if distance <= guard {
            Err(Error::SingularShift { shift: b, distance })
        } else {
            Ok(())
        }
    }

    /// Unchecked potential; infinite or NaN if `b` hits the spectrum.
    pub fn potential(&self, b: f64) -> f64 {
        self.eigen
            .eigenvalues
            .iter()
            .zip(&self.mass)
            .map(|(lambda, r)| r / (lambda - b))
            .sum()
    }

    pub fn kernel_mass(&self) -> f64 {
        (0..self.mass.len())
            .filter(|&i| self.is_kernel(i))
            .map(|i| self.mass[i])
            .sum()
    }

    pub fn split(&self, b: f64) -> PotentialSplit {
        let image = (0..self.mass.len())
            .filter(|&i| !self.is_kernel(i))
            .map(|i| self.mass[i] / (self.eigen.eigenvalues[i] - b))
            .sum();
        let kernel_mass = self.kernel_mass();
        PotentialSplit {
            image,
            kernel: -kernel_mass / b,
            kernel_mass,
        }
    }

    /// `||L^T (A - bI)^{-1} L||_F^2`, the left side of the averaging inequality.
    pub fn resolvent_square_trace(&self, b: f64) -> f64 {
        let inv: DVector<f64> = DVector::from_iterator(
            self.mass.len(),
            self.eigen.eigenvalues.iter().map(|l| 1.0 / (l - b)),
        );
        let mut scaled = self.rotated.clone();
        for (mut row, d) in scaled.row_iter_mut().zip(inv.iter()) {
            row *= *d;
        }
        (self.rotated.transpose() * scaled).norm_squared()
    }
}

/// The potential restricted to the image (`P`) and kernel (`Q`) of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSplit {
    /// `tr(L^T P (A - bI)^{-1} P L)`.
    pub image: f64,
    /// `tr(L^T Q (A - bI)^{-1} Q L) = -||QL||_F^2 / b`.
    pub kernel: f64,
    /// `||QL||_F^2`.
    pub kernel_mass: f64,
}

pub fn potential(a: &DenseMatrix, b: f64, l: &DenseMatrix) -> Result<f64> {
    check_operator(a, l)?;
    let eigen = sym_eigendecomposition(a)?;
    let view = SpectralView::new(&eigen, l, &Tolerances::DEFAULT);
    view.check_shift(b)?;
    Ok(view.potential(b))
}

/// Image/kernel split of `Phi_{b'}(A)`; kernel eigenvalues are those at or
/// below `tol.kernel * ||A||_2`.
pub fn potential_split(
    a: &DenseMatrix,
    b_prime: f64,
    l: &DenseMatrix,
    tol: &Tolerances,
) -> Result<PotentialSplit> {
    check_operator(a, l)?;
    let eigen = sym_eigendecomposition(a)?;
    let view = SpectralView::new(&eigen, l, tol);
    view.check_shift(b_prime)?;
    Ok(view.split(b_prime))
}

fn check_operator(a: &DenseMatrix, l: &DenseMatrix) -> Result<()> {
    if !a.is_square() || a.rows() != l.rows() {
        return Err(Error::Dimension(format!(
            "A is {}x{} but L has {} rows",
            a.rows(),
            a.cols(),
            l.rows()
        )));
    }
    Ok(())
}

/// The conditions under which a feasible candidate is guaranteed to exist,
/// evaluated for the state about to take a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    /// `Phi_b(A) <= -m - ||L||_2^2 / delta`.
    pub potential_ok: bool,
    /// `0 < delta < b`.
    pub barrier_window_ok: bool,
    /// `b <= delta ||QL||_F^2 / ||L||_2^2`.
    pub kernel_mass_ok: bool,
    /// The candidate inequality summed over all `m` vectors.
    pub averaging_ok: bool,
    pub potential: f64,
    pub potential_shifted: f64,
    pub kernel_mass: f64,
    pub averaging_lhs: f64,
    pub averaging_rhs: f64,
}

impl StepDiagnostics {
    pub fn all_ok(&self) -> bool {
        self.potential_ok && self.barrier_window_ok && self.kernel_mass_ok && self.averaging_ok
    }
}

fn le_with_slack(lhs: f64, rhs: f64, slack: f64) -> bool {
    lhs <= rhs + slack * lhs.abs().max(rhs.abs())
}

pub fn check_step_preconditions(
    state: &SelectionState,
    schedule: &Schedule,
    l: &DenseMatrix,
    tol: &Tolerances,
) -> StepDiagnostics {
    let view = SpectralView::new(state.eigen(), l, tol);
    diagnostics_from_view(&view, state.barrier(), schedule, tol)
}

pub(crate) fn diagnostics_from_view(
    view: &SpectralView<'_>,
    b: f64,
    schedule: &Schedule,
    tol: &Tolerances,
) -> StepDiagnostics {
    let slack = tol.relative_slack;
    let delta = schedule.delta;
    let b_prime = b - delta;
    let m = schedule.m as f64;

    let potential = view.potential(b);
    let potential_shifted = view.potential(b_prime);
    let kernel_mass = view.kernel_mass();
    let averaging_lhs = view.resolvent_square_trace(b_prime);
    let averaging_rhs = (potential - potential_shifted) * (-m - potential_shifted);

    StepDiagnostics {
        potential_ok: le_with_slack(potential, schedule.potential_ceiling(), slack),
        barrier_window_ok: 0.0 < delta && delta < b,
        kernel_mass_ok: le_with_slack(b, delta * kernel_mass / schedule.spectral_sq, slack),
        averaging_ok: le_with_slack(averaging_lhs, averaging_rhs, slack),
        potential,
        potential_shifted,
        kernel_mass,
        averaging_lhs,
        averaging_rhs,
    }
}
