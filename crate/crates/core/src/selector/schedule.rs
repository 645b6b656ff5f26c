use serde::Serialize;

use crate::matrix::{frobenius_norm_sq, spectral_norm, DenseMatrix};
use crate::{Error, Result};

/// Barrier walk parameters for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub epsilon: f64,
    /// Starting barrier `(1 - eps) ||L||_F^2 / m`.
    pub b0: f64,
    /// Barrier decrement per step, `(1 - eps) ||L||_2^2 / (eps m)`.
    pub delta: f64,
    /// `floor(eps^2 ||L||_F^2 / ||L||_2^2)`.
    pub steps: usize,
    pub m: usize,
    pub frobenius_sq: f64,
    pub spectral_sq: f64,
}

impl Schedule {
    pub fn stable_rank(&self) -> f64 {
        self.frobenius_sq / self.spectral_sq
    }

    /// Nothing is promised when `eps^2 * srank < 1`.
    pub fn is_vacuous(&self) -> bool {
        self.steps == 0
    }

    pub fn barrier_at(&self, step: usize) -> f64 {
        self.b0 - step as f64 * self.delta
    }

    pub fn final_barrier(&self) -> f64 {
        self.barrier_at(self.steps)
    }

    /// `-m - ||L||_2^2 / delta`; the potential starts here and may not rise above it.
    pub fn potential_ceiling(&self) -> f64 {
        -(self.m as f64) - self.spectral_sq / self.delta
    }

    /// `(1 - eps)^2 ||L||_F^2 / m`, the promised lower bound on `lambda_min`.
    pub fn guarantee_bound(&self) -> f64 {
        (1.0 - self.epsilon).powi(2) * self.frobenius_sq / self.m as f64
    }
}

pub fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "epsilon must lie strictly between 0 and 1, got {epsilon}"
        )))
    }
}

pub fn compute_schedule(l: &DenseMatrix, m: usize, epsilon: f64) -> Result<Schedule> {
    check_epsilon(epsilon)?;
    if m == 0 {
        return Err(Error::EmptySet);
    }
    if l.is_zero() {
        return Err(Error::ZeroOperator);
    }
    let frobenius_sq = frobenius_norm_sq(l);
    let spectral_sq = spectral_norm(l).powi(2);
    let mf = m as f64;
    let steps = (epsilon * epsilon * frobenius_sq / spectral_sq).floor() as usize;
    Ok(Schedule {
        epsilon,
        b0: (1.0 - epsilon) * frobenius_sq / mf,
        delta: (1.0 - epsilon) * spectral_sq / (epsilon * mf),
        steps,
        m,
        frobenius_sq,
        spectral_sq,
    })
}
