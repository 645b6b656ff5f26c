//! Barrier-potential subset selection.
//!
//! Each step adds one outer product `w w^T` (with `w = L v_j`) to `A` and
//! moves the barrier from `b` to `b' = b - delta`. A candidate is accepted
//! when `w^T (A - b'I)^{-1} w < -1`, which makes `A + w w^T` gain an
//! eigenvalue above `b'`, and when the potential at the new barrier does not
//! exceed the potential at the old one.

mod potential;
mod schedule;
mod step;

use serde::Serialize;

pub use potential::{
    check_step_preconditions, potential, potential_split, PotentialSplit, StepDiagnostics,
};
pub use schedule::{compute_schedule, Schedule};
pub use step::{candidate_feasible, run_selection, run_selection_with, select_next, Feasibility};

use crate::matrix::{sym_eigen_unchecked, DenseMatrix, SymEigen, Vector};
use crate::{Decomposition, Error, Result, Tolerances};

/// How a step chooses among feasible candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum PivotRule {
    /// First feasible candidate in scan order.
    #[default]
    FirstFeasible,
    /// Feasible candidate with the lowest updated potential; near-ties go to
    /// the earliest in scan order.
    GreedyMinPotential,
}

#[derive(Debug, Clone, Default)]
pub struct SelectorConfig {
    pub pivot: PivotRule,
    /// Order in which candidates are scanned; ascending index when `None`.
    pub scan_order: Option<Vec<usize>>,
    pub tolerances: Tolerances,
}

impl SelectorConfig {
    pub fn new(pivot: PivotRule, tolerances: Tolerances) -> Self {
        SelectorConfig {
            pivot,
            scan_order: None,
            tolerances,
        }
    }

    pub(crate) fn scan_order(&self, m: usize) -> Result<Vec<usize>> {
        match &self.scan_order {
            None => Ok((0..m).collect()),
            Some(order) => {
                if order.len() != m {
                    return Err(Error::Dimension(format!(
                        "scan order has {} entries for {m} vectors",
                        order.len()
                    )));
                }
                let mut seen = vec![false; m];
                for &j in order {
                    if j >= m {
                        return Err(Error::Index { index: j, m });
                    }
                    if std::mem::replace(&mut seen[j], true) {
                        return Err(Error::DuplicateIndex(j));
                    }
                }
                Ok(order.clone())
            }
        }
    }
}

/// The running sum `A` of chosen outer products, the chosen indices and the
/// current barrier.
#[derive(Debug, Clone)]
pub struct SelectionState {
    a: DenseMatrix,
    sigma: Vec<usize>,
    barrier: f64,
    eigen: SymEigen,
}

impl SelectionState {
    pub fn initial(n: usize, schedule: &Schedule) -> Self {
        let a = DenseMatrix::zeros(n, n);
        let eigen = sym_eigen_unchecked(a.as_nalgebra());
        SelectionState {
            a,
            sigma: Vec::new(),
            barrier: schedule.b0,
            eigen,
        }
    }

    /// Rebuilds the state reached after choosing `sigma`, in order, from scratch.
    pub fn from_sigma(dec: &Decomposition, schedule: &Schedule, sigma: &[usize]) -> Result<Self> {
        let mut state = Self::initial(dec.n(), schedule);
        for &j in sigma {
            if j >= dec.m() {
                return Err(Error::Index {
                    index: j,
                    m: dec.m(),
                });
            }
            if state.sigma.contains(&j) {
                return Err(Error::DuplicateIndex(j));
            }
            let next = schedule.barrier_at(state.step() + 1);
            state.push(j, &dec.image(j), next);
        }
        Ok(state)
    }

    pub(crate) fn push(&mut self, index: usize, w: &Vector, barrier: f64) {
        let a = self.a.as_nalgebra() + w * w.transpose();
        self.eigen = sym_eigen_unchecked(&a);
        self.a = DenseMatrix::from_nalgebra(a).expect("finite update");
        self.sigma.push(index);
        self.barrier = barrier;
    }

    #[cfg(test)]
    pub(crate) fn set_barrier_unchecked(&mut self, b: f64) {
        self.barrier = b;
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn barrier(&self) -> f64 {
        self.barrier
    }

    pub fn step(&self) -> usize {
        self.sigma.len()
    }

    /// Spectrum of `A`, descending.
    pub fn eigen(&self) -> &SymEigen {
        &self.eigen
    }

    /// Exactly `step()` eigenvalues above the barrier and the rest at or
    /// below the kernel threshold.
    pub fn barrier_invariant_holds(&self, tol: &Tolerances) -> bool {
        let k = self.step();
        let threshold = self.eigen.kernel_threshold(tol);
        let eig = &self.eigen.eigenvalues;
        eig[..k].iter().all(|&l| l > self.barrier) && eig[k..].iter().all(|l| l.abs() <= threshold)
    }
}

/// Checks made after a step has been applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepChecks {
    /// `Phi_{b'}(A + w w^T)` computed from the new spectrum.
    pub potential_recomputed: f64,
    pub barrier_invariant_ok: bool,
    pub interlacing_ok: bool,
    pub monotone_ok: bool,
}

impl StepChecks {
    pub fn all_ok(&self) -> bool {
        self.barrier_invariant_ok && self.interlacing_ok && self.monotone_ok
    }
}

/// Diagnostics for one step. `chosen` is a 0-based index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTrace {
    pub step: usize,
    pub chosen: usize,
    pub barrier_before: f64,
    pub barrier_after: f64,
    /// `Phi_b(A)` before the step.
    pub potential_before: f64,
    /// `Phi_{b'}(A + w w^T)` from the rank-one update formula.
    pub potential_after: f64,
    /// Image and kernel parts of `Phi_{b'}(A)`, and `||QL||_F^2`.
    pub split: PotentialSplit,
    pub candidates_scanned: usize,
    /// `-1 - w^T (A - b'I)^{-1} w` for the chosen `w`.
    pub rank_margin: f64,
    /// `Phi_b(A) - Phi_{b'}(A + w w^T)` for the chosen `w`.
    pub potential_margin: f64,
    /// Set when the strict scan found nothing and the slack retry was used.
    pub relaxed: bool,
    pub preconditions: StepDiagnostics,
    pub checks: Option<StepChecks>,
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Chosen indices in selection order, 0-based.
    pub sigma: Vec<usize>,
    pub schedule: Schedule,
    pub traces: Vec<StepTrace>,
    pub vacuous: bool,
    /// Spectrum of the final `A`, descending.
    pub final_eigenvalues: Vec<f64>,
}

impl SelectionResult {
    /// Smallest nonzero eigenvalue of the final `A`, or `None` for an empty selection.
    pub fn final_lambda_min(&self) -> Option<f64> {
        self.sigma
            .len()
            .checked_sub(1)
            .map(|k| self.final_eigenvalues[k])
    }

    /// True when every recorded step diagnostic and post-step check passed.
    pub fn invariants_hold(&self) -> bool {
        self.traces
            .iter()
            .all(|t| t.preconditions.all_ok() && t.checks.is_some_and(|c| c.all_ok()))
    }
}
