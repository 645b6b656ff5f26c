use serde::Serialize;

use super::potential::{diagnostics_from_view, SpectralView};
use super::{
    compute_schedule, PivotRule, Schedule, SelectionResult, SelectionState, SelectorConfig,
    StepChecks, StepTrace,
};
use crate::matrix::{interlaces, DenseMatrix, Vector};
use crate::{Decomposition, Error, Result, Tolerances};

/// Outcome of testing one candidate `w` against the current state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    /// `w^T (A - b'I)^{-1} w`.
    pub quadform: f64,
    /// `Phi_{b'}(A + w w^T)` via the rank-one update formula.
    pub potential_after_add: f64,
    /// `Phi_b(A)`, the value the update must not exceed.
    pub potential_before: f64,
    /// Both tests hold exactly: `quadform < -1` and `potential_after_add <= potential_before`.
    pub feasible: bool,
    pub zero_vector: bool,
}

impl Feasibility {
    pub fn rank_margin(&self) -> f64 {
        -1.0 - self.quadform
    }

    pub fn potential_margin(&self) -> f64 {
        self.potential_before - self.potential_after_add
    }

    fn passes_with_slack(&self, slack: f64) -> bool {
        !self.zero_vector
            && self.quadform < -1.0 + slack
            && (1.0 + self.quadform).abs() > Tolerances::DEFAULT.singular_update
            && self.potential_after_add
                <= self.potential_before + slack * self.potential_before.abs()
    }
}

/// Tests `w` given `(A - b'I)^{-1}`, `Phi_b(A)` and `Phi_{b'}(A)`.
///
/// The updated potential is
/// `Phi_{b'}(A) - w^T R L L^T R w / (1 + w^T R w)` with `R = (A - b'I)^{-1}`,
/// which costs two matrix-vector products.
pub fn candidate_feasible(
    shifted_inv: &DenseMatrix,
    l: &DenseMatrix,
    w: &Vector,
    phi_before: f64,
    phi_after_shift: f64,
) -> Feasibility {
    if w.iter().all(|&x| x == 0.0) {
        return Feasibility {
            quadform: 0.0,
            potential_after_add: phi_after_shift,
            potential_before: phi_before,
            feasible: false,
            zero_vector: true,
        };
    }
    let rw = shifted_inv.as_nalgebra() * w;
    let quadform = w.dot(&rw);
    let numerator = l.as_nalgebra().tr_mul(&rw).norm_squared();
    let potential_after_add = phi_after_shift - numerator / (1.0 + quadform);
    Feasibility {
        quadform,
        potential_after_add,
        potential_before: phi_before,
        feasible: quadform < -1.0 && potential_after_add <= phi_before,
        zero_vector: false,
    }
}

fn pick(
    evaluated: &[(usize, Feasibility)],
    rule: PivotRule,
    tie: f64,
    accept: impl Fn(&Feasibility) -> bool,
) -> Option<usize> {
    let mut passing = evaluated.iter().enumerate().filter(|(_, (_, f))| accept(f));
    match rule {
        PivotRule::FirstFeasible => passing.next().map(|(pos, _)| pos),
        PivotRule::GreedyMinPotential => {
            let passing: Vec<_> = passing.collect();
            let best = passing
                .iter()
                .map(|(_, (_, f))| f.potential_after_add)
                .fold(f64::INFINITY, f64::min);
            let cutoff = best + tie * best.abs();
            passing
                .into_iter()
                .find(|(_, (_, f))| f.potential_after_add <= cutoff)
                .map(|(pos, _)| pos)
        }
    }
}

/// Chooses the next index for `state`.
///
/// Candidates already in `sigma` are skipped. If no candidate passes both
/// tests exactly, the scan is repeated with `tolerances.retry_slack`; if that
/// also fails the step reports the best margins seen.
pub fn select_next(
    state: &SelectionState,
    schedule: &Schedule,
    dec: &Decomposition,
    config: &SelectorConfig,
) -> Result<(usize, StepTrace)> {
    let tol = &config.tolerances;
    let step = state.step();
    if step >= schedule.steps {
        return Err(Error::Parameter(format!(
            "all {} steps of the schedule have been taken",
            schedule.steps
        )));
    }
    let l = dec.operator();
    let m = dec.m();
    let order = config.scan_order(m)?;

    let b = state.barrier();
    let b_prime = schedule.barrier_at(step + 1);
    let view = SpectralView::new(state.eigen(), l, tol);
    view.check_shift(b_prime)?;
    let preconditions = diagnostics_from_view(&view, b, schedule, tol);
    let phi_b = preconditions.potential;
    let phi_b_prime = preconditions.potential_shifted;
    let resolvent = state.eigen().shifted_inverse(b_prime)?;

    let mut taken = vec![false; m];
    for &j in state.sigma() {
        taken[j] = true;
    }

    let mut evaluated = Vec::with_capacity(m);
    let mut found = None;
    for &j in order.iter().filter(|&&j| !taken[j]) {
        let f = candidate_feasible(&resolvent, l, &dec.image(j), phi_b, phi_b_prime);
        evaluated.push((j, f));
        if config.pivot == PivotRule::FirstFeasible && f.feasible {
            found = Some(evaluated.len() - 1);
            break;
        }
    }
    let candidates_scanned = evaluated.len();

    let mut relaxed = false;
    if found.is_none() {
        found = pick(&evaluated, config.pivot, tol.tie, |f| f.feasible);
    }
    if found.is_none() {
        relaxed = true;
        found = pick(&evaluated, config.pivot, tol.tie, |f| {
            f.passes_with_slack(tol.retry_slack)
        });
    }
    let Some(pos) = found else {
        let live = evaluated.iter().filter(|(_, f)| !f.zero_vector);
        let best_rank_margin = live
            .clone()
            .map(|(_, f)| f.rank_margin())
            .fold(f64::NEG_INFINITY, f64::max);
        let best_potential_margin = live
            .map(|(_, f)| f.potential_margin())
            .fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::Infeasible {
            step,
            best_rank_margin,
            best_potential_margin,
        });
    };

    let (chosen, f) = evaluated[pos];
    let trace = StepTrace {
        step,
        chosen,
        barrier_before: b,
        barrier_after: b_prime,
        potential_before: phi_b,
        potential_after: f.potential_after_add,
        split: view.split(b_prime),
        candidates_scanned,
        rank_margin: f.rank_margin(),
        potential_margin: f.potential_margin(),
        relaxed,
        preconditions,
        checks: None,
    };
    Ok((chosen, trace))
}

/// Runs the full selection with the default scan order.
pub fn run_selection(
    dec: &Decomposition,
    epsilon: f64,
    pivot: PivotRule,
    tol: &Tolerances,
) -> Result<SelectionResult> {
    run_selection_with(dec, epsilon, &SelectorConfig::new(pivot, *tol))
}

pub fn run_selection_with(
    dec: &Decomposition,
    epsilon: f64,
    config: &SelectorConfig,
) -> Result<SelectionResult> {
    let tol = &config.tolerances;
    dec.check(tol)?;
    let schedule = compute_schedule(dec.operator(), dec.m(), epsilon)?;
    let mut state = SelectionState::initial(dec.n(), &schedule);
    let mut traces = Vec::with_capacity(schedule.steps);

    for _ in 0..schedule.steps {
        let (chosen, mut trace) = select_next(&state, &schedule, dec, config)?;
        let before = state.eigen().eigenvalues.clone();
        state.push(chosen, &dec.image(chosen), trace.barrier_after);

        let view = SpectralView::new(state.eigen(), dec.operator(), tol);
        let potential_recomputed = view.potential(state.barrier());
        let ceiling = trace.potential_before + tol.relative_slack * trace.potential_before.abs();
        trace.checks = Some(StepChecks {
            potential_recomputed,
            barrier_invariant_ok: state.barrier_invariant_holds(tol),
            interlacing_ok: interlaces(&before, &state.eigen().eigenvalues, tol.interlacing),
            monotone_ok: potential_recomputed <= ceiling,
        });
        traces.push(trace);
    }

    Ok(SelectionResult {
        sigma: state.sigma().to_vec(),
        vacuous: schedule.is_vacuous(),
        schedule,
        traces,
        final_eigenvalues: state.eigen().eigenvalues.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{random_operator, random_tight_frame};
    use crate::matrix::gram_min_eigenvalue;
    use crate::selector::potential;
    use crate::FrameMode;
    use approx::assert_relative_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn mercedes() -> Decomposition {
        let r = (2.0f64 / 3.0).sqrt();
        let rows: Vec<f64> = [0.0f64, 120.0, 240.0]
            .iter()
            .flat_map(|deg| {
                let t = deg.to_radians();
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let frame = DenseMatrix::from_row_major(3, 2, &rows).unwrap();
        Decomposition::new(DenseMatrix::identity(2), frame, FrameMode::Frame).unwrap()
    }

    fn e(i: usize, n: usize) -> Vector {
        Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn first_candidate_at_start() {
        // A = 0, L = I4, b = 0.5, b' = 0.25: R = -4 I.
        let r = DenseMatrix::identity(4).scaled(-4.0);
        let f = candidate_feasible(&r, &DenseMatrix::identity(4), &e(0, 4), -8.0, -16.0);
        assert_eq!(f.quadform, -4.0);
        assert_relative_eq!(
            f.potential_after_add,
            -10.666_666_666_666_666,
            max_relative = 1e-14
        );
        assert!(f.feasible);
    }

    #[test]
    fn update_formula_matches_recomputed_potential() {
        let l = random_operator(5, 9);
        let mut a = DenseMatrix::zeros(5, 5).into_nalgebra();
        let w0 = l.column(1);
        a += &w0 * w0.transpose();
        let a = DenseMatrix::from_nalgebra(a).unwrap();
        let (b, b_prime) = (0.09, 0.05);
        let r = crate::matrix::shifted_inverse(&a, b_prime).unwrap();
        let phi_b = potential(&a, b, &l).unwrap();
        let phi_bp = potential(&a, b_prime, &l).unwrap();
        for j in [0, 2, 3] {
            let w = l.column(j);
            let f = candidate_feasible(&r, &l, &w, phi_b, phi_bp);
            let updated = DenseMatrix::from_nalgebra(a.as_nalgebra() + &w * w.transpose()).unwrap();
            let direct = potential(&updated, b_prime, &l).unwrap();
            assert_relative_eq!(f.potential_after_add, direct, max_relative = 1e-8);
        }
    }

    #[test]
    fn selected_direction_cannot_grow_rank() {
        // A = e1 e1^T, b' = 0.25: (A - b'I)^{-1} is positive on e1.
        let a = DenseMatrix::from_diagonal(&[1.0, 0.0, 0.0, 0.0]);
        let r = crate::matrix::shifted_inverse(&a, 0.25).unwrap();
        let f = candidate_feasible(&r, &DenseMatrix::identity(4), &e(0, 4), -10.0, -13.0);
        assert!(f.quadform > 0.0);
        assert!(!f.feasible);
    }

    #[test]
    fn zero_vector_is_skipped() {
        let r = DenseMatrix::identity(3).scaled(-2.0);
        let f = candidate_feasible(&r, &DenseMatrix::identity(3), &Vector::zeros(3), -1.0, -2.0);
        assert!(f.zero_vector);
        assert!(!f.feasible);
    }

    #[test]
    fn identity_picks_first_index() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::identity(4)).unwrap();
        let schedule = compute_schedule(dec.operator(), 4, 0.5).unwrap();
        let state = SelectionState::initial(4, &schedule);
        let (j, trace) = select_next(&state, &schedule, &dec, &SelectorConfig::default()).unwrap();
        assert_eq!(j, 0);
        assert_eq!(trace.candidates_scanned, 1);
        assert!(!trace.relaxed);
    }

    #[test]
    fn mercedes_first_step_matches_exhaustive_scan() {
        let dec = mercedes();
        let schedule = compute_schedule(dec.operator(), 3, 0.75).unwrap();
        assert_eq!(schedule.steps, 1);
        let state = SelectionState::initial(2, &schedule);
        let b_prime = schedule.barrier_at(1);
        let r = crate::matrix::shifted_inverse(state.a(), b_prime).unwrap();
        let phi_b = potential(state.a(), schedule.b0, dec.operator()).unwrap();
        let phi_bp = potential(state.a(), b_prime, dec.operator()).unwrap();
        let scan: Vec<_> = (0..3)
            .map(|j| candidate_feasible(&r, dec.operator(), &dec.image(j), phi_b, phi_bp))
            .collect();
        assert!(scan.iter().all(|f| f.feasible));
        for rule in [PivotRule::FirstFeasible, PivotRule::GreedyMinPotential] {
            let cfg = SelectorConfig::new(rule, tol());
            let (j, _) = select_next(&state, &schedule, &dec, &cfg).unwrap();
            assert_eq!(j, 0);
            assert!(scan[j].feasible);
        }
    }

    #[test]
    fn mercedes_run_clears_bound() {
        let res = run_selection(&mercedes(), 0.75, PivotRule::FirstFeasible, &tol()).unwrap();
        assert_eq!(res.sigma.len(), 1);
        let lambda = gram_min_eigenvalue(&[mercedes().image(res.sigma[0])]).unwrap();
        assert_relative_eq!(lambda, 2.0 / 3.0, max_relative = 1e-14);
        assert!(lambda > 0.25f64.powi(2) * 2.0 / 3.0);
        assert!(res.invariants_hold());
    }

    #[test]
    fn identity_runs_select_orthonormal_sets() {
        for n in [4usize, 8, 9] {
            for eps in [0.5, 0.7, 0.95] {
                let dec = Decomposition::from_standard_basis(DenseMatrix::identity(n)).unwrap();
                let res = run_selection(&dec, eps, PivotRule::FirstFeasible, &tol()).unwrap();
                assert_eq!(res.sigma.len(), res.schedule.steps);
                if res.sigma.is_empty() {
                    continue;
                }
                let vecs: Vec<_> = res.sigma.iter().map(|&j| dec.image(j)).collect();
                let lambda = gram_min_eigenvalue(&vecs).unwrap();
                assert!((lambda - 1.0).abs() < 1e-12);
                assert!(res.invariants_hold());
            }
        }
    }

    #[test]
    fn every_step_of_identity_eight_meets_preconditions() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::identity(8)).unwrap();
        let res = run_selection(&dec, 0.5, PivotRule::FirstFeasible, &tol()).unwrap();
        assert_eq!(res.sigma.len(), 2);
        for t in &res.traces {
            assert!(t.preconditions.all_ok(), "{t:?}");
        }
    }

    #[test]
    fn vacuous_run_is_empty() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::identity(4)).unwrap();
        let res = run_selection(&dec, 0.4, PivotRule::FirstFeasible, &tol()).unwrap();
        assert!(res.vacuous);
        assert!(res.sigma.is_empty());
        assert!(res.traces.is_empty());
        assert_eq!(res.final_lambda_min(), None);
    }

    #[test]
    fn rank_deficient_operator_skips_kernel_vectors() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::from_diagonal(&[1.0, 1.0, 0.0]))
            .unwrap();
        let res = run_selection(&dec, 0.8, PivotRule::FirstFeasible, &tol()).unwrap();
        assert_eq!(res.sigma, vec![0]);
    }

    #[test]
    fn greedy_and_first_both_satisfy_bound_on_frames() {
        for seed in 1..4 {
            let frame = random_tight_frame(5, 10, seed).unwrap();
            let dec =
                Decomposition::new(random_operator(5, seed), frame, FrameMode::Frame).unwrap();
            for rule in [PivotRule::FirstFeasible, PivotRule::GreedyMinPotential] {
                let res = run_selection(&dec, 0.8, rule, &tol()).unwrap();
                if res.vacuous {
                    continue;
                }
                let lam = res.final_lambda_min().unwrap();
                assert!(lam > res.schedule.guarantee_bound());
                assert!(res.invariants_hold());
                for t in &res.traces {
                    let c = t.checks.unwrap();
                    assert_relative_eq!(
                        t.potential_after,
                        c.potential_recomputed,
                        max_relative = 1e-8
                    );
                }
            }
        }
    }

    #[test]
    fn select_next_refuses_past_schedule() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::identity(4)).unwrap();
        let schedule = compute_schedule(dec.operator(), 4, 0.5).unwrap();
        let state = SelectionState::from_sigma(&dec, &schedule, &[2]).unwrap();
        assert!(matches!(
            select_next(&state, &schedule, &dec, &SelectorConfig::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn bad_scan_order_rejected() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::identity(4)).unwrap();
        let cfg = SelectorConfig {
            scan_order: Some(vec![0, 1, 1, 2]),
            ..SelectorConfig::default()
        };
        assert_eq!(
            run_selection_with(&dec, 0.5, &cfg).unwrap_err(),
            Error::DuplicateIndex(1)
        );
    }

    #[test]
    fn scan_order_changes_first_feasible() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::identity(4)).unwrap();
        let cfg = SelectorConfig {
            scan_order: Some(vec![3, 1, 0, 2]),
            ..SelectorConfig::default()
        };
        assert_eq!(run_selection_with(&dec, 0.5, &cfg).unwrap().sigma, vec![3]);
    }

    #[test]
    fn invalid_frame_rejected() {
        let frame = DenseMatrix::from_row_major(2, 1, &[1.0, 1.0]).unwrap();
        let dec = Decomposition::new(DenseMatrix::identity(1), frame, FrameMode::Frame).unwrap();
        assert!(matches!(
            run_selection(&dec, 0.5, PivotRule::FirstFeasible, &tol()),
            Err(Error::NotIdentity { .. })
        ));
    }
}
