//! Exhaustive search over subsets, for checking the selector on small inputs.
//!
//! The search only uses the decomposition and Gram spectra; it shares no code
//! with the selector.

use itertools::Itertools;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::matrix::{gram_min_eigenvalue, sym_eigen_unchecked};
use crate::{certificate, run_selection, Decomposition, Error, PivotRule, Result, Tolerances};

/// Largest number of subsets [`exhaustive_best_subset`] will enumerate.
pub const SUBSET_LIMIT: u128 = 1_000_000;

pub fn binomial(m: usize, t: usize) -> u128 {
    if t > m {
        return 0;
    }
    let t = t.min(m - t) as u128;
    (0..t).fold(1u128, |acc, i| acc * (m as u128 - i) / (i + 1))
}

#[derive(Debug, Clone)]
struct Best {
    lambda: f64,
    subset: Vec<usize>,
}

impl Best {
    /// Keeps the earlier subset unless the challenger is better beyond the tie tolerance.
    fn merge(self, other: Best) -> Best {
        let tie = Tolerances::DEFAULT.tie * self.lambda.abs();
        if other.lambda > self.lambda + tie {
            other
        } else {
            self
        }
    }
}

fn sub_gram_min(gram: &DMatrix<f64>, subset: &[usize]) -> f64 {
    let t = subset.len();
    let sub = DMatrix::from_fn(t, t, |r, c| gram[(subset[r], subset[c])]);
    *sym_eigen_unchecked(&sub)
        .eigenvalues
        .last()
        .expect("nonempty")
}

/// Size-`t` subset maximizing the smallest Gram eigenvalue of `{L v_i}`.
///
/// Subsets are visited in lexicographic order and the first of any tied
/// maxima wins. The work is split by smallest index, so the answer does not
/// depend on thread count. For `t = 0` the result is the empty set with
/// `lambda = +inf`.
pub fn exhaustive_best_subset(dec: &Decomposition, t: usize) -> Result<(Vec<usize>, f64)> {
    let m = dec.m();
    if t > m {
        return Err(Error::Parameter(format!(
            "cannot choose {t} of {m} vectors"
        )));
    }
    if t == 0 {
        return Ok((Vec::new(), f64::INFINITY));
    }
    let count = binomial(m, t);
    if count > SUBSET_LIMIT {
        return Err(Error::TooLarge {
            count,
            limit: SUBSET_LIMIT,
        });
    }
    let w = dec.images();
    let gram = w.transpose() * &w;

    let per_first: Vec<Best> = (0..=m - t)
        .into_par_iter()
        .map(|first| {
            ((first + 1)..m)
                .combinations(t - 1)
                .map(|rest| {
                    let mut subset = Vec::with_capacity(t);
                    subset.push(first);
                    subset.extend(rest);
                    Best {
                        lambda: sub_gram_min(&gram, &subset),
                        subset,
                    }
                })
                .reduce(Best::merge)
                .expect("at least one subset per leading index")
        })
        .collect();
    let best = per_first
        .into_iter()
        .reduce(Best::merge)
        .expect("nonempty search");
    Ok((best.subset, best.lambda))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub epsilon: f64,
    pub t: usize,
    /// Selector output, 0-based.
    pub algo_sigma: Vec<usize>,
    pub algo_lambda: f64,
    /// Best subset of the same size, 0-based.
    pub oracle_sigma: Vec<usize>,
    pub oracle_lambda: f64,
    pub bound: f64,
    pub vacuous: bool,
    /// `bound < algo_lambda <= oracle_lambda + 1e-9`.
    pub holds: bool,
}

/// Runs the selector and the exhaustive search on the same input and checks
/// `bound < algo_lambda <= oracle_lambda + 1e-9`.
pub fn compare_to_guarantee(
    dec: &Decomposition,
    epsilon: f64,
    tol: &Tolerances,
) -> Result<OracleReport> {
    let result = run_selection(dec, epsilon, PivotRule::FirstFeasible, tol)?;
    let cert = certificate::verify(dec, epsilon, &result.sigma, tol)?;
    let t = cert.subset_size_bound;
    let (oracle_sigma, oracle_lambda) = exhaustive_best_subset(dec, t)?;
    let algo_lambda = if result.sigma.is_empty() {
        f64::INFINITY
    } else {
        let images: Vec<_> = result.sigma.iter().map(|&i| dec.image(i)).collect();
        gram_min_eigenvalue(&images)?
    };
    let bound = cert.guarantee_bound;
    let holds = if result.vacuous {
        result.sigma.is_empty()
    } else {
        bound < algo_lambda && algo_lambda <= oracle_lambda + 1e-9
    };
    Ok(OracleReport {
        epsilon,
        t,
        algo_sigma: result.sigma,
        algo_lambda,
        oracle_sigma,
        oracle_lambda,
        bound,
        vacuous: result.vacuous,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{random_operator, random_tight_frame};
    use crate::{DenseMatrix, FrameMode};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

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

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(24, 9), 1_307_504);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(7, 0), 1);
    }

    #[test]
    fn larger_column_wins() {
        let dec =
            Decomposition::from_standard_basis(DenseMatrix::from_diagonal(&[3.0, 1.0])).unwrap();
        let (s, l) = exhaustive_best_subset(&dec, 1).unwrap();
        assert_eq!(s, vec![0]);
        assert_relative_eq!(l, 9.0);
    }

    #[test]
    fn ties_go_to_first_subset() {
        let (s, l) = exhaustive_best_subset(&mercedes(), 1).unwrap();
        assert_eq!(s, vec![0]);
        assert_relative_eq!(l, 2.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn empty_subset_sentinel() {
        let (s, l) = exhaustive_best_subset(&mercedes(), 0).unwrap();
        assert!(s.is_empty());
        assert_eq!(l, f64::INFINITY);
    }

    #[test]
    fn guard_refuses_large_searches() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::identity(30)).unwrap();
        assert!(matches!(
            exhaustive_best_subset(&dec, 15),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn identity_six() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::identity(6)).unwrap();
        let r = compare_to_guarantee(&dec, 0.5, &Tolerances::default()).unwrap();
        assert_eq!(r.t, 1);
        assert_eq!(r.bound, 0.25);
        assert_eq!(r.algo_lambda, 1.0);
        assert_eq!(r.oracle_lambda, 1.0);
        assert!(r.holds);
    }

    #[test]
    fn random_frame_sandwich() {
        let frame = random_tight_frame(4, 8, 1).unwrap();
        let dec = Decomposition::new(DenseMatrix::identity(4), frame, FrameMode::Frame).unwrap();
        let r = compare_to_guarantee(&dec, 0.6, &Tolerances::default()).unwrap();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn vacuous_report() {
        let dec = Decomposition::from_standard_basis(DenseMatrix::identity(4)).unwrap();
        let r = compare_to_guarantee(&dec, 0.4, &Tolerances::default()).unwrap();
        assert!(r.vacuous && r.holds);
        assert!(r.algo_sigma.is_empty() && r.oracle_sigma.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn search_is_exhaustive(n in 2usize..5, extra in 0usize..4, t in 1usize..4, seed in 0u64..1000) {
            let m = n + extra;
            prop_assume!(t <= m);
            let frame = random_tight_frame(n, m, seed).unwrap();
            let dec = Decomposition::new(random_operator(n, seed), frame, FrameMode::Frame).unwrap();
            let (_, best) = exhaustive_best_subset(&dec, t).unwrap();
            // Straight sequential scan with the generic Gram routine.
            let brute = (0..m).combinations(t).map(|s| {
                let v: Vec<_> = s.iter().map(|&i| dec.image(i)).collect();
                gram_min_eigenvalue(&v).unwrap()
            }).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((best - brute).abs() <= 1e-12 * brute.abs().max(1.0));
        }
    }
}
