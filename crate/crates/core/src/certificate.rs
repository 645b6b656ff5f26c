//! Independent verification of a selected subset.
//!
//! Nothing here reads selector state: norms, bounds and the smallest Gram
//! eigenvalue are recomputed from the decomposition and the index list.

use serde::{Deserialize, Serialize};

use crate::matrix::{frobenius_norm_sq, gram_min_eigenvalue, spectral_norm, DenseMatrix};
use crate::{Decomposition, Error, Result, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    /// Indices as given, 0-based.
    pub sigma: Vec<usize>,
    pub epsilon: f64,
    /// Minimum subset size the guarantee promises.
    pub subset_size_bound: usize,
    /// Smallest Gram eigenvalue of the selected images; `+inf` for an empty subset.
    pub lambda_min: f64,
    /// The value `lambda_min` must strictly exceed.
    pub guarantee_bound: f64,
    pub stable_rank: f64,
    pub b0: f64,
    pub delta: f64,
    pub independent: bool,
    pub passes: bool,
    pub vacuous: bool,
    pub tolerances: Tolerances,
}

/// The stable JSON form of a certificate. Indices are 1-based and ascending;
/// `lambda_min` is `null` for an empty subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub sigma: Vec<usize>,
    pub epsilon: f64,
    pub t: usize,
    pub lambda_min: Option<f64>,
    pub bound: f64,
    pub stable_rank: f64,
    pub b0: f64,
    pub delta: f64,
    pub passes: bool,
    pub vacuous: bool,
}

impl Certificate {
    pub fn record(&self) -> CertificateRecord {
        let mut sigma: Vec<usize> = self.sigma.iter().map(|i| i + 1).collect();
        sigma.sort_unstable();
        CertificateRecord {
            sigma,
            epsilon: self.epsilon,
            t: self.subset_size_bound,
            lambda_min: self.lambda_min.is_finite().then_some(self.lambda_min),
            bound: self.guarantee_bound,
            stable_rank: self.stable_rank,
            b0: self.b0,
            delta: self.delta,
            passes: self.passes,
            vacuous: self.vacuous,
        }
    }
}

impl CertificateRecord {
    /// `sigma` converted back to 0-based indices.
    pub fn zero_based_sigma(&self) -> Result<Vec<usize>> {
        self.sigma
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .ok_or_else(|| Error::Parameter("certificate indices are 1-based".into()))
            })
            .collect()
    }
}

fn check_indices(sigma: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for &i in sigma {
        if i >= m {
            return Err(Error::Index { index: i, m });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

struct Bounds {
    subset_size: usize,
    lambda: f64,
}

fn certify(
    dec: &Decomposition,
    epsilon: f64,
    sigma: &[usize],
    tol: &Tolerances,
    bounds: impl FnOnce(f64, f64, f64) -> Bounds,
) -> Result<Certificate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon must lie strictly between 0 and 1, got {epsilon}"
        )));
    }
    dec.check(tol)?;
    check_indices(sigma, dec.m())?;
    let l = dec.operator();
    if l.is_zero() {
        return Err(Error::ZeroOperator);
    }
    let m = dec.m() as f64;
    let frob = frobenius_norm_sq(l);
    let spec = spectral_norm(l).powi(2);
    let stable_rank = frob / spec;
    let Bounds {
        subset_size,
        lambda: guarantee_bound,
    } = bounds(frob, spec, m);

    let images: Vec<_> = sigma.iter().map(|&i| dec.image(i)).collect();
    let (lambda_min, independent) = if images.is_empty() {
        (f64::INFINITY, true)
    } else {
        let lambda = gram_min_eigenvalue(&images)?;
        let scale = images.iter().map(|w| w.norm_squared()).fold(0.0, f64::max);
        (lambda, lambda > tol.independence * scale)
    };
    let passes = sigma.len() >= subset_size && independent && lambda_min > guarantee_bound;

    Ok(Certificate {
        sigma: sigma.to_vec(),
        epsilon,
        subset_size_bound: subset_size,
        lambda_min,
        guarantee_bound,
        stable_rank,
        b0: (1.0 - epsilon) * frob / m,
        delta: (1.0 - epsilon) * spec / (epsilon * m),
        independent,
        passes,
        vacuous: subset_size == 0,
        tolerances: *tol,
    })
}

/// Checks `sigma` against the general guarantee: at least
/// `floor(eps^2 srank(L))` indices, images linearly independent, and
/// Gram `lambda_min > (1 - eps)^2 ||L||_F^2 / m`.
pub fn verify(
    dec: &Decomposition,
    epsilon: f64,
    sigma: &[usize],
    tol: &Tolerances,
) -> Result<Certificate> {
    certify(dec, epsilon, sigma, tol, |frob, spec, m| Bounds {
        subset_size: (epsilon * epsilon * frob / spec).floor() as usize,
        lambda: (1.0 - epsilon).powi(2) * frob / m,
    })
}

/// The unit-column special case: `L` has unit columns, `v_i = e_i`, and the
/// requirement is `|sigma| >= floor(eps^2 n / ||L||_2^2)` with
/// `||sum_{i in sigma} a_i L e_i||^2 > (1 - eps)^2 sum |a_i|^2` for all
/// coefficients, i.e. Gram `lambda_min > (1 - eps)^2`.
pub fn verify_classical(
    l: &DenseMatrix,
    epsilon: f64,
    sigma: &[usize],
    tol: &Tolerances,
) -> Result<Certificate> {
    let dec = Decomposition::classical(l.clone(), tol)?;
    let n = dec.n() as f64;
    certify(&dec, epsilon, sigma, tol, |_, spec, _| Bounds {
        subset_size: (epsilon * epsilon * n / spec).floor() as usize,
        lambda: (1.0 - epsilon).powi(2),
    })
}
