//! Internal helpers for dense complex matrices (the doubled representation).

use nalgebra::DMatrix as NaMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type CMat = NaMatrix<Complex64>;

/// Inverse with a conditioning gate; fails when the Frobenius estimate
/// `|A| |A^-1|` (an upper bound on the 2-norm condition number up to the
/// dimension) exceeds `max_cond`.
pub(crate) fn inv_gated(m: &CMat, max_cond: f64) -> Result<CMat> {
    let inv = m
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let cond = m.norm() * inv.norm();
    if !cond.is_finite() || cond > max_cond {
        return Err(Error::IllConditioned { cond });
    }
    Ok(inv)
}

/// Eigenvalues of a general complex matrix via the Schur form.
pub(crate) fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    if let Some(ev) = m.clone().eigenvalues() {
        return Ok(ev.iter().cloned().collect());
    }
    // Retry with a looser convergence budget before giving up.
    m.clone()
        .try_schur(1e-12, 100_000)
        .and_then(|s| s.eigenvalues())
        .map(|ev| ev.iter().cloned().collect())
        .ok_or_else(|| Error::AmbiguousPairing("eigenvalue iteration did not converge".into()))
}
