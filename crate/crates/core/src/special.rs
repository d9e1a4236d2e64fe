//! Scalar special functions shared by the series and densities.
//!
//! Everything gamma-bearing is returned as a logarithm; callers exponentiate
//! only when they need a probability.

use std::f64::consts::PI;

use crate::algebra::AlgebraDim;
use crate::error::{Error, Result};
use crate::partition::Partition;

/// `ln Γ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Rising factorial `(a)_k = a (a + 1) ... (a + k - 1)`.
pub fn rising_factorial(a: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a + j as f64))
}

/// Generalised Pochhammer symbol `[a]_κ = Π_i (a - (i-1)β/2)_{κ_i}`.
pub fn gen_pochhammer(a: f64, kappa: &Partition, beta: AlgebraDim) -> f64 {
    let half_beta = beta.beta_f64() / 2.0;
    kappa.parts().iter().enumerate().map(|(i, &k)| rising_factorial(a - i as f64 * half_beta, k)).product()
}

/// `ln Γ_m^β[a]`, the log multivariate gamma function over the algebra.
///
/// Requires `a > (m-1)β/2`.
pub fn mv_gamma_log(a: f64, m: usize, beta: AlgebraDim) -> Result<f64> {
    if m == 0 {
        return Err(Error::Parameter("multivariate gamma needs m >= 1".into()));
    }
    let half_beta = beta.beta_f64() / 2.0;
    let threshold = (m as f64 - 1.0) * half_beta;
    if !(a > threshold) || !a.is_finite() {
        return Err(Error::Domain(format!(
            "multivariate gamma requires a > (m-1)beta/2 = {threshold} (got a = {a}, m = {m}, {beta})"
        )));
    }
    let mf = m as f64;
    let log_pi_part = mf * (mf - 1.0) * beta.beta_f64() / 4.0 * PI.ln();
    let sum: f64 = (0..m).map(|i| ln_gamma(a - i as f64 * half_beta)).sum();
    Ok(log_pi_part + sum)
}

/// Log volume of the Stiefel manifold of `n x m` matrices with orthonormal
/// columns over the algebra: `2^m π^{mnβ/2} / Γ_m^β[nβ/2]`.
pub fn stiefel_volume_log(m: usize, n: usize, beta: AlgebraDim) -> Result<f64> {
    if m == 0 || n < m {
        return Err(Error::Domain(format!("Stiefel manifold needs n >= m >= 1 (got m = {m}, n = {n})")));
    }
    let b = beta.beta_f64();
    let (mf, nf) = (m as f64, n as f64);
    let gamma = mv_gamma_log(nf * b / 2.0, m, beta)?;
    Ok(mf * std::f64::consts::LN_2 + mf * nf * b / 2.0 * PI.ln() - gamma)
}

/// The exponent of π in the singular value / spectral decomposition
/// Jacobians: `0, -m, -2m, -4m` for `β = 1, 2, 4, 8`.
pub fn tau(m: usize, beta: AlgebraDim) -> i64 {
    let m = m as i64;
    match beta {
        AlgebraDim::Real => 0,
        AlgebraDim::Complex => -m,
        AlgebraDim::Quaternion => -2 * m,
        AlgebraDim::Octonion => -4 * m,
    }
}
