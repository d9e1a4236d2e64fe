//! Generalised Wishart densities, the central eigenvalue density and the
//! central largest-eigenvalue CDF.
//!
//! Every evaluator has two entry points: one taking matrices, and a spectral
//! one (`*_from` / `*_spectral`) taking precomputed spectra and log
//! determinants. The spectral form is the only route for octonions.

use std::f64::consts::PI;

use crate::algebra::AlgebraDim;
use crate::elliptical::{elliptical_constant_log, GeneratorFunction};
use crate::error::{Error, Result};
use crate::hyp::{hyp_pfq, hyp_pfq_two, Coefficients, HypParams};
use crate::jack::{JackTable, Spectrum};
use crate::linalg::{product_spectrum, AlgebraMatrix, HermitianMatrix};
use crate::series::{sum_layers, ConvergenceReport, SeriesControl, SeriesValue};
use crate::special::{mv_gamma_log, stiefel_volume_log};

/// Degrees of freedom, scale and noncentrality of a Wishart law.
///
/// The noncentrality is stored as `M = μ* Θ⁻¹ μ`, so that `Ω = Σ⁻¹ M`.
#[derive(Debug, Clone, PartialEq)]
pub struct WishartParams {
    n: f64,
    sigma: HermitianMatrix,
    noncentrality: Option<HermitianMatrix>,
}

fn check_degrees(n: f64, m: usize) -> Result<()> {
    if !n.is_finite() || !(n > m as f64 - 1.0) {
        return Err(Error::Domain(format!("degrees of freedom must exceed m - 1 = {} (got n = {n})", m as f64 - 1.0)));
    }
    Ok(())
}

impl WishartParams {
    pub fn central(n: f64, sigma: HermitianMatrix) -> Result<Self> {
        check_degrees(n, sigma.m())?;
        sigma.positive_definite_spectrum()?;
        Ok(WishartParams { n, sigma, noncentrality: None })
    }

    /// `noncentrality` is `M = μ* Θ⁻¹ μ`; a zero matrix gives the central law.
    pub fn noncentral(n: f64, sigma: HermitianMatrix, noncentrality: HermitianMatrix) -> Result<Self> {
        let mut p = Self::central(n, sigma)?;
        if noncentrality.m() != p.m() || noncentrality.beta() != p.beta() {
            return Err(Error::DimensionMismatch(format!(
                "noncentrality is {}x{} (beta={}) but Sigma is {}x{} (beta={})",
                noncentrality.m(),
                noncentrality.m(),
                noncentrality.beta(),
                p.m(),
                p.m(),
                p.beta()
            )));
        }
        let s = noncentrality.spectrum()?;
        if s.smallest() < -1e-12 * s.max_abs().max(1.0) {
            return Err(Error::NotPositiveDefinite(s.smallest()));
        }
        if s.max_abs() > 0.0 {
            p.noncentrality = Some(noncentrality);
        }
        Ok(p)
    }

    /// Noncentrality of `S = X* Θ⁻¹ X` when `X` has mean `mu`.
    pub fn from_mean(n: f64, sigma: HermitianMatrix, mu: &AlgebraMatrix, theta: &HermitianMatrix) -> Result<Self> {
        Self::noncentral(n, sigma, crate::linalg::gram(mu, theta)?)
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.sigma.m()
    }

    pub fn beta(&self) -> AlgebraDim {
        self.sigma.beta()
    }

    pub fn sigma(&self) -> &HermitianMatrix {
        &self.sigma
    }

    pub fn noncentrality(&self) -> Option<&HermitianMatrix> {
        self.noncentrality.as_ref()
    }

    pub fn is_central(&self) -> bool {
        self.noncentrality.is_none()
    }

    /// The same scale and degrees of freedom without noncentrality.
    pub fn to_central(&self) -> WishartParams {
        WishartParams { n: self.n, sigma: self.sigma.clone(), noncentrality: None }
    }

    /// `tr Ω = tr Σ⁻¹ M`.
    pub fn omega_trace(&self) -> Result<f64> {
        match &self.noncentrality {
            None => Ok(0.0),
            Some(nc) => Ok(self.sigma.inverse()?.as_algebra().mul(nc.as_algebra())?.plane(0).trace()),
        }
    }

    fn require_central(&self) -> Result<()> {
        if self.is_central() {
            Ok(())
        } else {
            Err(Error::Parameter("this evaluator is only available for the central case".into()))
        }
    }
}

/// Scalar summaries of `(S, Σ, Ω)` that the densities depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityInputs {
    pub m: usize,
    pub n: f64,
    pub beta: AlgebraDim,
    pub log_det_s: f64,
    pub log_det_sigma: f64,
    /// `tr Σ⁻¹ S`
    pub trace_sigma_inv_s: f64,
    /// `tr Ω`
    pub trace_omega: f64,
    /// Spectrum of `Ω Σ⁻¹ S`; `None` in the central case.
    pub omega_spectrum: Option<Spectrum>,
}

impl DensityInputs {
    pub fn new(s: &HermitianMatrix, p: &WishartParams) -> Result<Self> {
        if s.m() != p.m() || s.beta() != p.beta() {
            return Err(Error::DimensionMismatch(format!(
                "S is {}x{} (beta={}) but Sigma is {}x{} (beta={})",
                s.m(),
                s.m(),
                s.beta(),
                p.m(),
                p.m(),
                p.beta()
            )));
        }
        let log_det_s = s.log_det()?;
        let log_det_sigma = p.sigma.log_det()?;
        let sigma_inv = p.sigma.inverse()?;
        let trace_sigma_inv_s = sigma_inv.as_algebra().mul(s.as_algebra())?.plane(0).trace();
        let omega_spectrum = match &p.noncentrality {
            None => None,
            Some(nc) => {
                // Ω Σ⁻¹ S = Σ⁻¹ M Σ⁻¹ S, similar to M^{1/2} (Σ⁻¹ S Σ⁻¹) M^{1/2}
                let inner = s.congruence(sigma_inv.as_algebra())?;
                let spec = product_spectrum(&inner, nc)?;
                Some(Spectrum::new(spec.values().iter().map(|v| v.max(0.0)).collect())?)
            }
        };
        Ok(DensityInputs {
            m: p.m(),
            n: p.n,
            beta: p.beta(),
            log_det_s,
            log_det_sigma,
            trace_sigma_inv_s,
            trace_omega: p.omega_trace()?,
            omega_spectrum,
        })
    }

    /// Inputs for jointly diagonal `S`, `Σ` and `M` given by their diagonals.
    /// Works for every algebra, including the octonions.
    pub fn diagonal(n: f64, beta: AlgebraDim, s: &[f64], sigma: &[f64], noncentrality: Option<&[f64]>) -> Result<Self> {
        let m = s.len();
        if m == 0 || sigma.len() != m || noncentrality.is_some_and(|w| w.len() != m) {
            return Err(Error::DimensionMismatch("diagonals must be non-empty and of equal length".into()));
        }
        check_degrees(n, m)?;
        if let Some(&bad) = s.iter().chain(sigma).find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::NotPositiveDefinite(bad));
        }
        let omega_spectrum = match noncentrality {
            Some(w) if w.iter().any(|&v| v != 0.0) => {
                if let Some(&bad) = w.iter().find(|v| !(**v >= 0.0)) {
                    return Err(Error::NotPositiveDefinite(bad));
                }
                Some(Spectrum::new((0..m).map(|i| w[i] * s[i] / (sigma[i] * sigma[i])).collect())?)
            }
            _ => None,
        };
        let trace_omega = match noncentrality {
            Some(w) => (0..m).map(|i| w[i] / sigma[i]).sum(),
            None => 0.0,
        };
        Ok(DensityInputs {
            m,
            n,
            beta,
            log_det_s: s.iter().map(|v| v.ln()).sum(),
            log_det_sigma: sigma.iter().map(|v| v.ln()).sum(),
            trace_sigma_inv_s: (0..m).map(|i| s[i] / sigma[i]).sum(),
            trace_omega,
            omega_spectrum,
        })
    }

    fn validate(&self) -> Result<()> {
        check_degrees(self.n, self.m)?;
        let finite = [self.log_det_s, self.log_det_sigma, self.trace_sigma_inv_s, self.trace_omega];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("density inputs must be finite: {finite:?}")));
        }
        if let Some(w) = &self.omega_spectrum {
            if w.len() != self.m {
                return Err(Error::DimensionMismatch(format!(
                    "noncentral spectrum has {} values, expected {}",
                    w.len(),
                    self.m
                )));
            }
        }
        Ok(())
    }

    fn half_beta(&self) -> f64 {
        self.beta.beta_f64() / 2.0
    }

    /// `(β(n-m+1)/2 - 1) log|S|`
    fn det_term(&self) -> f64 {
        (self.half_beta() * (self.n - self.m as f64 + 1.0) - 1.0) * self.log_det_s
    }
}

fn trivial_series(value: f64, ctrl: &SeriesControl) -> SeriesValue {
    SeriesValue {
        value,
        report: ConvergenceReport {
            converged: true,
            degree: 0,
            max_degree: ctrl.max_degree,
            rel_tol: ctrl.rel_tol,
            layer_magnitudes: vec![],
        },
    }
}

/// Log density of the generalised Wishart law with generator `h` at `S`.
pub fn gw_density_log(
    s: &HermitianMatrix,
    p: &WishartParams,
    h: &GeneratorFunction,
    ctrl: &SeriesControl,
) -> Result<SeriesValue> {
    gw_density_log_from(&DensityInputs::new(s, p)?, h, ctrl)
}

/// [`gw_density_log`] from precomputed inputs.
///
/// ```text
/// log[π^{βmn/2} C^β(m,n) / (Γ_m[βn/2] |Σ|^{βn/2})] + (β(n-m+1)/2 - 1) log|S|
///   + log Σ_k h^(2k)(tr Σ⁻¹S + tr Ω)/k! Σ_{κ⊢k} C_κ(ΩΣ⁻¹S)/[βn/2]_κ
/// ```
pub fn gw_density_log_from(inputs: &DensityInputs, h: &GeneratorFunction, ctrl: &SeriesControl) -> Result<SeriesValue> {
    inputs.validate()?;
    let (m, n, beta) = (inputs.m, inputs.n, inputs.beta);
    let b2 = inputs.half_beta();
    let log_c = elliptical_constant_log(h, m, n, beta)?.log_c;
    let normalizer =
        b2 * m as f64 * n * PI.ln() + log_c - mv_gamma_log(b2 * n, m, beta)? - b2 * n * inputs.log_det_sigma;
    let series = generator_series(inputs, h, ctrl)?;
    Ok(SeriesValue { value: normalizer + inputs.det_term() + series.value, report: series.report })
}

/// `log Σ_k h^(2k)(v)/k! Σ_κ C_κ(Z)/[βn/2]_κ`, with `h(v)` factored out.
fn generator_series(inputs: &DensityInputs, h: &GeneratorFunction, ctrl: &SeriesControl) -> Result<SeriesValue> {
    let v = inputs.trace_sigma_inv_s + inputs.trace_omega;
    let (sign0, ln_h0) = h.ln_abs_derivative(0, v);
    let Some(z) = inputs.omega_spectrum.as_ref().filter(|z| z.max_abs() > 0.0) else {
        let value = if sign0 > 0.0 { ln_h0 } else { f64::NEG_INFINITY };
        return Ok(trivial_series(value, ctrl));
    };
    let reference = if ln_h0.is_finite() { ln_h0 } else { 0.0 };
    let params = HypParams::new(vec![], vec![inputs.half_beta() * inputs.n]);
    let mut table = JackTable::new(z, inputs.beta);
    let mut coefficients = Coefficients::new(&params, inputs.beta);
    let sum = sum_layers(ctrl, |k| {
        let (sign, ln_d) = h.ln_abs_derivative(2 * k, v);
        if sign == 0.0 {
            return Ok(0.0);
        }
        table.extend_to(k);
        let layer = coefficients.one_argument_layer(&table, k)?;
        Ok(sign * (ln_d - reference).exp() * layer)
    })?;
    if !(sum.value > 0.0) {
        return Err(Error::Domain(format!("generator series summed to a nonpositive value {}", sum.value)));
    }
    Ok(SeriesValue { value: reference + sum.value.ln(), report: sum.report })
}

/// Log density of the (noncentral) Wishart law at `S`.
pub fn wishart_density_log(s: &HermitianMatrix, p: &WishartParams, ctrl: &SeriesControl) -> Result<SeriesValue> {
    wishart_density_log_from(&DensityInputs::new(s, p)?, ctrl)
}

/// [`wishart_density_log`] from precomputed inputs.
///
/// ```text
/// -(βmn/2) log(2/β) - log Γ_m[βn/2] - (βn/2) log|Σ| + (β(n-m+1)/2 - 1) log|S|
///   - (β/2)(tr Σ⁻¹S + tr Ω) + log 0F1(βn/2; β²ΩΣ⁻¹S/4)
/// ```
pub fn wishart_density_log_from(inputs: &DensityInputs, ctrl: &SeriesControl) -> Result<SeriesValue> {
    inputs.validate()?;
    let (m, n, beta) = (inputs.m, inputs.n, inputs.beta);
    let b2 = inputs.half_beta();
    let base = -b2 * m as f64 * n * (1.0 / b2).ln() - mv_gamma_log(b2 * n, m, beta)? - b2 * n * inputs.log_det_sigma
        + inputs.det_term()
        - b2 * (inputs.trace_sigma_inv_s + inputs.trace_omega);
    let series = match &inputs.omega_spectrum {
        None => trivial_series(0.0, ctrl),
        Some(z) => {
            let params = HypParams::new(vec![], vec![b2 * n]);
            let f = hyp_pfq(&params, &z.scaled(b2 * b2), beta, ctrl)?;
            SeriesValue { value: f.value.ln(), report: f.report }
        }
    };
    Ok(SeriesValue { value: base + series.value, report: series.report })
}

/// Log density of the inverse generalised Wishart law at `W`: the law of
/// `S⁻¹` when `S` follows the generalised Wishart law with parameters `p`.
pub fn inv_gw_density_log(
    w: &HermitianMatrix,
    p: &WishartParams,
    h: &GeneratorFunction,
    ctrl: &SeriesControl,
) -> Result<SeriesValue> {
    let log_det_w = w.log_det()?;
    let mut inputs = DensityInputs::new(&w.inverse()?, p)?;
    inputs.log_det_s = -log_det_w;
    inv_gw_density_log_from(&inputs, h, ctrl)
}

/// [`inv_gw_density_log`] from inputs describing `S = W⁻¹`
/// (`log_det_s = -log|W|`, traces and spectra of `W⁻¹`).
///
/// The power of `|W|` is `-β(n+m-1)/2 - 1`.
pub fn inv_gw_density_log_from(
    inputs: &DensityInputs,
    h: &GeneratorFunction,
    ctrl: &SeriesControl,
) -> Result<SeriesValue> {
    inputs.validate()?;
    let (m, n, beta) = (inputs.m, inputs.n, inputs.beta);
    let b2 = inputs.half_beta();
    let log_det_w = -inputs.log_det_s;
    let log_c = elliptical_constant_log(h, m, n, beta)?.log_c;
    let normalizer =
        b2 * m as f64 * n * PI.ln() + log_c - mv_gamma_log(b2 * n, m, beta)? - b2 * n * inputs.log_det_sigma;
    let det_term = (-b2 * (n + m as f64 - 1.0) - 1.0) * log_det_w;
    let series = generator_series(inputs, h, ctrl)?;
    Ok(SeriesValue { value: normalizer + det_term + series.value, report: series.report })
}

/// Log joint density of the eigenvalues `lambda` of a central Wishart
/// matrix.
pub fn eigen_joint_density_central_log(
    lambda: &Spectrum,
    p: &WishartParams,
    ctrl: &SeriesControl,
) -> Result<SeriesValue> {
    p.require_central()?;
    eigen_joint_density_central_log_spectral(lambda, p.n, p.beta(), &p.sigma.positive_definite_spectrum()?, ctrl)
}

/// [`eigen_joint_density_central_log`] from the eigenvalues of `Σ`.
///
/// Tied eigenvalues give `-inf`. The two-argument `0F0(-βΣ⁻¹/2, Λ)` is
/// evaluated as `etr(-cΛ) 0F0(-βΣ⁻¹/2 + cI, Λ)` with `c = β/(2σ_min)`, so
/// that both arguments are nonnegative.
pub fn eigen_joint_density_central_log_spectral(
    lambda: &Spectrum,
    n: f64,
    beta: AlgebraDim,
    sigma: &Spectrum,
    ctrl: &SeriesControl,
) -> Result<SeriesValue> {
    let m = lambda.len();
    if sigma.len() != m {
        return Err(Error::DimensionMismatch(format!("{m} eigenvalues but Sigma has {} eigenvalues", sigma.len())));
    }
    check_degrees(n, m)?;
    if !(lambda.smallest() > 0.0) {
        return Err(Error::Domain(format!("eigenvalues must be positive (got {})", lambda.smallest())));
    }
    if !(sigma.smallest() > 0.0) {
        return Err(Error::NotPositiveDefinite(sigma.smallest()));
    }
    let l = lambda.values();
    if l.windows(2).any(|w| w[0] == w[1]) {
        return Ok(trivial_series(f64::NEG_INFINITY, ctrl));
    }
    let b = beta.beta_f64();
    let b2 = b / 2.0;
    let mf = m as f64;
    // Vol(U(m)) / Vol(U(1))^m: the eigenvector volume modulo phases
    let ln_orbit = stiefel_volume_log(m, m, beta)? - mf * stiefel_volume_log(1, 1, beta)?;
    let exponent = b2 * (n - mf + 1.0) - 1.0;
    let mut vandermonde = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            vandermonde += (l[i] - l[j]).ln();
        }
    }
    let base = ln_orbit + exponent * lambda.log_det() + b * vandermonde
        - b2 * mf * n * (1.0 / b2).ln()
        - mv_gamma_log(b2 * n, m, beta)?
        - b2 * n * sigma.log_det();
    let shift = b2 / sigma.smallest();
    let x = Spectrum::new(sigma.values().iter().map(|s| (shift - b2 / s).max(0.0)).collect())?;
    let f = hyp_pfq_two(&HypParams::default(), &x, lambda, beta, ctrl)?;
    Ok(SeriesValue { value: base - shift * lambda.trace() + f.value.ln(), report: f.report })
}

/// `log P[S < Δ]` for a central Wishart matrix `S`.
pub fn smax_cdf_central_log(delta: &HermitianMatrix, p: &WishartParams, ctrl: &SeriesControl) -> Result<SeriesValue> {
    p.require_central()?;
    if delta.m() != p.m() || delta.beta() != p.beta() {
        return Err(Error::DimensionMismatch("Delta and Sigma differ in size or algebra".into()));
    }
    delta.positive_definite_spectrum()?;
    let ratio = product_spectrum(&p.sigma.inverse()?, delta)?;
    smax_cdf_central_log_spectral(&ratio, p.n, p.beta(), ctrl)
}

/// [`smax_cdf_central_log`] from the spectrum `r` of `Σ⁻¹Δ`.
///
/// ```text
/// log Γ_m[(m-1)β/2 + 1] - log Γ_m[c] + (βn/2) Σ log r_i - (βmn/2) log(2/β)
///   + log 1F1(βn/2; c; -βR/2),      c = β(n+m-1)/2 + 1
/// ```
///
/// The `1F1` is summed after Kummer's transformation,
/// `1F1(a; c; -X) = etr(-X) 1F1(c-a; c; X)`, whose terms are all positive.
/// Large `βr/2` needs a correspondingly large `max_degree`.
pub fn smax_cdf_central_log_spectral(
    ratio: &Spectrum,
    n: f64,
    beta: AlgebraDim,
    ctrl: &SeriesControl,
) -> Result<SeriesValue> {
    let m = ratio.len();
    check_degrees(n, m)?;
    if !(ratio.smallest() > 0.0) {
        return Err(Error::NotPositiveDefinite(ratio.smallest()));
    }
    let b2 = beta.beta_f64() / 2.0;
    let mf = m as f64;
    let a = b2 * n;
    let c = b2 * (n + mf - 1.0) + 1.0;
    let base = mv_gamma_log((mf - 1.0) * b2 + 1.0, m, beta)? - mv_gamma_log(c, m, beta)? + a * ratio.log_det()
        - a * mf * (1.0 / b2).ln();
    let x = ratio.scaled(b2);
    let f = hyp_pfq(&HypParams::new(vec![c - a], vec![c]), &x, beta, ctrl)?;
    Ok(SeriesValue { value: base - x.trace() + f.value.ln(), report: f.report })
}

/// `P[λ_max(S) < y]` with its convergence report.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfValue {
    pub probability: f64,
    pub log_probability: f64,
    /// Set when the series overshot 1 by more than `rel_tol` before clamping.
    pub clamped: bool,
    pub report: ConvergenceReport,
}

/// `P[λ_max(S) < y] = P[S < yI]` for a central Wishart matrix.
pub fn lambda_max_cdf_central(y: f64, p: &WishartParams, ctrl: &SeriesControl) -> Result<CdfValue> {
    p.require_central()?;
    lambda_max_cdf_central_spectral(y, p.n, p.beta(), &p.sigma.positive_definite_spectrum()?, ctrl)
}

/// [`lambda_max_cdf_central`] from the eigenvalues of `Σ`.
pub fn lambda_max_cdf_central_spectral(
    y: f64,
    n: f64,
    beta: AlgebraDim,
    sigma: &Spectrum,
    ctrl: &SeriesControl,
) -> Result<CdfValue> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::Domain(format!("y must be positive (got {y})")));
    }
    if !(sigma.smallest() > 0.0) {
        return Err(Error::NotPositiveDefinite(sigma.smallest()));
    }
    let ratio = Spectrum::new(sigma.values().iter().map(|s| y / s).collect())?;
    let log = smax_cdf_central_log_spectral(&ratio, n, beta, ctrl)?;
    let raw = log.value.exp();
    Ok(CdfValue {
        probability: raw.clamp(0.0, 1.0),
        log_probability: log.value.min(0.0),
        clamped: raw - 1.0 > ctrl.rel_tol,
        report: log.report,
    })
}
