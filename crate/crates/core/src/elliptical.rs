//! Generator functions of matrix-variate elliptical families.

use std::fmt;
use std::sync::Arc;

use crate::algebra::AlgebraDim;
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::ln_gamma;

type EvalFn = dyn Fn(f64) -> f64 + Send + Sync;
type DerivFn = dyn Fn(usize, f64) -> f64 + Send + Sync;
type LnDerivFn = dyn Fn(usize, f64) -> (f64, f64) + Send + Sync;

/// A generator `h: [0, ∞) → [0, ∞)` together with its exact derivatives.
#[derive(Clone)]
pub struct GeneratorFunction {
    name: String,
    eval: Arc<EvalFn>,
    derivative: Arc<DerivFn>,
    ln_derivative: Option<Arc<LnDerivFn>>,
}

impl fmt::Debug for GeneratorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorFunction").field("name", &self.name).finish_non_exhaustive()
    }
}

impl GeneratorFunction {
    /// Wraps a user generator. `derivative(j, v)` must return `h^(j)(v)`
    /// exactly; it is never approximated internally.
    ///
    /// `h` is sampled on a logarithmic grid over `[0, 1e6]` and rejected if it
    /// is negative or non-finite anywhere on it.
    pub fn new<H, D>(name: impl Into<String>, eval: H, derivative: D) -> Result<Self>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        let grid = std::iter::once(0.0).chain((-40..=40).map(|t| 10f64.powf(t as f64 * 0.15)));
        for u in grid {
            let v = eval(u);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parameter(format!(
                    "generator {name}: h({u}) = {v} is not a finite nonnegative value"
                )));
            }
        }
        Ok(GeneratorFunction { name, eval: Arc::new(eval), derivative: Arc::new(derivative), ln_derivative: None })
    }

    /// Supplies `(sign, ln |h^(j)(v)|)` directly, for generators whose high
    /// derivatives leave the floating-point range.
    pub fn with_log_derivative<L>(mut self, ln_derivative: L) -> Self
    where
        L: Fn(usize, f64) -> (f64, f64) + Send + Sync + 'static,
    {
        self.ln_derivative = Some(Arc::new(ln_derivative));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u)
    }

    pub fn derivative(&self, order: usize, v: f64) -> f64 {
        if order == 0 {
            (self.eval)(v)
        } else {
            (self.derivative)(order, v)
        }
    }

    /// `(sign, ln |h^(j)(v)|)`; the sign is 0 where the derivative vanishes.
    pub fn ln_abs_derivative(&self, order: usize, v: f64) -> (f64, f64) {
        if let Some(ln) = &self.ln_derivative {
            return ln(order, v);
        }
        let d = self.derivative(order, v);
        if d == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            (d.signum(), d.abs().ln())
        }
    }

    /// Checks that the radial integral converges for the given dimensions.
    pub fn validate_for(&self, m: usize, n: f64, beta: AlgebraDim) -> Result<EllipticalConstant> {
        elliptical_constant_log(self, m, n, beta)
    }
}

/// `h(u) = exp(-βu/2)`, the matrix-variate normal generator.
pub fn normal_generator(beta: AlgebraDim) -> GeneratorFunction {
    let half = beta.beta_f64() / 2.0;
    GeneratorFunction {
        name: "normal".into(),
        eval: Arc::new(move |u| (-half * u).exp()),
        derivative: Arc::new(move |j, v| (-half).powi(j as i32) * (-half * v).exp()),
        ln_derivative: Some(Arc::new(move |j, v| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            (sign, j as f64 * half.ln() - half * v)
        })),
    }
}

/// `log C^β(m, n)` of an elliptical family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticalConstant {
    pub log_c: f64,
}

/// Normalizing constant of the elliptical family with generator `h`:
///
/// ```text
/// C^β(m,n) = Γ(βmn/2) / (2 π^{βmn/2} ∫₀^∞ u^{βmn-1} h(u²) du)
/// ```
///
/// The radial integral is always evaluated by quadrature.
pub fn elliptical_constant_log(
    h: &GeneratorFunction,
    m: usize,
    n: f64,
    beta: AlgebraDim,
) -> Result<EllipticalConstant> {
    if m == 0 || !(n > 0.0) || !n.is_finite() {
        return Err(Error::Parameter(format!("need m >= 1 and n > 0 (got m={m}, n={n})")));
    }
    let d = beta.beta_f64() * m as f64 * n;
    let log_integral = log_radial_integral(h, d)?;
    let log_c = ln_gamma(d / 2.0) - std::f64::consts::LN_2 - d / 2.0 * std::f64::consts::PI.ln() - log_integral;
    if !log_c.is_finite() {
        return Err(Error::DivergentIntegral(format!("generator {}: log C is not finite", h.name)));
    }
    Ok(EllipticalConstant { log_c })
}

/// `ln ∫₀^∞ u^{d-1} h(u²) du`, integrated over dyadic pieces after factoring
/// out the peak of the integrand.
fn log_radial_integral(h: &GeneratorFunction, d: f64) -> Result<f64> {
    let ln_g = |u: f64| -> f64 {
        let (sign, ln_h) = h.ln_abs_derivative(0, u * u);
        if sign <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if u == 0.0 {
            return if d == 1.0 { ln_h } else { f64::NEG_INFINITY };
        }
        (d - 1.0) * u.ln() + ln_h
    };
    const LOWEST: i32 = -60;
    const HIGHEST: i32 = 256;
    let mut peak = f64::NEG_INFINITY;
    let mut peak_exp = LOWEST;
    for t in LOWEST * 8..=HIGHEST * 8 {
        let v = ln_g(2f64.powf(t as f64 / 8.0));
        if v > peak {
            peak = v;
            peak_exp = t.div_euclid(8);
        }
    }
    if peak == f64::NEG_INFINITY {
        return Err(Error::DivergentIntegral(format!("generator {} vanishes on the whole scan grid", h.name)));
    }
    let g = |u: f64| (ln_g(u) - peak).exp();
    let piece = |a: f64, b: f64| integrate(g, a, b, 0.0, 1e-13).value;
    let mut total = piece(0.0, 2f64.powi(LOWEST));
    let mut quiet = 0;
    for j in LOWEST..HIGHEST {
        let v = piece(2f64.powi(j), 2f64.powi(j + 1));
        if !v.is_finite() {
            break;
        }
        total += v;
        if j > peak_exp && v <= 1e-17 * total {
            quiet += 1;
            if quiet >= 3 {
                return Ok(total.ln() + peak);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::DivergentIntegral(format!(
        "generator {}: ∫ u^{}·h(u²) du does not settle before u = 2^{HIGHEST}",
        h.name,
        d - 1.0
    )))
}
