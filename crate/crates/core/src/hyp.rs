//! Truncated hypergeometric functions of one and two matrix arguments.
//!
//! ```text
//! pFq(a; b; X)    = Σ_k Σ_{κ⊢k} [a]_κ / [b]_κ · C_κ(X) / k!
//! pFq(a; b; X, Y) = Σ_k Σ_{κ⊢k} [a]_κ / [b]_κ · C_κ(X) C_κ(Y) / (C_κ(I) k!)
//! ```
//!
//! Terms are assembled in log space (Pochhammer ratio, `scale^k / k!`) and
//! multiplied by the Jack value at the rescaled spectrum, so deep layers
//! neither overflow nor lose the sign of alternating coefficients.

use crate::algebra::AlgebraDim;
use crate::error::{Error, Result};
use crate::jack::{JackTable, Spectrum};
use crate::series::{sum_layers, CompensatedSum, SeriesControl, SeriesValue};
use crate::special::ln_gamma;

/// Upper (`a_1..a_p`) and lower (`b_1..b_q`) parameters of a `pFq`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypParams {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl HypParams {
    pub fn new(upper: Vec<f64>, lower: Vec<f64>) -> Self {
        HypParams { upper, lower }
    }

    pub fn p(&self) -> usize {
        self.upper.len()
    }

    pub fn q(&self) -> usize {
        self.lower.len()
    }

    /// A nonpositive integer upper parameter truncates the series to a polynomial.
    pub fn terminates(&self) -> bool {
        self.upper.iter().any(|&a| a <= 0.0 && a.fract() == 0.0)
    }

    fn check_region(&self, radius: f64) -> Result<()> {
        if self.terminates() || radius == 0.0 {
            return Ok(());
        }
        let (p, q) = (self.p(), self.q());
        if p > q + 1 {
            return Err(Error::Parameter(format!("{p}F{q} diverges for every nonzero argument")));
        }
        if p == q + 1 && radius >= 1.0 {
            return Err(Error::Parameter(format!("{p}F{q} requires spectral radius < 1 (got {radius})")));
        }
        Ok(())
    }
}

/// `ln |[a]_κ / [b]_κ|` and its sign for every catalog node, each built from
/// its parent partition by one extra cell. `None` marks a vanishing
/// numerator.
pub(crate) struct Coefficients<'a> {
    params: &'a HypParams,
    half_beta: f64,
    values: Vec<Option<(f64, f64)>>,
}

impl<'a> Coefficients<'a> {
    pub(crate) fn new(params: &'a HypParams, beta: AlgebraDim) -> Self {
        Coefficients { params, half_beta: beta.beta_f64() / 2.0, values: vec![Some((0.0, 1.0))] }
    }

    fn extend(&mut self, table: &JackTable) -> Result<()> {
        let nodes = &table.catalog().nodes;
        for node in &nodes[self.values.len()..table.node_count()] {
            let value = match self.values[node.parent] {
                None => None,
                Some((mut log_abs, mut sign)) => {
                    let offset = node.cell.1 as f64 - node.cell.0 as f64 * self.half_beta;
                    for &b in &self.params.lower {
                        let f = b + offset;
                        if f == 0.0 {
                            return Err(Error::Parameter(format!(
                                "lower parameter {b} gives a zero Pochhammer factor at partition {}",
                                node.partition
                            )));
                        }
                        log_abs -= f.abs().ln();
                        if f < 0.0 {
                            sign = -sign;
                        }
                    }
                    let mut vanishes = false;
                    for &a in &self.params.upper {
                        let f = a + offset;
                        if f == 0.0 {
                            vanishes = true;
                            break;
                        }
                        log_abs += f.abs().ln();
                        if f < 0.0 {
                            sign = -sign;
                        }
                    }
                    (!vanishes).then_some((log_abs, sign))
                }
            };
            self.values.push(value);
        }
        Ok(())
    }

    /// `Σ_{κ⊢k} [a]_κ/[b]_κ C_κ(X)/k!`.
    pub(crate) fn one_argument_layer(&mut self, table: &JackTable, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        if table.scale() == 0.0 {
            return Ok(0.0);
        }
        self.extend(table)?;
        let ln_layer = k as f64 * table.scale().ln() - ln_gamma(k as f64 + 1.0);
        let mut acc = CompensatedSum::new();
        for (id, c) in table.layer_ids(k) {
            let Some((ln_ratio, sign)) = self.values[id] else { continue };
            acc.add(sign * (ln_ratio + ln_layer).exp() * c);
        }
        Ok(acc.value())
    }

    /// `Σ_{κ⊢k} [a]_κ/[b]_κ C_κ(X) C_κ(Y)/(C_κ(I) k!)`; both tables must
    /// share `β` and `m`.
    fn two_argument_layer(&mut self, tx: &JackTable, ty: &JackTable, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        if tx.scale() == 0.0 || ty.scale() == 0.0 {
            return Ok(0.0);
        }
        self.extend(tx)?;
        let nodes = &tx.catalog().nodes;
        let ln_layer = k as f64 * (tx.scale().ln() + ty.scale().ln()) - ln_gamma(k as f64 + 1.0);
        let mut acc = CompensatedSum::new();
        for ((id, cx), (_, cy)) in tx.layer_ids(k).zip(ty.layer_ids(k)) {
            let Some((ln_ratio, sign)) = self.values[id] else { continue };
            acc.add(sign * (ln_ratio + ln_layer - nodes[id].ln_identity).exp() * (cx * cy));
        }
        Ok(acc.value())
    }
}

/// `pFq^β(a; b; X)` for `X` with spectrum `x`.
pub fn hyp_pfq(params: &HypParams, x: &Spectrum, beta: AlgebraDim, ctrl: &SeriesControl) -> Result<SeriesValue> {
    params.check_region(x.max_abs())?;
    let mut table = JackTable::new(x, beta);
    let mut coefficients = Coefficients::new(params, beta);
    sum_layers(ctrl, |k| {
        table.extend_to(k);
        coefficients.one_argument_layer(&table, k)
    })
}

/// As [`hyp_pfq`], reusing a prebuilt table. Summation is limited to the
/// table's depth; running out of layers before convergence is a convergence
/// failure.
pub fn hyp_pfq_table(params: &HypParams, table: &JackTable, ctrl: &SeriesControl) -> Result<SeriesValue> {
    params.check_region(table.spectrum().max_abs())?;
    let limited = ctrl.with_max_degree(ctrl.max_degree.min(table.max_weight().max(1)));
    let mut coefficients = Coefficients::new(params, table.beta());
    sum_layers(&limited, |k| {
        if k > table.max_weight() {
            return Ok(0.0);
        }
        coefficients.one_argument_layer(table, k)
    })
}

/// Two-argument `pFq^β(a; b; X, Y)` for spectra `x` and `y` of equal length.
pub fn hyp_pfq_two(
    params: &HypParams,
    x: &Spectrum,
    y: &Spectrum,
    beta: AlgebraDim,
    ctrl: &SeriesControl,
) -> Result<SeriesValue> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "two-argument series needs equal sizes (got {} and {})",
            x.len(),
            y.len()
        )));
    }
    params.check_region(x.max_abs() * y.max_abs())?;
    let mut tx = JackTable::new(x, beta);
    let mut ty = JackTable::new(y, beta);
    let mut coefficients = Coefficients::new(params, beta);
    sum_layers(ctrl, |k| {
        tx.extend_to(k);
        ty.extend_to(k);
        coefficients.two_argument_layer(&tx, &ty, k)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn zero_f_zero_is_exponential_trace() {
        let got =
            hyp_pfq(&HypParams::default(), &spec(&[0.1, 0.2]), AlgebraDim::Real, &SeriesControl::default()).unwrap();
        assert_relative_eq!(got.value, 0.3f64.exp(), max_relative = 1e-13);
        assert_relative_eq!(got.value, 1.349859, max_relative = 1e-6);
        assert!(got.report.converged);
    }

    #[test]
    fn one_f_zero_is_determinant_power() {
        let p = HypParams::new(vec![2.5], vec![]);
        for beta in AlgebraDim::ALL {
            let got = hyp_pfq(&p, &spec(&[0.2, 0.1]), beta, &SeriesControl::default()).unwrap();
            assert_relative_eq!(got.value, (0.8f64 * 0.9).powf(-2.5), max_relative = 1e-10);
        }
    }

    #[test]
    fn zero_argument_is_one() {
        let p = HypParams::new(vec![1.5, 0.3], vec![2.2]);
        let got = hyp_pfq(&p, &spec(&[0.0, 0.0, 0.0]), AlgebraDim::Quaternion, &SeriesControl::default()).unwrap();
        assert_eq!(got.value, 1.0);
        let two = hyp_pfq_two(&p, &spec(&[0.0, 0.0]), &spec(&[0.4, 0.1]), AlgebraDim::Real, &SeriesControl::default())
            .unwrap();
        assert_eq!(two.value, 1.0);
    }

    #[test]
    fn divergent_region_rejected() {
        let p = HypParams::new(vec![1.5], vec![]);
        assert!(matches!(
            hyp_pfq(&p, &spec(&[1.0, 0.2]), AlgebraDim::Real, &SeriesControl::default()),
            Err(Error::Parameter(_))
        ));
        let p = HypParams::new(vec![1.5, 2.0], vec![]);
        assert!(hyp_pfq(&p, &spec(&[0.1]), AlgebraDim::Real, &SeriesControl::default()).is_err());
        // terminating series are fine anywhere
        let p = HypParams::new(vec![-2.0], vec![]);
        let got = hyp_pfq(&p, &spec(&[3.0]), AlgebraDim::Real, &SeriesControl::default()).unwrap();
        assert_relative_eq!(got.value, (1.0f64 - 3.0).powi(2), max_relative = 1e-14);
    }

    #[test]
    fn zero_denominator_rejected() {
        let p = HypParams::new(vec![], vec![-1.0]);
        assert!(matches!(
            hyp_pfq(&p, &spec(&[0.5]), AlgebraDim::Real, &SeriesControl::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn convergence_failure_carries_report() {
        let ctrl = SeriesControl::new(5, 1e-12).unwrap();
        match hyp_pfq(&HypParams::default(), &spec(&[4.0, 3.0]), AlgebraDim::Real, &ctrl) {
            Err(Error::Convergence(r)) => {
                assert_eq!(r.layer_magnitudes.len(), 6);
                assert!(!r.converged);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_argument_reductions() {
        let ctrl = SeriesControl::default();
        let zero = HypParams::default();
        for beta in AlgebraDim::ALL {
            let x = spec(&[0.4, -0.3, 0.1]);
            let one = hyp_pfq(&zero, &x, beta, &ctrl).unwrap().value;
            let two = hyp_pfq_two(&zero, &x, &Spectrum::constant(1.0, 3).unwrap(), beta, &ctrl).unwrap().value;
            assert_relative_eq!(one, two, max_relative = 1e-13);
        }
        let v = hyp_pfq_two(&zero, &spec(&[0.3]), &spec(&[0.5]), AlgebraDim::Complex, &ctrl).unwrap();
        assert_relative_eq!(v.value, 0.15f64.exp(), max_relative = 1e-14);
    }

    #[test]
    fn two_argument_is_symmetric() {
        let p = HypParams::new(vec![1.3], vec![2.9]);
        let x = spec(&[0.9, 0.2, -0.4]);
        let y = spec(&[1.5, 0.7, 0.3]);
        for beta in AlgebraDim::ALL {
            let a = hyp_pfq_two(&p, &x, &y, beta, &SeriesControl::default()).unwrap().value;
            let b = hyp_pfq_two(&p, &y, &x, beta, &SeriesControl::default()).unwrap().value;
            assert_eq!(a, b);
        }
        assert!(hyp_pfq_two(&p, &x, &spec(&[1.0]), AlgebraDim::Real, &SeriesControl::default()).is_err());
    }

    #[test]
    fn prebuilt_table_matches() {
        let x = spec(&[0.6, 0.25]);
        let p = HypParams::new(vec![], vec![3.5]);
        let table = JackTable::build(&x, AlgebraDim::Quaternion, 40);
        let a = hyp_pfq_table(&p, &table, &SeriesControl::default()).unwrap();
        let b = hyp_pfq(&p, &x, AlgebraDim::Quaternion, &SeriesControl::default()).unwrap();
        assert_eq!(a.value, b.value);
        let shallow = JackTable::build(&x, AlgebraDim::Quaternion, 3);
        assert!(matches!(hyp_pfq_table(&p, &shallow, &SeriesControl::default()), Err(Error::Convergence(_))));
    }
}
