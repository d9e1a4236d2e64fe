//! Degree-layer summation shared by every partition-indexed series.

use crate::error::{Error, Result};

/// Truncation settings for a partition-indexed series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Highest partition weight that may be summed.
    pub max_degree: usize,
    /// A layer is negligible when it contributes less than `rel_tol` of the
    /// running partial sum.
    pub rel_tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { max_degree: 40, rel_tol: 1e-12 }
    }
}

impl SeriesControl {
    pub fn new(max_degree: usize, rel_tol: f64) -> Result<Self> {
        let ctrl = SeriesControl { max_degree, rel_tol };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn with_max_degree(mut self, max_degree: usize) -> Self {
        self.max_degree = max_degree;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_degree < 1 {
            return Err(Error::Parameter("max_degree must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::Parameter(format!("rel_tol must be positive (got {})", self.rel_tol)));
        }
        Ok(())
    }
}

/// What happened while summing a series.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Highest degree actually summed.
    pub degree: usize,
    pub max_degree: usize,
    pub rel_tol: f64,
    /// `|layer_k| / |partial sum after layer k|` for every summed degree.
    pub layer_magnitudes: Vec<f64>,
}

impl ConvergenceReport {
    /// Relative magnitudes of the last two summed layers (older first).
    pub fn last_two(&self) -> (f64, f64) {
        let n = self.layer_magnitudes.len();
        match n {
            0 => (f64::NAN, f64::NAN),
            1 => (f64::NAN, self.layer_magnitudes[0]),
            _ => (self.layer_magnitudes[n - 2], self.layer_magnitudes[n - 1]),
        }
    }
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Result of a converged series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub report: ConvergenceReport,
}

/// Sums `layer(0) + layer(1) + ...` whole layers at a time.
///
/// Stops once two consecutive layers each fall below `rel_tol` of the partial
/// sum; fails with [`Error::Convergence`] if that has not happened by
/// `max_degree`.
pub fn sum_layers<F>(ctrl: &SeriesControl, mut layer: F) -> Result<SeriesValue>
where
    F: FnMut(usize) -> Result<f64>,
{
    ctrl.validate()?;
    let mut total = CompensatedSum::new();
    let mut magnitudes = Vec::with_capacity(ctrl.max_degree + 1);
    let mut small_run = 0usize;
    for k in 0..=ctrl.max_degree {
        let contribution = layer(k)?;
        if !contribution.is_finite() {
            return Err(Error::Convergence(Box::new(ConvergenceReport {
                converged: false,
                degree: k,
                max_degree: ctrl.max_degree,
                rel_tol: ctrl.rel_tol,
                layer_magnitudes: magnitudes,
            })));
        }
        total.add(contribution);
        let partial = total.value();
        let rel = if partial != 0.0 {
            (contribution / partial).abs()
        } else if contribution == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        magnitudes.push(rel);
        if k >= 1 && rel < ctrl.rel_tol {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 2 {
            return Ok(SeriesValue {
                value: partial,
                report: ConvergenceReport {
                    converged: true,
                    degree: k,
                    max_degree: ctrl.max_degree,
                    rel_tol: ctrl.rel_tol,
                    layer_magnitudes: magnitudes,
                },
            });
        }
    }
    Err(Error::Convergence(Box::new(ConvergenceReport {
        converged: false,
        degree: ctrl.max_degree,
        max_degree: ctrl.max_degree,
        rel_tol: ctrl.rel_tol,
        layer_magnitudes: magnitudes,
    })))
}
