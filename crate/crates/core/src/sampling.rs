//! Matrix-variate normal sampling over ℝ, ℂ and ℍ, and Monte Carlo
//! estimators built on it.
//!
//! Sample `i` belongs to chunk `i / CHUNK_SIZE`; chunk `c` draws from the
//! ChaCha8 stream `c` of the base seed. Chunks run in parallel and are
//! reduced in chunk order, so results do not depend on the thread count.

use std::io::{self, Write};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::algebra::AlgebraDim;
use crate::error::{Error, Result};
use crate::jack::Spectrum;
use crate::linalg::{AlgebraMatrix, HermitianMatrix};
use crate::series::{CompensatedSum, SeriesControl};
use crate::wishart::{wishart_density_log_from, DensityInputs, WishartParams};

pub const CHUNK_SIZE: usize = 4096;

/// Draws `X = μ + Θ^{1/2} Z Σ^{1/2}`, where every real component of `Z` is
/// independent `N(0, 1/β)`.
#[derive(Debug, Clone)]
pub struct MatrixNormalSampler {
    beta: AlgebraDim,
    mu: Option<AlgebraMatrix>,
    sigma_sqrt: AlgebraMatrix,
    theta_sqrt: Option<AlgebraMatrix>,
    theta_inv: HermitianMatrix,
}

impl MatrixNormalSampler {
    /// `mu` is `n × m`, `sigma` is `m × m` and `theta` is `n × n`.
    pub fn new(mu: Option<AlgebraMatrix>, sigma: &HermitianMatrix, theta: &HermitianMatrix) -> Result<Self> {
        let beta = sigma.beta();
        if !beta.is_associative() {
            return Err(Error::UnsupportedAlgebra(beta.beta()));
        }
        if theta.beta() != beta {
            return Err(Error::DimensionMismatch(format!("Sigma has beta={beta} but Theta has beta={}", theta.beta())));
        }
        let (n, m) = (theta.m(), sigma.m());
        if n < m {
            return Err(Error::Parameter(format!("need n >= m (got n = {n}, m = {m})")));
        }
        if let Some(mu) = &mu {
            if mu.beta() != beta || mu.rows() != n || mu.cols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "mu must be {n}x{m} over beta={beta} (got {}x{} over beta={})",
                    mu.rows(),
                    mu.cols(),
                    mu.beta()
                )));
            }
        }
        sigma.positive_definite_spectrum()?;
        theta.positive_definite_spectrum()?;
        let theta_sqrt =
            if *theta == HermitianMatrix::identity(n, beta) { None } else { Some(theta.sqrt()?.as_algebra().clone()) };
        Ok(MatrixNormalSampler {
            beta,
            mu: mu.filter(|mu| mu.planes().iter().any(|p| p.iter().any(|&v| v != 0.0))),
            sigma_sqrt: sigma.sqrt()?.as_algebra().clone(),
            theta_sqrt,
            theta_inv: theta.inverse()?,
        })
    }

    /// A sampler whose Gram matrices follow the Wishart law `p`, with
    /// `Θ = I` and mean `μ = [M^{1/2}; 0]`. Requires an integer `n >= m`.
    pub fn for_params(p: &WishartParams) -> Result<Self> {
        let n = p.n();
        if n.fract() != 0.0 || n < p.m() as f64 {
            return Err(Error::Parameter(format!("sampling needs an integer n >= m (got n = {n}, m = {})", p.m())));
        }
        let n = n as usize;
        let m = p.m();
        let mu = match p.noncentrality() {
            None => None,
            Some(nc) => {
                let root = nc.sqrt()?;
                let planes = root
                    .planes()
                    .iter()
                    .map(|r| DMatrix::from_fn(n, m, |i, j| if i < m { r[(i, j)] } else { 0.0 }))
                    .collect();
                Some(AlgebraMatrix::from_planes(p.beta(), planes)?)
            }
        };
        Self::new(mu, p.sigma(), &HermitianMatrix::identity(n, p.beta()))
    }

    pub fn beta(&self) -> AlgebraDim {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.theta_inv.m()
    }

    pub fn m(&self) -> usize {
        self.sigma_sqrt.rows()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> AlgebraMatrix {
        let (n, m) = (self.n(), self.m());
        let sd = 1.0 / self.beta.beta_f64().sqrt();
        let planes = (0..self.beta.beta())
            .map(|_| DMatrix::from_fn(n, m, |_, _| sd * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let z = AlgebraMatrix::from_planes(self.beta, planes).expect("consistent shapes");
        let mut x = z.mul(&self.sigma_sqrt).expect("consistent shapes");
        if let Some(t) = &self.theta_sqrt {
            x = t.mul(&x).expect("consistent shapes");
        }
        if let Some(mu) = &self.mu {
            x = x.add(mu).expect("consistent shapes");
        }
        x
    }

    /// `S = X* Θ⁻¹ X` for a fresh `X`.
    pub fn sample_gram<R: Rng>(&self, rng: &mut R) -> HermitianMatrix {
        let x = self.sample(rng);
        self.theta_inv.congruence(&x).expect("consistent shapes")
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `f` on every sample index, one RNG stream per chunk, and returns the
/// per-chunk outputs in chunk order.
fn map_chunks<T, F>(seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = count.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(count - c * CHUNK_SIZE);
            f(&mut chunk_rng(seed, c), len)
        })
        .collect()
}

/// `count` draws of `X`, in sample order.
pub fn sample_matrix_normal(
    mu: Option<AlgebraMatrix>,
    sigma: &HermitianMatrix,
    theta: &HermitianMatrix,
    seed: u64,
    count: usize,
) -> Result<Vec<AlgebraMatrix>> {
    let sampler = MatrixNormalSampler::new(mu, sigma, theta)?;
    Ok(map_chunks(seed, count, |rng, len| (0..len).map(|_| sampler.sample(rng)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect())
}

/// Sorted eigenvalues of sampled Gram matrices, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub count: usize,
    pub m: usize,
    /// Row-major `count × m`, each row decreasing.
    pub spectra: Vec<f64>,
    pub base_seed: u64,
    pub chunk_size: usize,
}

impl SampleBatch {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.spectra[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.spectra.chunks(self.m)
    }

    /// Largest eigenvalue of every sample.
    pub fn lambda_max(&self) -> Vec<f64> {
        self.rows().map(|r| r[0]).collect()
    }

    /// Header `lambda_1,...,lambda_m`, then one row per sample.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (1..=self.m).map(|i| format!("lambda_{i}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Eigenvalues of `count` Gram matrices `X* Θ⁻¹ X`.
pub fn sample_spectra(sampler: &MatrixNormalSampler, seed: u64, count: usize) -> Result<SampleBatch> {
    let m = sampler.m();
    let chunks = map_chunks(seed, count, |rng, len| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(len * m);
        for _ in 0..len {
            let s = sampler.sample_gram(rng);
            out.extend_from_slice(s.spectrum()?.values());
        }
        Ok(out)
    });
    let mut spectra = Vec::with_capacity(count * m);
    for c in chunks {
        spectra.extend(c?);
    }
    Ok(SampleBatch { count, m, spectra, base_seed: seed, chunk_size: CHUNK_SIZE })
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub count: usize,
}

impl McEstimate {
    /// `|estimate - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.estimate == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - target).abs() / self.std_error
        }
    }
}

/// Fraction of samples with `λ_max < y` for every `y`, with binomial
/// standard errors `√(p̂(1-p̂)/count)`.
pub fn mc_lambda_max_cdf(
    sampler: &MatrixNormalSampler,
    y_grid: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    if count == 0 {
        return Err(Error::Parameter("count must be positive".into()));
    }
    let batch = sample_spectra(sampler, seed, count)?;
    Ok(empirical_cdf(&batch.lambda_max(), y_grid))
}

/// Empirical CDF of `values` on `y_grid`, with binomial standard errors.
pub fn empirical_cdf(values: &[f64], y_grid: &[f64]) -> Vec<McEstimate> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let count = sorted.len();
    y_grid
        .iter()
        .map(|&y| {
            let below = sorted.partition_point(|&v| v < y);
            let p = below as f64 / count as f64;
            McEstimate { estimate: p, std_error: (p * (1.0 - p) / count as f64).sqrt(), count }
        })
        .collect()
}

/// Mean of `f_Ω(S) / f_0(S)` over central samples `S`, which has expectation
/// one when the noncentral density integrates to one.
pub fn mc_importance_normalization(
    p: &WishartParams,
    count: usize,
    seed: u64,
    ctrl: &SeriesControl,
) -> Result<McEstimate> {
    if count < 2 {
        return Err(Error::Parameter("count must be at least 2".into()));
    }
    let central = p.to_central();
    let sampler = MatrixNormalSampler::for_params(&central)?;
    let sigma_inv = p.sigma().inverse()?;
    let log_det_sigma = p.sigma().log_det()?;
    let trace_omega = p.omega_trace()?;
    // Σ⁻¹ M^{1/2}: B* S B is similar to Ω Σ⁻¹ S
    let omega_root = match p.noncentrality() {
        Some(nc) => Some(sigma_inv.as_algebra().mul(nc.sqrt()?.as_algebra())?),
        None => None,
    };
    let chunks = map_chunks(seed, count, |rng, len| -> Result<(CompensatedSum, CompensatedSum)> {
        let mut sum = CompensatedSum::new();
        let mut sum_sq = CompensatedSum::new();
        for _ in 0..len {
            let s = sampler.sample_gram(rng);
            let base = DensityInputs {
                m: p.m(),
                n: p.n(),
                beta: p.beta(),
                log_det_s: s.log_det()?,
                log_det_sigma,
                trace_sigma_inv_s: sigma_inv.as_algebra().mul(s.as_algebra())?.plane(0).trace(),
                trace_omega: 0.0,
                omega_spectrum: None,
            };
            let shifted = match &omega_root {
                None => base.clone(),
                Some(b) => {
                    let z = s.congruence(b)?.spectrum()?;
                    DensityInputs {
                        trace_omega,
                        omega_spectrum: Some(Spectrum::new(z.values().iter().map(|v| v.max(0.0)).collect())?),
                        ..base.clone()
                    }
                }
            };
            let log_ratio =
                wishart_density_log_from(&shifted, ctrl)?.value - wishart_density_log_from(&base, ctrl)?.value;
            let w = log_ratio.exp();
            sum.add(w);
            sum_sq.add(w * w);
        }
        Ok((sum, sum_sq))
    });
    let mut sum = CompensatedSum::new();
    let mut sum_sq = CompensatedSum::new();
    for c in chunks {
        let (a, b) = c?;
        sum.add(a.value());
        sum_sq.add(b.value());
    }
    let nf = count as f64;
    let mean = sum.value() / nf;
    let var = ((sum_sq.value() - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(McEstimate { estimate: mean, std_error: (var / nf).sqrt(), count })
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `values` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal_moments() {
        let id = |k| HermitianMatrix::identity(k, AlgebraDim::Real);
        let xs = sample_matrix_normal(None, &id(1), &id(1), 7, 20_000).unwrap();
        let vals: Vec<f64> = xs.iter().map(|x| x.plane(0)[(0, 0)]).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        assert!(mean.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.04);
    }

    #[test]
    fn complex_planes_have_half_variance() {
        let id = |k| HermitianMatrix::identity(k, AlgebraDim::Complex);
        let xs = sample_matrix_normal(None, &id(1), &id(1), 8, 20_000).unwrap();
        for t in 0..2 {
            let var = xs.iter().map(|x| x.plane(t)[(0, 0)].powi(2)).sum::<f64>() / xs.len() as f64;
            assert!((var - 0.5).abs() < 0.02, "plane {t}: {var}");
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let id = |k| HermitianMatrix::identity(k, AlgebraDim::Quaternion);
        let a = sample_matrix_normal(None, &id(2), &id(3), 5, 10_000).unwrap();
        let b = sample_matrix_normal(None, &id(2), &id(3), 5, 10_000).unwrap();
        assert_eq!(a, b);
        let c = sample_matrix_normal(None, &id(2), &id(3), 6, 3).unwrap();
        assert_ne!(a[..3], c[..]);
    }

    #[test]
    fn octonions_rejected() {
        let id = HermitianMatrix::identity(2, AlgebraDim::Octonion);
        assert!(matches!(MatrixNormalSampler::new(None, &id, &id), Err(Error::UnsupportedAlgebra(8))));
    }

    #[test]
    fn central_importance_weights_are_one() {
        let p = WishartParams::central(3.0, HermitianMatrix::identity(2, AlgebraDim::Complex)).unwrap();
        let est = mc_importance_normalization(&p, 100, 1, &SeriesControl::default()).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn empirical_cdf_is_monotone() {
        let p = WishartParams::central(4.0, HermitianMatrix::identity(2, AlgebraDim::Real)).unwrap();
        let sampler = MatrixNormalSampler::for_params(&p).unwrap();
        let grid: Vec<f64> = (0..30).map(|i| 0.5 * i as f64).collect();
        let est = mc_lambda_max_cdf(&sampler, &grid, 10_000, 3).unwrap();
        assert_eq!(est[0].estimate, 0.0);
        assert!(est.windows(2).all(|w| w[0].estimate <= w[1].estimate));
    }
}
