//! Densities and CDFs against scalar oracles, change-of-variable identities and
//! direct numerical integration.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rnda_core::quad::integrate;
use rnda_core::{
    eigen_joint_density_central_log, eigen_joint_density_central_log_spectral, gw_density_log, gw_density_log_from,
    inv_gw_density_log, inv_gw_density_log_from, lambda_max_cdf_central, lambda_max_cdf_central_spectral,
    normal_generator, smax_cdf_central_log, wishart_density_log, wishart_density_log_from, AlgebraDim, AlgebraMatrix,
    DensityInputs, HermitianMatrix, SeriesControl, Spectrum, WishartParams,
};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Gamma};

fn random_matrix(rows: usize, cols: usize, beta: AlgebraDim, rng: &mut ChaCha8Rng) -> AlgebraMatrix {
    let planes =
        (0..beta.beta()).map(|_| DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))).collect();
    AlgebraMatrix::from_planes(beta, planes).unwrap()
}

fn random_pd(m: usize, beta: AlgebraDim, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let x = random_matrix(m + 2, m, beta, rng).scale(0.5);
    let g = rnda_core::gram(&x, &HermitianMatrix::identity(m + 2, beta)).unwrap();
    let planes = g
        .planes()
        .iter()
        .enumerate()
        .map(|(t, p)| if t == 0 { p + DMatrix::identity(m, m) * 0.3 } else { p.clone() })
        .collect();
    HermitianMatrix::new(beta, planes).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Noncentral χ² density as a Poisson mixture of central χ² densities.
fn noncentral_chi_square_pdf(x: f64, k: f64, lambda: f64) -> f64 {
    let mut total = 0.0;
    let mut log_weight = -lambda / 2.0;
    for j in 0..400 {
        if j > 0 {
            log_weight += (lambda / 2.0).ln() - (j as f64).ln();
        }
        let term = log_weight.exp() * ChiSquared::new(k + 2.0 * j as f64).unwrap().pdf(x);
        total += term;
        if j as f64 > lambda && term < 1e-18 * total {
            break;
        }
    }
    total
}

#[test]
fn scalar_central_density_is_gamma() {
    let ctrl = SeriesControl::default();
    for beta in AlgebraDim::ALL {
        let b = beta.beta_f64();
        for (n, sigma) in [(2.0, 1.0), (3.5, 0.7), (1.25, 2.0)] {
            let oracle = Gamma::new(b * n / 2.0, b / (2.0 * sigma)).unwrap();
            for i in 1..=10 {
                let s = 0.37 * i as f64;
                let inputs = DensityInputs::diagonal(n, beta, &[s], &[sigma], None).unwrap();
                let got = wishart_density_log_from(&inputs, &ctrl).unwrap().value;
                let want = oracle.ln_pdf(s);
                assert!(rel_err(got, want) < 1e-8 || (got - want).abs() < 1e-12, "{beta} n={n} s={s}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn scalar_noncentral_density_is_noncentral_chi_square() {
    let ctrl = SeriesControl::default();
    for beta in AlgebraDim::ALL {
        let b = beta.beta_f64();
        for (n, sigma, omega) in [(2.0, 1.0, 0.5), (3.0, 0.8, 1.7), (1.5, 1.4, 3.0)] {
            for i in 1..=8 {
                let s = 0.45 * i as f64;
                let inputs = DensityInputs::diagonal(n, beta, &[s], &[sigma], Some(&[omega])).unwrap();
                let w = wishart_density_log_from(&inputs, &ctrl).unwrap().value;
                let g = gw_density_log_from(&inputs, &normal_generator(beta), &ctrl).unwrap().value;
                let trace_omega = omega / sigma;
                let want = (b / sigma * noncentral_chi_square_pdf(b * s / sigma, b * n, b * trace_omega)).ln();
                assert!(rel_err(w, want) < 1e-8, "{beta} n={n} s={s}: {w} vs {want}");
                assert!(rel_err(g, want) < 1e-8, "{beta} n={n} s={s}: {g} vs {want}");
            }
        }
    }
}

#[test]
fn scalar_cdf_is_regularized_gamma() {
    let ctrl = SeriesControl::default().with_max_degree(200);
    for beta in AlgebraDim::ALL {
        let b = beta.beta_f64();
        for (n, sigma) in [(2.0, 1.0), (4.0, 0.5), (2.5, 1.5)] {
            let oracle = Gamma::new(b * n / 2.0, b / (2.0 * sigma)).unwrap();
            let sig = Spectrum::new(vec![sigma]).unwrap();
            for i in 1..=10 {
                let y = 0.6 * i as f64;
                let got = lambda_max_cdf_central_spectral(y, n, beta, &sig, &ctrl).unwrap().probability;
                let want = oracle.cdf(y);
                assert!(rel_err(got, want) < 1e-8, "{beta} n={n} y={y}: {got} vs {want}");
            }
        }
    }
    let p = WishartParams::central(2.0, HermitianMatrix::identity(1, AlgebraDim::Real)).unwrap();
    let c = lambda_max_cdf_central(1.0, &p, &SeriesControl::default()).unwrap();
    assert!((c.probability - 0.393469340287366).abs() < 1e-12);
}

#[test]
fn scalar_inverse_density_is_inverse_gamma() {
    let ctrl = SeriesControl::default();
    let (n, sigma) = (3.0, 1.2);
    let p = WishartParams::central(n, HermitianMatrix::diagonal(&[sigma], AlgebraDim::Real)).unwrap();
    let h = normal_generator(AlgebraDim::Real);
    let gamma = Gamma::new(n / 2.0, 1.0 / (2.0 * sigma)).unwrap();
    for i in 1..=10 {
        let w = 0.15 * i as f64;
        let got = inv_gw_density_log(&HermitianMatrix::diagonal(&[w], AlgebraDim::Real), &p, &h, &ctrl).unwrap().value;
        // density of 1/S at w is f_S(1/w) / w²
        let want = gamma.ln_pdf(1.0 / w) - 2.0 * w.ln();
        assert!(rel_err(got, want) < 1e-9, "w={w}: {got} vs {want}");
    }
}

#[test]
fn scale_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ctrl = SeriesControl::default();
    for beta in AlgebraDim::ASSOCIATIVE {
        let m = 3;
        let s = random_pd(m, beta, &mut rng);
        let sigma = random_pd(m, beta, &mut rng);
        let nc = random_pd(m, beta, &mut rng).scaled(0.3);
        let p = WishartParams::noncentral(4.0, sigma.clone(), nc.clone()).unwrap();
        let base = wishart_density_log(&s, &p, &ctrl).unwrap().value;
        for c in [0.5, 2.0] {
            // Ω = Σ⁻¹M is unchanged when Σ and M scale together
            let pc = WishartParams::noncentral(4.0, sigma.scaled(c), nc.scaled(c)).unwrap();
            let got = wishart_density_log(&s.scaled(c), &pc, &ctrl).unwrap().value;
            let dim = beta.hermitian_dim(m);
            assert!((got - (base - dim * c.ln())).abs() < 1e-10, "{beta} c={c}");
        }
    }
}

fn random_unitary(m: usize, beta: AlgebraDim, rng: &mut ChaCha8Rng) -> AlgebraMatrix {
    let z = random_matrix(m, m, beta, rng).to_complex().unwrap();
    let q = z.qr().q();
    AlgebraMatrix::from_complex(&q, beta).unwrap()
}

#[test]
fn unitary_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ctrl = SeriesControl::default();
    for beta in [AlgebraDim::Real, AlgebraDim::Complex] {
        for m in 2..=4 {
            let s = random_pd(m, beta, &mut rng);
            let u = random_unitary(m, beta, &mut rng);
            let rotated = s.congruence(&u).unwrap();
            let p = WishartParams::central(m as f64 + 1.5, HermitianMatrix::identity(m, beta)).unwrap();
            let a = wishart_density_log(&s, &p, &ctrl).unwrap().value;
            let b = wishart_density_log(&rotated, &p, &ctrl).unwrap().value;
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{beta} m={m}: {a} vs {b}");
        }
    }
}

#[test]
fn inverse_density_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let ctrl = SeriesControl::default();
    for beta in AlgebraDim::ASSOCIATIVE {
        let h = normal_generator(beta);
        for m in 1..=3 {
            let s = random_pd(m, beta, &mut rng);
            let nc = random_pd(m, beta, &mut rng).scaled(0.2);
            let p = WishartParams::noncentral(m as f64 + 0.7, random_pd(m, beta, &mut rng), nc).unwrap();
            let lhs = inv_gw_density_log(&s.inverse().unwrap(), &p, &h, &ctrl).unwrap().value;
            let rhs = gw_density_log(&s, &p, &h, &ctrl).unwrap().value;
            let jac = (beta.beta_f64() * (m as f64 - 1.0) + 2.0) * s.log_det().unwrap();
            assert!((lhs - rhs - jac).abs() < 1e-12 * rhs.abs().max(1.0), "{beta} m={m}");
        }
    }
    // octonion spectra
    let h = normal_generator(AlgebraDim::Octonion);
    let s = [2.0, 0.7];
    let inputs = DensityInputs::diagonal(3.0, AlgebraDim::Octonion, &s, &[1.1, 0.6], Some(&[0.4, 0.2])).unwrap();
    let inv_s: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
    let inv_inputs = DensityInputs::diagonal(3.0, AlgebraDim::Octonion, &s, &[1.1, 0.6], Some(&[0.4, 0.2])).unwrap();
    let lhs = inv_gw_density_log_from(&inv_inputs, &h, &ctrl).unwrap().value;
    let rhs = gw_density_log_from(&inputs, &h, &ctrl).unwrap().value;
    let log_det_s: f64 = s.iter().map(|v| v.ln()).sum();
    assert!((lhs - rhs - (8.0 + 2.0) * log_det_s).abs() < 1e-12, "{inv_s:?}");
}

#[test]
fn generator_path_matches_hypergeometric_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let ctrl = SeriesControl::default();
    for beta in AlgebraDim::ASSOCIATIVE {
        let h = normal_generator(beta);
        for m in 1..=3 {
            let s = random_pd(m, beta, &mut rng);
            let sigma = random_pd(m, beta, &mut rng);
            for p in [
                WishartParams::central(m as f64 + 2.0, sigma.clone()).unwrap(),
                WishartParams::noncentral(m as f64 + 2.0, sigma.clone(), random_pd(m, beta, &mut rng).scaled(0.5))
                    .unwrap(),
            ] {
                let a = wishart_density_log(&s, &p, &ctrl).unwrap().value;
                let b = gw_density_log(&s, &p, &h, &ctrl).unwrap().value;
                assert!(rel_err(b, a) < 1e-10, "{beta} m={m}: {a} vs {b}");
            }
        }
    }
}

/// `∫∫_{hi > λ1 > λ2 > 0} f(λ1, λ2)`.
fn integrate_ordered_pair<F: Fn(f64, f64) -> f64>(f: F, hi: f64) -> f64 {
    integrate(
        |l1| {
            if l1 <= 0.0 {
                return 0.0;
            }
            integrate(|l2| if l2 <= 0.0 || l2 >= l1 { 0.0 } else { f(l1, l2) }, 0.0, l1, 1e-13, 1e-9).value
        },
        0.0,
        hi,
        1e-12,
        1e-9,
    )
    .value
}

fn eigen_density(beta: AlgebraDim, n: f64, sigma: &[f64]) -> impl Fn(f64, f64) -> f64 {
    let sig = Spectrum::new(sigma.to_vec()).unwrap();
    move |l1, l2| {
        let lam = Spectrum::new(vec![l1, l2]).unwrap();
        eigen_joint_density_central_log_spectral(&lam, n, beta, &sig, &SeriesControl::default().with_max_degree(400))
            .unwrap()
            .value
            .exp()
    }
}

#[test]
fn eigen_density_normalizes() {
    for (beta, n, sigma, hi) in [
        (AlgebraDim::Real, 3.0, [1.0, 1.0], 120.0),
        (AlgebraDim::Complex, 4.0, [1.0, 0.5], 40.0),
        (AlgebraDim::Quaternion, 2.0, [1.5, 1.0], 60.0),
        (AlgebraDim::Octonion, 3.0, [1.0, 1.0], 40.0),
    ] {
        let total = integrate_ordered_pair(eigen_density(beta, n, &sigma), hi);
        assert!((total - 1.0).abs() < 1e-6, "{beta} n={n} {sigma:?}: {total}");
    }
}

#[test]
fn cdf_matches_integrated_eigen_density() {
    let ctrl = SeriesControl::default().with_max_degree(200);
    for (beta, n, sigma) in [
        (AlgebraDim::Real, 3.0, [1.0, 1.0]),
        (AlgebraDim::Complex, 2.5, [1.0, 1.0]),
        (AlgebraDim::Real, 4.0, [1.0, 0.5]),
    ] {
        let f = eigen_density(beta, n, &sigma);
        let sig = Spectrum::new(sigma.to_vec()).unwrap();
        for y in [1.0, 3.0, 6.0] {
            let quad = integrate_ordered_pair(&f, y);
            let series = lambda_max_cdf_central_spectral(y, n, beta, &sig, &ctrl).unwrap().probability;
            assert!((quad - series).abs() < 1e-6, "{beta} y={y}: {quad} vs {series}");
        }
    }
}

#[test]
fn cdf_properties() {
    let ctrl = SeriesControl::default().with_max_degree(300);
    let sigma =
        HermitianMatrix::from_real(DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.6]), AlgebraDim::Real).unwrap();
    let p = WishartParams::central(4.0, sigma.clone()).unwrap();
    let mut prev = 0.0;
    for i in 1..=40 {
        let y = 0.5 * i as f64;
        let c = lambda_max_cdf_central(y, &p, &ctrl).unwrap();
        assert!(c.probability >= prev, "y={y}");
        prev = c.probability;
    }
    assert!(prev > 0.99 && prev < 1.0);
    let far = lambda_max_cdf_central(60.0, &p, &SeriesControl::default().with_max_degree(600)).unwrap();
    assert!((far.probability - 1.0).abs() < 1e-8, "{far:?}");
    // P[S < yI] agrees with the λ_max form
    let direct = smax_cdf_central_log(&HermitianMatrix::identity(2, AlgebraDim::Real).scaled(3.0), &p, &ctrl).unwrap();
    let lmax = lambda_max_cdf_central(3.0, &p, &ctrl).unwrap();
    assert!((direct.value - lmax.log_probability).abs() < 1e-12);
    // shrinking Δ drives the log CDF down
    let mut last = f64::INFINITY;
    for k in 0..8 {
        let delta = HermitianMatrix::diagonal(&[1.0, 0.4], AlgebraDim::Real).scaled(0.5f64.powi(k));
        let v = smax_cdf_central_log(&delta, &p, &ctrl).unwrap().value;
        assert!(v < last);
        last = v;
    }
    assert!(last < -15.0);
}

#[test]
fn eigen_density_for_scalar_sigma_is_closed_form() {
    let ctrl = SeriesControl::default();
    let c = 1.7;
    for beta in AlgebraDim::ASSOCIATIVE {
        let p = WishartParams::central(5.0, HermitianMatrix::identity(3, beta).scaled(c)).unwrap();
        let lam = Spectrum::new(vec![4.0, 2.5, 0.5]).unwrap();
        let got = eigen_joint_density_central_log(&lam, &p, &ctrl).unwrap();
        assert_eq!(got.report.layer_magnitudes.iter().skip(1).copied().fold(0.0, f64::max), 0.0);
        // a nearby non-scalar Σ should give a nearby value
        let p2 = WishartParams::central(5.0, HermitianMatrix::diagonal(&[c, c, c * (1.0 + 1e-7)], beta)).unwrap();
        let near = eigen_joint_density_central_log(&lam, &p2, &ctrl).unwrap().value;
        assert!((near - got.value).abs() < 1e-5);
        let _ = DVector::<f64>::zeros(1);
    }
}
