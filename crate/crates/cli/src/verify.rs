//! Verification suites: algebraic identities, scalar reductions and Monte
//! Carlo cross-checks. Each check reports its measured error next to the
//! tolerance it must meet.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rnda_core::quad::integrate;
use rnda_core::{
    eigen_joint_density_central_log_spectral, empirical_cdf, gram, gw_density_log, gw_density_log_from, hyp_pfq,
    inv_gw_density_log_from, jack_layer, ks_statistic, lambda_max_cdf_central_spectral, mc_importance_normalization,
    normal_generator, quaternion_pairing_defect, sample_spectra, wishart_density_log, wishart_density_log_from,
    AlgebraDim, AlgebraMatrix, DensityInputs, HermitianMatrix, HypParams, MatrixNormalSampler, SeriesControl, Spectrum,
    WishartParams,
};
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Gamma};

use crate::{Budget, CliError, Fault, Suite, VerifyArgs, SCHEMA_VERSION};

struct Check {
    suite: &'static str,
    name: String,
    measured: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

struct Context {
    budget: Budget,
    fault: Option<Fault>,
    checks: Vec<Check>,
}

impl Context {
    fn record(&mut self, suite: &'static str, name: impl Into<String>, measured: f64, tolerance: f64) {
        // NaN must fail
        let measured = if measured.is_nan() { f64::INFINITY } else { measured };
        self.checks.push(Check { suite, name: name.into(), measured, tolerance });
    }

    fn mc_count(&self) -> usize {
        match self.budget {
            Budget::Fast => 20_000,
            Budget::Full => 200_000,
        }
    }

    fn repeats(&self, fast: usize, full: usize) -> usize {
        match self.budget {
            Budget::Fast => fast,
            Budget::Full => full,
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_spectrum(m: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Spectrum {
    Spectrum::new((0..m).map(|_| rng.random_range(lo..hi)).collect()).expect("finite values")
}

fn random_pd(m: usize, beta: AlgebraDim, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let planes = (0..beta.beta())
        .map(|_| DMatrix::from_fn(m + 2, m, |_, _| 0.5 * rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let x = AlgebraMatrix::from_planes(beta, planes).expect("consistent planes");
    let g = gram(&x, &HermitianMatrix::identity(m + 2, beta)).expect("consistent shapes");
    let planes = g
        .planes()
        .iter()
        .enumerate()
        .map(|(t, p)| if t == 0 { p + DMatrix::identity(m, m) * 0.3 } else { p.clone() })
        .collect();
    HermitianMatrix::new(beta, planes).expect("self-adjoint")
}

fn identities(cx: &mut Context) -> Result<(), CliError> {
    const S: &str = "identities";
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let ctrl = SeriesControl::default();

    let perturb = if cx.fault == Some(Fault::JackNormalization) { 1.0 + 1e-6 } else { 1.0 };
    let mut worst = 0.0f64;
    for beta in AlgebraDim::ALL {
        for m in 1..=4 {
            for _ in 0..cx.repeats(4, 20) {
                let x = random_spectrum(m, 0.0, 2.0, &mut rng);
                let t = x.trace();
                for k in 0..=8usize {
                    let sum: f64 = jack_layer(k, &x, beta).iter().map(|(_, c)| c * perturb).sum();
                    worst = worst.max(rel_err(sum, t.powi(k as i32)));
                }
            }
        }
    }
    cx.record(S, "jack-normalization", worst, 1e-10);

    // at radius 0.5 the layers shrink like k^{ma-1} 2^{-k}, so a stays small
    let geometric = SeriesControl::new(40, 1e-9)?;
    let (mut etr, mut det) = (0.0f64, 0.0f64);
    for beta in AlgebraDim::ALL {
        for m in 1..=4 {
            for i in 0..cx.repeats(3, 10) {
                let x = random_spectrum(m, -1.0, 1.0, &mut rng);
                let f = hyp_pfq(&HypParams::new(vec![], vec![]), &x, beta, &ctrl)?.value;
                etr = etr.max(rel_err(f, x.trace().exp()));
                let y = if i < 2 {
                    Spectrum::constant(0.5 - i as f64, m)?
                } else {
                    random_spectrum(m, -0.5, 0.5, &mut rng)
                };
                for a in [0.5, -0.5] {
                    let f = hyp_pfq(&HypParams::new(vec![a], vec![]), &y, beta, &geometric)?.value;
                    let want: f64 = y.values().iter().map(|v| (1.0 - v).powf(-a)).product();
                    det = det.max(rel_err(f, want));
                }
            }
        }
    }
    cx.record(S, "hypergeometric-0F0-etr", etr, 1e-10);
    cx.record(S, "hypergeometric-1F0-det", det, 1e-8);

    let (mut inverse, mut paths, mut scale) = (0.0f64, 0.0f64, 0.0f64);
    for beta in AlgebraDim::ASSOCIATIVE {
        let h = normal_generator(beta);
        for i in 0..cx.repeats(8, 34) {
            let m = 1 + i % 3;
            let n = m as f64 + 1.5;
            let s = random_pd(m, beta, &mut rng);
            let sigma = random_pd(m, beta, &mut rng);
            let p = if i % 2 == 0 {
                WishartParams::central(n, sigma.clone())?
            } else {
                WishartParams::noncentral(n, sigma.clone(), random_pd(m, beta, &mut rng).scaled(0.4))?
            };
            let inputs = DensityInputs::new(&s, &p)?;
            let forward = gw_density_log_from(&inputs, &h, &ctrl)?.value;
            let back = inv_gw_density_log_from(&inputs, &h, &ctrl)?.value;
            let lhs = back - forward - (beta.beta_f64() * (m as f64 - 1.0) + 2.0) * inputs.log_det_s;
            inverse = inverse.max(lhs.abs());

            let w = wishart_density_log(&s, &p, &ctrl)?.value;
            let g = gw_density_log(&s, &p, &h, &ctrl)?.value;
            paths = paths.max(rel_err(g, w));

            let c = if i % 2 == 0 { 2.0 } else { 0.5 };
            let central = p.to_central();
            let scaled = WishartParams::central(n, sigma.scaled(c))?;
            let dim = beta.hermitian_dim(m);
            let diff = wishart_density_log(&s.scaled(c), &scaled, &ctrl)?.value
                - wishart_density_log(&s, &central, &ctrl)?.value
                + dim * c.ln();
            scale = scale.max(diff.abs());
        }
    }
    cx.record(S, "inverse-density-identity", inverse, 1e-12);
    cx.record(S, "generator-path-equivalence", paths, 1e-10);
    cx.record(S, "scale-equivariance", scale, 1e-10);
    Ok(())
}

/// Noncentral χ² density as a Poisson mixture of central χ² densities.
fn noncentral_chi_square_pdf(x: f64, k: f64, lambda: f64) -> f64 {
    let mut total = 0.0;
    let mut log_weight = -lambda / 2.0;
    for j in 0..400 {
        if j > 0 {
            log_weight += (lambda / 2.0).ln() - (j as f64).ln();
        }
        let term = log_weight.exp() * ChiSquared::new(k + 2.0 * j as f64).expect("positive dof").pdf(x);
        total += term;
        if j as f64 > lambda && term < 1e-18 * total {
            break;
        }
    }
    total
}

fn reductions(cx: &mut Context) -> Result<(), CliError> {
    const S: &str = "reductions";
    let ctrl = SeriesControl::default();
    let cdf_ctrl = ctrl.with_max_degree(200);
    let grid: Vec<f64> = (1..=50).map(|i| 0.12 * i as f64).collect();
    let (mut central, mut noncentral, mut cdf) = (0.0f64, 0.0f64, 0.0f64);
    for beta in AlgebraDim::ALL {
        let b = beta.beta_f64();
        for (n, sigma, omega) in [(2.0, 1.0, 0.6), (3.5, 0.7, 1.5)] {
            let gamma = Gamma::new(b * n / 2.0, b / (2.0 * sigma)).expect("valid gamma");
            let sig = Spectrum::new(vec![sigma])?;
            for &s in &grid {
                let inputs = DensityInputs::diagonal(n, beta, &[s], &[sigma], None)?;
                central = central.max(rel_err(wishart_density_log_from(&inputs, &ctrl)?.value, gamma.ln_pdf(s)));

                let inputs = DensityInputs::diagonal(n, beta, &[s], &[sigma], Some(&[omega]))?;
                let want = (b / sigma * noncentral_chi_square_pdf(b * s / sigma, b * n, b * omega / sigma)).ln();
                noncentral = noncentral.max(rel_err(wishart_density_log_from(&inputs, &ctrl)?.value, want));

                let p = lambda_max_cdf_central_spectral(s, n, beta, &sig, &cdf_ctrl)?.probability;
                cdf = cdf.max(rel_err(p, gamma.cdf(s)));
            }
        }
    }
    cx.record(S, "scalar-central-density", central, 1e-8);
    cx.record(S, "scalar-noncentral-density", noncentral, 1e-8);
    cx.record(S, "scalar-central-cdf", cdf, 1e-8);

    // m = 2, β = 1, n = 3, Σ = I
    let sigma = Spectrum::new(vec![1.0, 1.0])?;
    let density_ctrl = ctrl.with_max_degree(200);
    let density = |l1: f64, l2: f64| -> f64 {
        if l2 <= 0.0 || l2 >= l1 {
            return 0.0;
        }
        let lam = Spectrum::new(vec![l1, l2]).expect("finite");
        eigen_joint_density_central_log_spectral(&lam, 3.0, AlgebraDim::Real, &sigma, &density_ctrl)
            .map(|v| v.value.exp())
            .unwrap_or(f64::NAN)
    };
    let total =
        integrate(|l1| integrate(|l2| density(l1, l2), 0.0, l1, 1e-12, 1e-8).value, 0.0, 80.0, 1e-10, 1e-8).value;
    cx.record(S, "eigen-density-normalization", (total - 1.0).abs(), 1e-3);
    Ok(())
}

fn mc_central(cx: &mut Context) -> Result<(), CliError> {
    const S: &str = "mc-central";
    let count = cx.mc_count();
    let ctrl = SeriesControl::default().with_max_degree(400);
    for (i, beta) in AlgebraDim::ASSOCIATIVE.into_iter().enumerate() {
        let sigma = [1.0, 0.5];
        let p = WishartParams::central(4.0, HermitianMatrix::diagonal(&sigma, beta))?;
        let batch = sample_spectra(&MatrixNormalSampler::for_params(&p)?, 200 + i as u64, count)?;
        let mut lmax = batch.lambda_max();
        lmax.sort_by(f64::total_cmp);
        let ys: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|q| lmax[(q * count as f64) as usize]).collect();
        let sig = Spectrum::new(sigma.to_vec())?;
        let mut worst = 0.0f64;
        for (y, est) in ys.iter().zip(empirical_cdf(&lmax, &ys)) {
            let exact = lambda_max_cdf_central_spectral(*y, 4.0, beta, &sig, &ctrl)?.probability;
            worst = worst.max(est.z_score(exact));
        }
        cx.record(S, format!("lambda-max-cdf-beta{} (standard errors)", beta.beta()), worst, 3.0);
    }

    let p = WishartParams::central(2.0, HermitianMatrix::identity(1, AlgebraDim::Real))?;
    let batch = sample_spectra(&MatrixNormalSampler::for_params(&p)?, 300, count)?;
    let chi2 = ChiSquared::new(2.0).expect("positive dof");
    let d = ks_statistic(&batch.spectra, |x| chi2.cdf(x)) * (count as f64).sqrt();
    cx.record(S, "ks-chi-squared-2 (sqrt(N)·D)", d, 1.63);

    let p = WishartParams::noncentral(
        5.0,
        HermitianMatrix::diagonal(&[1.0, 0.6, 0.3], AlgebraDim::Quaternion),
        HermitianMatrix::diagonal(&[0.5, 0.0, 1.2], AlgebraDim::Quaternion),
    )?;
    let sampler = MatrixNormalSampler::for_params(&p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut defect = 0.0f64;
    for _ in 0..cx.repeats(200, 2000) {
        defect = defect.max(quaternion_pairing_defect(&sampler.sample_gram(&mut rng))?);
    }
    cx.record(S, "quaternion-eigenvalue-pairing", defect, 1e-12);
    Ok(())
}

fn mc_noncentral(cx: &mut Context) -> Result<(), CliError> {
    const S: &str = "mc-noncentral";
    let count = cx.mc_count();
    let ctrl = SeriesControl::default();
    let cases = [
        (AlgebraDim::Real, vec![1.0], vec![0.3]),
        (AlgebraDim::Real, vec![1.0, 0.5], vec![0.6, 0.4]),
        (AlgebraDim::Complex, vec![1.0, 0.5], vec![0.6, 0.4]),
    ];
    for (i, (beta, sigma, nc)) in cases.into_iter().enumerate() {
        let m = sigma.len();
        let p = WishartParams::noncentral(
            m as f64 + 2.0,
            HermitianMatrix::diagonal(&sigma, beta),
            HermitianMatrix::diagonal(&nc, beta),
        )?;
        let est = mc_importance_normalization(&p, count, 400 + i as u64, &ctrl)?;
        cx.record(
            S,
            format!("importance-normalization-m{m}-beta{} (standard errors)", beta.beta()),
            est.z_score(1.0),
            3.0,
        );
    }
    Ok(())
}

pub fn run(args: &VerifyArgs) -> Result<Value, CliError> {
    let mut cx = Context { budget: args.budget, fault: args.inject_fault, checks: Vec::new() };
    let all = args.suite == Suite::All;
    if all || args.suite == Suite::Identities {
        identities(&mut cx)?;
    }
    if all || args.suite == Suite::Reductions {
        reductions(&mut cx)?;
    }
    if all || args.suite == Suite::McCentral {
        mc_central(&mut cx)?;
    }
    if all || args.suite == Suite::McNoncentral {
        mc_noncentral(&mut cx)?;
    }
    let failed = cx.checks.iter().filter(|c| !c.passed()).count();
    for c in &cx.checks {
        let tag = if c.passed() { "PASS" } else { "FAIL" };
        eprintln!("[{tag}] {}/{}: measured {:.3e}, tolerance {:.1e}", c.suite, c.name, c.measured, c.tolerance);
    }
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "budget": match args.budget { Budget::Fast => "fast", Budget::Full => "full" },
        "passed": failed == 0,
        "checks": cx.checks.iter().map(|c| json!({
            "suite": c.suite,
            "name": c.name,
            "measured": if c.measured.is_finite() { json!(c.measured) } else { json!("inf") },
            "tolerance": c.tolerance,
            "passed": c.passed(),
        })).collect::<Vec<_>>(),
    });
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed, Box::new(report)));
    }
    Ok(report)
}
