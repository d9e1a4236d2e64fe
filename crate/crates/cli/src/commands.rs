use std::fs::File;
use std::io::{BufWriter, Write};

use rnda_core::{
    gw_density_log, gw_density_log_from, inv_gw_density_log, inv_gw_density_log_from, lambda_max_cdf_central_spectral,
    mc_lambda_max_cdf, normal_generator, sample_spectra, wishart_density_log, wishart_density_log_from, AlgebraDim,
    DensityInputs, HermitianMatrix, MatrixNormalSampler, SeriesControl, SeriesValue, Spectrum, WishartParams,
};
use serde_json::{json, Value};

use crate::input::{read_operand, read_rectangular, Operand};
use crate::{
    report_json, CliError, DensityArgs, Dist, Generator, LmaxArgs, Method, ModelArgs, SampleArgs, SCHEMA_VERSION,
};

fn algebra(beta: u32) -> Result<AlgebraDim, CliError> {
    AlgebraDim::from_beta(beta).map_err(|e| CliError::Validation(format!("--beta: {e}")))
}

struct Model {
    beta: AlgebraDim,
    n: f64,
    sigma: Operand,
    omega: Option<Operand>,
    ctrl: SeriesControl,
}

impl Model {
    fn load(args: &ModelArgs) -> Result<Self, CliError> {
        let beta = algebra(args.beta)?;
        if !(args.n > 0.0) || !args.n.is_finite() {
            return Err(CliError::Validation(format!("--n must be positive (got {})", args.n)));
        }
        let ctrl = SeriesControl::new(args.max_degree, args.tol).map_err(|e| CliError::Validation(e.to_string()))?;
        let sigma = read_operand(&args.sigma, beta)?;
        let omega = args.omega.as_deref().map(|p| read_operand(p, beta)).transpose()?;
        // a zero noncentrality is the central model
        let omega = omega.filter(|o| match o {
            Operand::Diagonal(d) => d.iter().any(|&v| v != 0.0),
            Operand::Matrix(a) => a.planes().iter().any(|p| p.iter().any(|&v| v != 0.0)),
        });
        if let Some(o) = &omega {
            if o.m() != sigma.m() {
                return Err(CliError::Validation(format!(
                    "--omega is {0}x{0} but --sigma is {1}x{1}",
                    o.m(),
                    sigma.m()
                )));
            }
        }
        Ok(Model { beta, n: args.n, sigma, omega, ctrl })
    }

    fn m(&self) -> usize {
        self.sigma.m()
    }

    fn params(&self) -> Result<WishartParams, CliError> {
        let sigma = self.sigma.to_matrix(self.beta);
        Ok(match &self.omega {
            None => WishartParams::central(self.n, sigma)?,
            Some(o) => WishartParams::noncentral(self.n, sigma, o.to_matrix(self.beta))?,
        })
    }

    fn header(&self, command: &str) -> serde_json::Map<String, Value> {
        let mut out = serde_json::Map::new();
        out.insert("schema_version".into(), json!(SCHEMA_VERSION));
        out.insert("command".into(), json!(command));
        out.insert("beta".into(), json!(self.beta.beta()));
        out.insert("n".into(), json!(self.n));
        out.insert("m".into(), json!(self.m()));
        out.insert("central".into(), json!(self.omega.is_none()));
        out
    }
}

pub fn density(args: &DensityArgs) -> Result<Value, CliError> {
    let model = Model::load(&args.model)?;
    let point = read_operand(&args.s, model.beta)?;
    if point.m() != model.m() {
        return Err(CliError::Validation(format!("--s is {0}x{0} but --sigma is {1}x{1}", point.m(), model.m())));
    }
    let Generator::Normal = args.generator;
    let h = normal_generator(model.beta);
    let all_diagonal = matches!(point, Operand::Diagonal(_))
        && matches!(model.sigma, Operand::Diagonal(_))
        && model.omega.as_ref().is_none_or(|o| matches!(o, Operand::Diagonal(_)));
    let value: SeriesValue = if all_diagonal {
        let diag = |o: &Operand| match o {
            Operand::Diagonal(d) => d.clone(),
            Operand::Matrix(_) => unreachable!(),
        };
        let mut s = diag(&point);
        if args.dist == Dist::InvGw {
            if let Some(bad) = s.iter().find(|v| !(**v > 0.0)) {
                return Err(CliError::Validation(format!("--s is not positive definite (entry {bad})")));
            }
            s = s.iter().map(|v| 1.0 / v).collect();
        }
        let omega = model.omega.as_ref().map(diag);
        let inputs = DensityInputs::diagonal(model.n, model.beta, &s, &diag(&model.sigma), omega.as_deref())?;
        match args.dist {
            Dist::Wishart => wishart_density_log_from(&inputs, &model.ctrl)?,
            Dist::Gw => gw_density_log_from(&inputs, &h, &model.ctrl)?,
            Dist::InvGw => inv_gw_density_log_from(&inputs, &h, &model.ctrl)?,
        }
    } else {
        let p = model.params()?;
        let s = point.to_matrix(model.beta);
        match args.dist {
            Dist::Wishart => wishart_density_log(&s, &p, &model.ctrl)?,
            Dist::Gw => gw_density_log(&s, &p, &h, &model.ctrl)?,
            Dist::InvGw => inv_gw_density_log(&s, &p, &h, &model.ctrl)?,
        }
    };
    let mut out = model.header("density");
    let dist = match args.dist {
        Dist::Wishart => "wishart",
        Dist::Gw => "gw",
        Dist::InvGw => "inv-gw",
    };
    out.insert("dist".into(), json!(dist));
    out.insert("generator".into(), json!("normal"));
    out.insert("log_density".into(), json!(value.value));
    out.insert("report".into(), report_json(&value.report));
    Ok(Value::Object(out))
}

fn parse_y(raw: &str) -> Result<f64, CliError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| *v > 0.0 && v.is_finite())
        .ok_or_else(|| CliError::Validation(format!("y values must be positive numbers (got {raw:?})")))
}

pub fn y_values(grid: Option<&str>, range: Option<&str>) -> Result<Vec<f64>, CliError> {
    if let Some(grid) = grid {
        let ys = grid.split(',').map(parse_y).collect::<Result<Vec<_>, _>>()?;
        if ys.is_empty() {
            return Err(CliError::Validation("--y-grid is empty".into()));
        }
        return Ok(ys);
    }
    let range = range.ok_or_else(|| CliError::Validation("one of --y-grid or --y-range is required".into()))?;
    let parts: Vec<&str> = range.split(':').collect();
    let bad = || {
        CliError::Validation(format!("--y-range must be lo:hi:steps with 0 < lo < hi and steps >= 2 (got {range:?})"))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || steps < 2 {
        return Err(bad());
    }
    Ok((0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect())
}

pub fn lmax(args: &LmaxArgs) -> Result<Value, CliError> {
    let model = Model::load(&args.model)?;
    let ys = y_values(args.y_grid.as_deref(), args.y_range.as_deref())?;
    let mut out = model.header("lmax");
    let points: Vec<Value> = match args.method {
        Method::Series => {
            if model.omega.is_some() {
                return Err(CliError::Validation(
                    "the series method needs a central model; use --method mc for a noncentral one".into(),
                ));
            }
            let sigma = match &model.sigma {
                Operand::Diagonal(d) => Spectrum::new(d.clone())?,
                Operand::Matrix(a) => a.positive_definite_spectrum()?,
            };
            out.insert("method".into(), json!("series"));
            ys.iter()
                .map(|&y| {
                    let c = lambda_max_cdf_central_spectral(y, model.n, model.beta, &sigma, &model.ctrl)?;
                    Ok(json!({
                        "y": y,
                        "cdf": c.probability,
                        "log_cdf": c.log_probability,
                        "clamped": c.clamped,
                        "report": report_json(&c.report),
                    }))
                })
                .collect::<Result<_, CliError>>()?
        }
        Method::Mc => {
            if args.count < 10_000 {
                return Err(CliError::Validation(format!("--count must be at least 10000 (got {})", args.count)));
            }
            let sampler = MatrixNormalSampler::for_params(&model.params()?)?;
            let est = mc_lambda_max_cdf(&sampler, &ys, args.count, args.seed)?;
            out.insert("method".into(), json!("mc"));
            out.insert("count".into(), json!(args.count));
            out.insert("seed".into(), json!(args.seed));
            ys.iter().zip(&est).map(|(&y, e)| json!({"y": y, "cdf": e.estimate, "std_error": e.std_error})).collect()
        }
    };
    out.insert("points".into(), Value::Array(points));
    Ok(Value::Object(out))
}

pub fn sample(args: &SampleArgs) -> Result<Value, CliError> {
    let beta = algebra(args.beta)?;
    if !beta.is_associative() {
        return Err(CliError::Validation(
            "--beta 8: unsupported algebra, octonion matrices cannot be sampled (no associative matrix product)".into(),
        ));
    }
    if args.m == 0 || args.n < args.m {
        return Err(CliError::Validation(format!("need n >= m >= 1 (got n = {}, m = {})", args.n, args.m)));
    }
    if args.count == 0 {
        return Err(CliError::Validation("--count must be positive".into()));
    }
    let square = |path: &Option<std::path::PathBuf>, k: usize, flag: &str| -> Result<HermitianMatrix, CliError> {
        match path {
            None => Ok(HermitianMatrix::identity(k, beta)),
            Some(p) => {
                let a = read_operand(p, beta)?.to_matrix(beta);
                if a.m() != k {
                    return Err(CliError::Validation(format!("{flag} must be {k}x{k} (got {0}x{0})", a.m())));
                }
                Ok(a)
            }
        }
    };
    let sigma = square(&args.sigma, args.m, "--sigma")?;
    let theta = square(&args.theta, args.n, "--theta")?;
    let mu = match &args.mu {
        None => None,
        Some(p) => {
            let mu = read_rectangular(p, beta)?;
            if mu.rows() != args.n || mu.cols() != args.m {
                return Err(CliError::Validation(format!(
                    "--mu must be {}x{} (got {}x{})",
                    args.n,
                    args.m,
                    mu.rows(),
                    mu.cols()
                )));
            }
            Some(mu)
        }
    };
    let sampler = MatrixNormalSampler::new(mu, &sigma, &theta)?;
    let batch = sample_spectra(&sampler, args.seed, args.count)?;
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", args.out.display()));
    let mut file = BufWriter::new(File::create(&args.out).map_err(io)?);
    batch.write_csv(&mut file).map_err(io)?;
    file.flush().map_err(io)?;
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sample",
        "beta": beta.beta(),
        "n": args.n,
        "m": args.m,
        "count": batch.count,
        "seed": batch.base_seed,
        "chunk_size": batch.chunk_size,
        "out": args.out.display().to_string(),
    }))
}
