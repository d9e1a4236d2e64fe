//! Command-line behaviour: outputs, defaults and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use statrs::distribution::{ContinuousCDF, Gamma};

fn rnda(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnda")).args(args).current_dir(dir).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("one.json", r#"{"m": 1, "beta": 1, "planes": [[[1.0]]]}"#),
        ("zero.json", r#"{"m": 1, "beta": 1, "planes": [[[0.0]]]}"#),
        ("omega.json", r#"{"m": 1, "beta": 1, "planes": [[[0.7]]]}"#),
        ("two_planes.json", r#"{"m": 1, "beta": 1, "planes": [[[1.0]], [[0.0]]]}"#),
        ("id2.json", r#"{"m": 2, "beta": 1, "planes": [[[1, 0], [0, 1]]]}"#),
        ("s2.json", r#"{"m": 2, "beta": 1, "planes": [[[3, 1], [1, 2]]]}"#),
        ("sig8.json", r#"{"spectrum": [1.0, 0.5], "logdet": -0.6931471805599453}"#),
        ("s8.json", r#"{"spectrum": [2.0, 0.7]}"#),
    ];
    for (name, text) in files {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

const CHI2: [&str; 8] = ["--beta", "1", "--n", "2", "--sigma", "one.json", "--s", "one.json"];

#[test]
fn chi_squared_density() {
    let dir = workspace();
    let out = rnda(dir.path(), &[&["density"], &CHI2[..]].concat());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    let want = (0.5f64 * (-0.5f64).exp()).ln();
    assert!((v["log_density"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(v["report"]["converged"], true);
}

#[test]
fn absent_omega_equals_zero_omega() {
    let dir = workspace();
    let plain = rnda(dir.path(), &[&["density"], &CHI2[..]].concat());
    let zero = rnda(dir.path(), &[&["density"], &CHI2[..], &["--omega", "zero.json"]].concat());
    assert_eq!(plain.stdout, zero.stdout);
    let nonzero = rnda(dir.path(), &[&["density"], &CHI2[..], &["--omega", "omega.json"]].concat());
    assert_ne!(plain.stdout, nonzero.stdout);
}

#[test]
fn generator_and_inverse_paths() {
    let dir = workspace();
    let base = ["density", "--beta", "1", "--n", "3", "--sigma", "id2.json", "--s", "s2.json"];
    let w = json(&rnda(dir.path(), &base))["log_density"].as_f64().unwrap();
    let g = json(&rnda(dir.path(), &[&base[..], &["--dist", "gw", "--generator", "normal"]].concat()))["log_density"]
        .as_f64()
        .unwrap();
    assert!((w - g).abs() < 1e-10 * w.abs());
    let inv = rnda(dir.path(), &[&base[..], &["--dist", "inv-gw"]].concat());
    assert!(inv.status.success());
}

#[test]
fn octonion_density_from_spectra() {
    let dir = workspace();
    let out = rnda(dir.path(), &["density", "--beta", "8", "--n", "3", "--sigma", "sig8.json", "--s", "s8.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["log_density"].as_f64().unwrap().is_finite());
}

#[test]
fn malformed_planes_exit_2() {
    let dir = workspace();
    let out =
        rnda(dir.path(), &["density", "--beta", "1", "--n", "2", "--sigma", "two_planes.json", "--s", "one.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`planes`"));
}

#[test]
fn convergence_failure_exit_3_with_report() {
    let dir = workspace();
    std::fs::write(dir.path().join("big.json"), r#"{"m": 1, "beta": 1, "planes": [[[400.0]]]}"#).unwrap();
    let out = rnda(
        dir.path(),
        &[
            "density",
            "--beta",
            "1",
            "--n",
            "2",
            "--sigma",
            "one.json",
            "--s",
            "big.json",
            "--omega",
            "big.json",
            "--max-degree",
            "5",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["report"]["converged"], false);
}

#[test]
fn lmax_series_and_mc() {
    let dir = workspace();
    let series = rnda(dir.path(), &["lmax", "--beta", "1", "--n", "2", "--sigma", "one.json", "--y-grid", "1"]);
    let v = json(&series);
    assert!((v["points"][0]["cdf"].as_f64().unwrap() - 0.393469340287366).abs() < 1e-12);

    let args = [
        "lmax",
        "--beta",
        "1",
        "--n",
        "2",
        "--sigma",
        "one.json",
        "--y-range",
        "0.5:4:8",
        "--method",
        "mc",
        "--count",
        "20000",
        "--seed",
        "9",
    ];
    let a = rnda(dir.path(), &args);
    let b = rnda(dir.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let points = json(&a)["points"].as_array().unwrap().clone();
    assert_eq!(points.len(), 8);
    let cdf: Vec<f64> = points.iter().map(|p| p["cdf"].as_f64().unwrap()).collect();
    assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
    assert!(points.iter().all(|p| p["std_error"].as_f64().unwrap() > 0.0));
}

#[test]
fn lmax_rejections() {
    let dir = workspace();
    let empty = rnda(dir.path(), &["lmax", "--beta", "1", "--n", "2", "--sigma", "one.json", "--y-range", "0:0:5"]);
    assert_eq!(empty.status.code(), Some(2));
    let nc = rnda(
        dir.path(),
        &["lmax", "--beta", "1", "--n", "2", "--sigma", "one.json", "--omega", "omega.json", "--y-grid", "1"],
    );
    assert_eq!(nc.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&nc.stderr).contains("mc"));
}

#[test]
fn sample_rows_and_defaults() {
    let dir = workspace();
    let run = |out: &str| {
        rnda(
            dir.path(),
            &["sample", "--beta", "2", "--n", "3", "--m", "2", "--count", "3", "--seed", "4", "--out", out],
        )
    };
    assert!(run("a.csv").status.success());
    assert!(run("b.csv").status.success());
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(dir.path().join("b.csv")).unwrap());
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "lambda_1,lambda_2");
    assert_eq!(lines.len(), 4);

    std::fs::write(
        dir.path().join("theta.json"),
        r#"{"m": 3, "beta": 2, "planes": [[[1,0,0],[0,1,0],[0,0,1]], [[0,0,0],[0,0,0],[0,0,0]]]}"#,
    )
    .unwrap();
    let explicit = rnda(
        dir.path(),
        &[
            "sample",
            "--beta",
            "2",
            "--n",
            "3",
            "--m",
            "2",
            "--count",
            "3",
            "--seed",
            "4",
            "--theta",
            "theta.json",
            "--out",
            "c.csv",
        ],
    );
    assert!(explicit.status.success());
    assert_eq!(a, std::fs::read_to_string(dir.path().join("c.csv")).unwrap());
}

#[test]
fn sample_chi_squared_one() {
    let dir = workspace();
    let count = 20_000;
    let out = rnda(
        dir.path(),
        &[
            "sample",
            "--beta",
            "1",
            "--n",
            "1",
            "--m",
            "1",
            "--count",
            &count.to_string(),
            "--seed",
            "1",
            "--out",
            "x.csv",
        ],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    let mut xs: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    let law = Gamma::new(0.5, 0.5).unwrap();
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (law.cdf(x) - i as f64 / n).max((i as f64 + 1.0) / n - law.cdf(x)))
        .fold(0.0, f64::max);
    assert!(d < 1.63 / n.sqrt(), "KS {d}");
}

#[test]
fn octonion_sampling_rejected() {
    let dir = workspace();
    let out = rnda(dir.path(), &["sample", "--beta", "8", "--n", "2", "--m", "2", "--count", "3", "--out", "o.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported algebra"));
}

#[test]
fn verify_passes_and_detects_fault() {
    let dir = workspace();
    let ok = rnda(dir.path(), &["verify", "--suite", "identities"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["passed"], true);
    let bad = rnda(dir.path(), &["verify", "--suite", "identities", "--inject-fault", "jack-normalization"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["passed"], false);
}

#[test]
fn bad_thread_setting_rejected() {
    let dir = workspace();
    let out = Command::new(env!("CARGO_BIN_EXE_rnda"))
        .args([&["density"], &CHI2[..]].concat())
        .env("RNDA_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
