use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ssakit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssakit"))
        .args(args)
        .env("SSAKIT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_series(dir: &Path, name: &str, values: &[Option<f64>]) -> PathBuf {
    let path = dir.join(name);
    let mut text = String::from("value\n");
    for v in values {
        match v {
            Some(x) => text.push_str(&format!("{x:?}\n")),
            None => text.push_str("NA\n"),
        }
    }
    std::fs::write(&path, text).unwrap();
    path
}

fn present(values: &[f64]) -> Vec<Option<f64>> {
    values.iter().copied().map(Some).collect()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

fn sine(n: usize, period: f64) -> Vec<f64> {
    (0..n).map(|i| (2.0 * PI * i as f64 / period).sin()).collect()
}

fn noise(n: usize, seed: u64) -> Vec<f64> {
    // xorshift keeps the fixture free of extra dependencies
    let mut s = seed | 1;
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

#[test]
fn decompose_then_reconstruct_reproduces_input() {
    let dir = TempDir::new().unwrap();
    let x: Vec<f64> = sine(40, 7.0).iter().zip(noise(40, 3)).map(|(a, b)| a + b).collect();
    let input = write_series(dir.path(), "in.csv", &present(&x));
    let dec = dir.path().join("dec.json");
    stdout(&ssakit(&[
        "decompose",
        input.to_str().unwrap(),
        "--window",
        "12",
        "--components",
        "12",
        "-o",
        dec.to_str().unwrap(),
    ]));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&dec).unwrap()).unwrap();
    assert_eq!(doc["L"], 12);
    assert_eq!(doc["N"], 40);
    assert_eq!(doc["sigmas"].as_array().unwrap().len(), 12);

    let text = stdout(&ssakit(&["reconstruct", dec.to_str().unwrap()]));
    assert!(text.starts_with("signal,residual\n"));
    let rec = csv_column(&text, 0);
    let err = rec.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "round trip error {err}");
}

#[test]
fn reconstruct_with_inline_groups_and_json() {
    let dir = TempDir::new().unwrap();
    let x: Vec<f64> = sine(47, 12.0).iter().zip(sine(47, 4.0)).map(|(a, b)| 2.0 * a + b).collect();
    let input = write_series(dir.path(), "in.csv", &present(&x));
    let out = stdout(&ssakit(&[
        "--json",
        "reconstruct",
        input.to_str().unwrap(),
        "-L",
        "24",
        "-k",
        "4",
        "--group",
        "slow=1,2",
        "--group",
        "fast=3,4",
    ]));
    let v: Value = serde_json::from_str(&out).unwrap();
    let slow: Vec<f64> = serde_json::from_value(v["groups"]["slow"].clone()).unwrap();
    let expect: Vec<f64> = sine(47, 12.0).iter().map(|a| 2.0 * a).collect();
    let err = slow.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8);

    let overlap = ssakit(&["reconstruct", input.to_str().unwrap(), "-L", "24", "-k", "4", "--group", "a=1,2", "--group", "b=2"]);
    assert_eq!(overlap.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&overlap.stderr).contains("appears in groups"));
}

#[test]
fn forecast_continues_doubling() {
    let dir = TempDir::new().unwrap();
    let x: Vec<f64> = (0..20).map(|i| 2f64.powi(i)).collect();
    let input = write_series(dir.path(), "pow.csv", &present(&x));
    let text = stdout(&ssakit(&["forecast", input.to_str().unwrap(), "--window", "12", "--rank", "2", "--horizon", "24"]));
    assert!(text.starts_with("index,point,lower,upper\n"));
    let index = csv_column(&text, 0);
    assert_eq!(index[0], 21.0);
    let point = csv_column(&text, 1);
    assert_eq!(point.len(), 24);
    for (h, p) in point.iter().enumerate() {
        let truth = 2f64.powi(20 + h as i32);
        assert!((p / truth - 1.0).abs() < 1e-9, "step {h}: {p} vs {truth}");
    }
}

#[test]
fn forecast_intervals_are_reproducible_and_bracket_the_point() {
    let dir = TempDir::new().unwrap();
    let x: Vec<f64> = sine(80, 10.0).iter().zip(noise(80, 9)).map(|(a, b)| a + 0.3 * b).collect();
    let input = write_series(dir.path(), "in.csv", &present(&x));
    let args = [
        "forecast",
        input.to_str().unwrap(),
        "-L",
        "30",
        "-r",
        "2",
        "-H",
        "10",
        "--intervals",
        "-B",
        "150",
        "--seed",
        "11",
    ];
    let a = stdout(&ssakit(&args));
    assert_eq!(a, stdout(&ssakit(&args)));
    let (point, lower, upper) = (csv_column(&a, 1), csv_column(&a, 2), csv_column(&a, 3));
    for i in 0..10 {
        assert!(lower[i] <= point[i] && point[i] <= upper[i]);
    }

    let by_list = stdout(&ssakit(&[
        "forecast",
        input.to_str().unwrap(),
        "-L",
        "30",
        "--components",
        "1,2",
        "-H",
        "10",
        "--intervals",
        "-B",
        "150",
        "--seed",
        "11",
    ]));
    assert_eq!(by_list, a);

    let both = ssakit(&["forecast", input.to_str().unwrap(), "--components", "1,2", "-r", "2", "-H", "3"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn detect_is_byte_identical_under_a_seed() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "noise.csv", &present(&noise(200, 5)));
    let args = ["detect", input.to_str().unwrap(), "--window", "20", "--gamma", "0.95", "--surrogates", "1000", "--seed", "7"];
    let a = ssakit(&args);
    let b = ssakit(&args);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("null rejected"));

    let mut json_args = vec!["--json"];
    json_args.extend_from_slice(&args);
    let report: Value = serde_json::from_str(&stdout(&ssakit(&json_args))).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["tests"].as_array().unwrap().len(), 20);
}

#[test]
fn gapfill_estimate_cadzow_rank_wcor_autogroup() {
    let dir = TempDir::new().unwrap();
    let x = sine(60, 10.0);
    let mut with_gaps = present(&x);
    with_gaps[30] = None;
    with_gaps[31] = None;
    let gappy = write_series(dir.path(), "gappy.csv", &with_gaps);
    let filled = csv_column(&stdout(&ssakit(&["gapfill", gappy.to_str().unwrap(), "-L", "20", "-r", "2"])), 0);
    assert!((filled[30] - x[30]).abs() < 1e-6 && (filled[31] - x[31]).abs() < 1e-6);
    let sub = csv_column(
        &stdout(&ssakit(&["gapfill", gappy.to_str().unwrap(), "-L", "20", "-r", "2", "--method", "subspace"])),
        0,
    );
    assert!((sub[30] - x[30]).abs() < 1e-8);

    let clean = write_series(dir.path(), "clean.csv", &present(&x));
    let path = clean.to_str().unwrap();
    for roots in ["esprit", "lrr"] {
        let model: Value =
            serde_json::from_str(&stdout(&ssakit(&["--json", "estimate", path, "-L", "20", "-r", "2", "--roots", roots]))).unwrap();
        let term = &model["terms"][0];
        assert!((term["omega"].as_f64().unwrap() - 0.1).abs() < 1e-8, "{roots}");
        assert!((term["A"].as_f64().unwrap() - 1.0).abs() < 1e-8, "{roots}");
    }
    let table = stdout(&ssakit(&["estimate", path, "-L", "20", "-r", "2"]));
    assert!(table.starts_with("A,rho,omega,phi,degree,period\n"));

    let cz: Value = serde_json::from_str(&stdout(&ssakit(&["--json", "cadzow", path, "-L", "20", "-r", "2"]))).unwrap();
    assert_eq!(cz["converged"], true);

    let noisy: Vec<f64> = x.iter().zip(noise(60, 4)).map(|(a, b)| a + 0.2 * b).collect();
    let noisy = write_series(dir.path(), "noisy.csv", &present(&noisy));
    let sel: Value =
        serde_json::from_str(&stdout(&ssakit(&["--json", "rank", noisy.to_str().unwrap(), "-L", "24", "-r", "6"]))).unwrap();
    assert_eq!(sel["chosen"], 2);

    let w = stdout(&ssakit(&["wcor", path, "-L", "20", "-k", "2"]));
    assert_eq!(w.lines().count(), 2);

    let mixed: Vec<f64> = (0..96).map(|i| 0.05 * i as f64 + (2.0 * PI * i as f64 / 12.0).sin()).collect();
    let mixed = write_series(dir.path(), "mixed.csv", &present(&mixed));
    let grouping: Value =
        serde_json::from_str(&stdout(&ssakit(&["autogroup", mixed.to_str().unwrap(), "-L", "48", "-k", "4"]))).unwrap();
    assert_eq!(grouping["harmonic1"].as_array().unwrap().len(), 2);
    assert!(grouping.get("trend").is_some());
}

#[test]
fn usage_and_input_errors_have_distinct_exit_codes() {
    assert_eq!(ssakit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ssakit(&["forecast", "x.csv", "--rank", "2"]).status.code(), Some(2));
    assert_eq!(ssakit(&["--help"]).status.code(), Some(0));

    let missing = ssakit(&["decompose", "/nonexistent/in.csv", "-L", "3"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read input"));

    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "short.csv", &present(&[1.0, 2.0, 3.0, 4.0, 5.0]));
    let bad = ssakit(&["decompose", input.to_str().unwrap(), "--window", "5", "-k", "2"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("window length 5 out of range"));
}
