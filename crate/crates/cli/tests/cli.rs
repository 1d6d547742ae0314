use std::path::Path;
use std::process::{Command, Output};

fn kouexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kouexp")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn table1_cells_and_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sum = dir.path().join("sum.json");
    let fit = kouexp(&["fit-mortality", "--out", sum.to_str().unwrap()]);
    assert!(fit.status.success());
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sum).unwrap()).unwrap();
    assert!(meta["sup_error"].as_f64().unwrap() < 1e-6);
    assert_eq!(meta["terms"].as_array().unwrap().len(), 15);

    let fitted = stdout(&kouexp(&["table1"]));
    let rows = csv_rows(&fitted);
    assert_eq!(rows[0], ["V", "lambda_1", "lambda_0.01", "lambda_0.0001", "lambda_0.000001", "gbm"]);
    let cell: f64 = rows[1][1].parse().unwrap();
    assert!(((cell - 0.479_436_811_4) / 0.479_436_811_4).abs() < 1e-6, "{cell}");
    let gbm: f64 = rows[3][5].parse().unwrap();
    assert!(((gbm - 0.005_793_300_500) / 0.005_793_300_500).abs() < 1e-6, "{gbm}");
    assert_eq!(rows[1][1].len(), "0.47943679055575872".len());

    let config = dir.path().join("run.json");
    write_config(&config, &format!(r#"{{"expsum": {{"source": "file", "path": {:?}}}}}"#, sum.to_str().unwrap()));
    let reread = stdout(&kouexp(&["--config", config.to_str().unwrap(), "table1"]));
    assert_eq!(fitted, reread);
}

fn write_config(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn table3_rows() {
    let text = stdout(&kouexp(&["table3"]));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["set", "p", "var", "cte"]);
    assert_eq!(rows.len(), 9);
    let row = rows.iter().find(|r| r[0] == "set-A" && r[1] == "0.9").unwrap();
    let (var, cte): (f64, f64) = (row[2].parse().unwrap(), row[3].parse().unwrap());
    assert!((var - 0.187_615).abs() < 1e-4 && (cte - 0.380_809).abs() < 1e-3, "{row:?}");
    // Presentation rounding to six decimals.
    assert_eq!(row[2].split('.').nth(1).unwrap().len(), 6);
}

#[test]
fn json_and_digits() {
    let text = stdout(&kouexp(&["tailprob", "--v", "0.2,0.4", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert!(v[0]["imag_residual"].as_f64().unwrap() <= 1e-8);
    let text = stdout(&kouexp(&["tailprob", "--v", "0.2", "--digits", "5"]));
    assert_eq!(csv_rows(&text)[1][1], "0.47944");
}

#[test]
fn roots_are_interlaced() {
    let text = stdout(&kouexp(&["roots", "--q", "0.05"]));
    let rows = csv_rows(&text);
    let names: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["-zeta_hat2", "-rho_hat", "-zeta_hat1", "zeta1", "rho", "zeta2"]);
    let re: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(re.windows(2).all(|w| w[0] < w[1]) && re[2] < 0.0 && re[3] > 0.0, "{re:?}");
}

#[test]
fn dist_and_tailcurve_shapes() {
    let text = stdout(&kouexp(&["dist", "--y", "100,300,900"]));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["y", "density", "cdf", "mean_below", "mean_above"]);
    let cdf: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(cdf.windows(2).all(|w| w[0] < w[1]));

    let text = stdout(&kouexp(&["tailcurve", "--sets", "set-A,set-B", "--points", "5"]));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["V", "set-A", "set-B"]);
    assert_eq!(rows.len(), 6);
}

#[test]
fn monte_carlo_is_reproducible() {
    let args = ["mc", "--paths", "200", "--experiments", "3", "--seed", "7", "--v", "0.2"];
    let a = stdout(&kouexp(&args));
    assert_eq!(a, stdout(&kouexp(&args)));
    assert_eq!(csv_rows(&a)[0], ["V", "mc_mean", "mc_std", "analytic", "abs_diff", "within_3std"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write_config(&bad, r#"{"equity": "set-A", "colour": "red"}"#);
    assert_eq!(kouexp(&["--config", bad.to_str().unwrap(), "roots"]).status.code(), Some(2));
    write_config(&bad, r#"{"mortality": {"age": 65, "A": 0.0007, "B": -1, "c": 1.1}}"#);
    assert_eq!(kouexp(&["--config", bad.to_str().unwrap(), "table1"]).status.code(), Some(2));
    assert_eq!(kouexp(&["--config", "/nonexistent/run.json", "roots"]).status.code(), Some(2));
    assert_eq!(kouexp(&["frobnicate"]).status.code(), Some(2));

    // P(L > 0) is far below 0.7 for the default contract, so the bracket has no sign change.
    let out = kouexp(&["var", "--p", "0.3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("risk::value_at_risk"));
}
