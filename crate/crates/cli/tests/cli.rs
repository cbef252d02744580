use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

fn pvsmooth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvsmooth")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = pvsmooth(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    pvsmooth(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn keyed(path: &Path) -> HashMap<String, String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn num(map: &HashMap<String, String>, key: &str) -> f64 {
    map[key].parse().unwrap()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--out", s(dir)];
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn estimate_worked_example() {
    let out = ok(&["estimate", "--sivi", "22", "--alpha", "0.0046", "--beta", "0.0567", "--sigma", "0.0315"]);
    assert_eq!(out.trim(), "0.1894");
    let out = ok(&["estimate", "--sivi", "0", "--alpha", "1", "--beta", "0", "--sigma", "0"]);
    assert_eq!(out.trim(), "0.0000");
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let coeffs = tmp.path().join("c.txt");
    std::fs::write(&coeffs, "alpha=1\nbeta=0\nsigma=0\n").unwrap();
    assert_eq!(code(&["estimate", "--sivi", "1", "--coeffs", s(&coeffs), "--alpha", "1"]), 1);
    assert_eq!(code(&["estimate", "--sivi", "1", "--alpha", "1"]), 1);
    assert_eq!(code(&["size", "--data", "x", "--ma-window", "10", "--rr-limit", "0.05"]), 1);
    assert_eq!(code(&["size", "--data", "x", "--method", "ma", "--rr-limit", "0.05"]), 1);
    assert_eq!(code(&["--jobs", "0", "estimate", "--sivi", "1", "--alpha", "1", "--beta", "0", "--sigma", "0"]), 1);
    assert_eq!(code(&["no-such-command"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn missing_data_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&["sivi", "--data", s(&tmp.path().join("absent"))]), 2);
}

#[test]
fn degenerate_curve_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let curve = tmp.path().join("curve.csv");
    std::fs::write(&curve, "hours,amps\n10,47.01\n").unwrap();
    assert_eq!(code(&["fit-battery", "--curve", s(&curve)]), 3);
}

#[test]
fn clear_year_sivi_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d");
    let out = tmp.path().join("o");
    synth(&data, &["--profile", "clear", "--days", "30"]);
    ok(&["sivi", "--data", s(&data), "--out", s(&out)]);
    let csv = std::fs::read_to_string(out.join("sivi.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r.ends_with(",1.000000")), "{csv}");
}

#[test]
fn size_on_mixed_year() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d");
    let out = tmp.path().join("o");
    synth(&data, &["--days", "60"]);
    ok(&["size", "--data", s(&data), "--out", s(&out), "--plot"]);
    let summary = keyed(&out.join("summary.txt"));
    assert!(num(&summary, "sboc_p95") > 0.0);
    assert!(num(&summary, "pearson_r") > 0.5);
    for f in ["scatter.csv", "cdf.csv", "regression.txt", "scatter.svg", "cdf.svg", "timeseries.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let scatter = std::fs::read_to_string(out.join("scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 61);

    let est = ok(&["estimate", "--sivi", "10", "--coeffs", s(&out.join("regression.txt"))]);
    assert!(est.trim().parse::<f64>().unwrap() > 0.0);
}

#[test]
fn unit_window_needs_no_battery() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d");
    let out = tmp.path().join("o");
    synth(&data, &["--days", "20"]);
    ok(&["size", "--data", s(&data), "--out", s(&out), "--ma-window", "1", "--tol", "1e-4"]);
    assert!(num(&keyed(&out.join("summary.txt")), "sboc_p100") <= 1e-4);
}

#[test]
fn sensitivity_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d");
    let out = tmp.path().join("o");
    synth(&data, &["--days", "30"]);
    let d = s(&data);
    let o = s(&out);
    ok(&["sensitivity", "--data", d, "--out", o, "--axis", "dod", "--values", "0.8,0.5"]);
    let csv = std::fs::read_to_string(out.join("sensitivity.csv")).unwrap();
    let means: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(means.len(), 2);
    assert!(means[1] > means[0], "{csv}");

    ok(&["sensitivity", "--data", d, "--out", o, "--axis", "soc_init", "--values", "0.8"]);
    let csv = std::fs::read_to_string(out.join("sensitivity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    assert_eq!(code(&["sensitivity", "--data", d, "--out", o, "--axis", "colour", "--values", "1"]), 1);
    assert_eq!(code(&["sensitivity", "--data", d, "--out", o, "--axis", "rr_limit", "--values", "0.1"]), 1);
}

#[test]
fn compare_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d");
    let out = tmp.path().join("o");
    synth(&data, &["--days", "60"]);
    ok(&["compare", "--data", s(&data), "--out", s(&out)]);
    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    let rows: HashMap<&str, (f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0], (f[1].parse().unwrap(), f[2].parse().unwrap()))
        })
        .collect();
    assert_eq!(rows.len(), 4);
    let detailed = rows["detailed"].1;
    assert!((0.93..=1.0).contains(&detailed), "{csv}");
    assert!(rows["peak_energy_exchange"].0 < rows["detailed"].0);
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d");
    synth(&data, &["--days", "20"]);
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "data = \"d\"\nout = \"o\"\nma_window = 5\ndod = 0.6\n").unwrap();

    ok(&["--config", s(&cfg), "size"]);
    let summary = keyed(&tmp.path().join("o").join("summary.txt"));
    assert_eq!(summary["ma_window"], "5");
    assert_eq!(summary["dod"], "0.6");

    ok(&["--config", s(&cfg), "size", "--ma-window", "15"]);
    let summary = keyed(&tmp.path().join("o").join("summary.txt"));
    assert_eq!(summary["ma_window"], "15");

    std::fs::write(&cfg, "data = \"d\"\nwindow = 5\n").unwrap();
    assert_eq!(code(&["--config", s(&cfg), "size"]), 1);
}

#[test]
fn fitted_constants_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let curve = tmp.path().join("curve.csv");
    std::fs::write(&curve, "hours,amps\n1,242.4\n3,115.7\n5,79.8\n8,55.23\n10,47.01\n").unwrap();
    let kibam = tmp.path().join("kibam.txt");
    ok(&["fit-battery", "--curve", s(&curve), "--output", s(&kibam)]);
    let k = keyed(&kibam);
    assert!((num(&k, "k1") - 1.121).abs() < 0.05, "{k:?}");

    let data = tmp.path().join("d");
    synth(&data, &["--days", "10"]);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&["size", "--data", s(&data), "--out", s(&a)]);
    ok(&["size", "--data", s(&data), "--out", s(&b), "--kibam", s(&kibam)]);
    let (sa, sb) = (keyed(&a.join("summary.txt")), keyed(&b.join("summary.txt")));
    assert!((num(&sa, "mean_sboc") - num(&sb, "mean_sboc")).abs() < 5e-3);
}
