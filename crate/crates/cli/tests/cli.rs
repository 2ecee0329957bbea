use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cohlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("COHLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn result(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("result.json")).unwrap()).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn dim_scan_prints_the_binomial() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cohlab(
        &["dim-scan", "--p", "1", "--q", "2", "--n", "2", "--d", "2"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("dim = 6"));
    let v = result(tmp.path());
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["experiment"], "dim-scan");
    assert_eq!(v["estimates"][0]["exact"]["rational"], "6");
    assert!(v["claim"].as_str().unwrap().contains("C(pq+d, d)"));
    for f in ["result.json", "sweep.csv", "plotdata.csv"] {
        assert!(tmp.path().join(f).is_file(), "{f}");
    }
    let plot = fs::read_to_string(tmp.path().join("plotdata.csv")).unwrap();
    assert!(plot.starts_with("x,y,err"));
}

#[test]
fn haar_tv_reports_the_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "haar-tv",
        "--n",
        "2",
        "--m",
        "100",
        "--budget",
        "20000",
        "--samples",
        "20000",
        "--seed",
        "7",
    ];
    let out = cohlab(&args, tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = result(tmp.path());
    assert_eq!(v["verdict"], "pass");
    let bound = v["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["value"].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert!((bound - 16.0 / 98.0).abs() < 1e-12);
    let sweep = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("n,m,statistic,estimate,ci_lo,ci_hi,paper_bound,pass"));
}

#[test]
fn identical_invocations_give_identical_json() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "haar-tv",
        "--n",
        "1",
        "--m",
        "16",
        "--budget",
        "10000",
        "--samples",
        "10000",
        "--seed",
        "3",
    ];
    assert_eq!(cohlab(&args, a.path()).status.code(), Some(0));
    let single = Command::new(env!("CARGO_BIN_EXE_cohlab"))
        .args(args)
        .args(["--threads", "1", "--out"])
        .arg(b.path())
        .output()
        .unwrap();
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(without_timing(result(a.path())), without_timing(result(b.path())));
}

#[test]
fn expansion_reading_is_a_finding() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cohlab(
        &["su22-verify", "--n", "2", "--max-weight", "4", "--reading", "expansion"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(result(tmp.path())["verdict"], "finding");
}

#[test]
fn basis_reading_passes_at_low_weight() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cohlab(&["su22-verify", "--n", "2", "--max-weight", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn unknown_flag_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cohlab(&["dim-scan", "--bogus", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!tmp.path().join("result.json").exists());
}

#[test]
fn parameter_errors_exit_one_with_a_message() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cohlab(&["haar-tv", "--n", "3", "--m", "2", "--budget", "20000"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid flags"));
    let out = cohlab(&["haar-tv", "--n", "2", "--m", "10", "--budget", "5"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    let out = cohlab(&["dim-scan", "--threads", "0"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_summarizes_result_files() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    assert_eq!(
        cohlab(
            &["dim-scan", "--p", "1", "--q", "1", "--n", "1", "--d", "3"],
            &runs.join("a")
        )
        .status
        .code(),
        Some(0)
    );
    let su22 = ["su22-verify", "--n", "2", "--max-weight", "4", "--reading", "expansion"];
    assert_eq!(cohlab(&su22, &runs.join("b")).status.code(), Some(2));
    let summary = tmp.path().join("summary");
    let out = Command::new(env!("CARGO_BIN_EXE_cohlab"))
        .arg("report")
        .arg(&runs)
        .arg("--out")
        .arg(&summary)
        .output()
        .unwrap();
    // the worst verdict wins
    assert_eq!(out.status.code(), Some(2));
    let csv = fs::read_to_string(summary.join("summary.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("path,experiment,seed,verdict"));
    assert!(lines[1].contains("dim-scan") && lines[1].contains("pass"));
    assert!(lines[2].contains("su22-verify") && lines[2].contains("finding"));

    let empty = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cohlab"))
        .arg("report")
        .arg(empty.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn every_subcommand_records_its_claim() {
    let cases: &[&[&str]] = &[
        &[
            "overlap",
            "--p",
            "1",
            "--q",
            "1",
            "--n",
            "2",
            "--d",
            "20",
            "--samples",
            "3",
        ],
        &["covariance", "--p", "1", "--q", "2", "--samples", "3"],
        &["symplectic-check", "--p", "1", "--q", "1", "--samples", "3"],
        &["kernel-scan", "--p", "1", "--q", "1", "--n", "2", "--d", "2"],
        &["su11-verify", "--n", "2", "--d", "4"],
        &["identity-check", "--n", "3", "--samples", "2"],
        &["definetti-gap", "--n", "2", "--k", "4", "--d", "2"],
        &["count-fidelity", "--m", "50", "--alpha2", "2"],
    ];
    for args in cases {
        let tmp = tempfile::tempdir().unwrap();
        let out = cohlab(args, tmp.path());
        let code = out.status.code();
        assert!(
            code == Some(0) || code == Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v = result(tmp.path());
        assert_eq!(v["experiment"], args[0]);
        assert!(!v["claim"].as_str().unwrap().is_empty(), "{args:?}");
        assert_eq!(v["schema_version"], "cohlab.result/1");
    }
}
