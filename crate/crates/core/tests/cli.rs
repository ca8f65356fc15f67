use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use covbvm::cli::main_with_args;
use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("covbvm").chain(args.iter().copied()))
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn first_line(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

/// Writes a small posterior config so tests stay fast.
fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{"schema": 1, "p": 2, "n": 300, "truth": "identity",
            "functional": {{"kind": "entry", "i": 1, "j": 2, "target": "cov"}},
            "prior": {{"kind": "wishart", "b": 3}}, "n_draws": 500, "seed": 1{extra}}}"#
    );
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn posterior_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let out = tmp.path().join("out");
    assert_eq!(run(&["posterior", "--config", cfg.to_str().unwrap(), "--seed", "4", "--out", out.to_str().unwrap()]), 0);

    let report = json(out.join("report.json"));
    assert_eq!(report["command"], "posterior");
    assert_eq!(report["result"]["n_draws"], 500);
    assert_eq!(report["config"]["seed"], 4);
    assert!(report["result"]["ks"].as_f64().unwrap() < 1.0);

    assert_eq!(first_line(out.join("standardized.csv")), "index,value");
    assert_eq!(fs::read_to_string(out.join("standardized.csv")).unwrap().lines().count(), 501);
    assert_eq!(first_line(out.join("qq.csv")), "theoretical,empirical");
    assert_eq!(first_line(out.join("hist.csv")), "lo,hi,count,density,normal_density");
    assert_eq!(fs::read_to_string(out.join("hist.csv")).unwrap().lines().count(), 33);

    let manifest = json(out.join("manifest.json"));
    assert_eq!(manifest["command"], "posterior");
    assert_eq!(manifest["seed"], 4);
    let hash = manifest["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(manifest["versions"]["covbvm"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn format_selects_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&["posterior", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--format", "json"]), 0);
    assert!(a.join("report.json").exists() && !a.join("standardized.csv").exists());
    assert_eq!(run(&["posterior", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--format", "csv"]), 0);
    assert!(!b.join("report.json").exists() && b.join("standardized.csv").exists());
    assert!(b.join("manifest.json").exists());
}

#[test]
fn seed_override_changes_draws_and_thread_count_does_not() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#", "replications": 20"#);
    let c = cfg.to_str().unwrap();
    let dirs: Vec<PathBuf> = (0..3).map(|k| tmp.path().join(k.to_string())).collect();
    assert_eq!(run(&["coverage", "--config", c, "--out", dirs[0].to_str().unwrap(), "--threads", "1"]), 0);
    assert_eq!(run(&["coverage", "--config", c, "--out", dirs[1].to_str().unwrap(), "--threads", "3"]), 0);
    assert_eq!(run(&["coverage", "--config", c, "--out", dirs[2].to_str().unwrap(), "--seed", "2"]), 0);
    let read = |d: &PathBuf| fs::read(d.join("report.json")).unwrap();
    assert_eq!(read(&dirs[0]), read(&dirs[1]));
    assert_ne!(read(&dirs[0]), read(&dirs[2]));
    assert_eq!(json(dirs[1].join("manifest.json"))["threads"], 3);
    assert_eq!(first_line(dirs[0].join("replications.csv")), "replication,center,lo,hi,truth_value,covered,ks");
}

#[test]
fn bad_config_produces_error_record() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#", "alpha": 1.5"#);
    let out = tmp.path().join("out");
    assert_eq!(run(&["posterior", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 2);
    let record = json(out.join("error.json"));
    assert_eq!(record["error"]["kind"], "ConfigParse");
    assert_eq!(record["error"]["field"], "alpha");

    let cfg = small_config(tmp.path(), r#", "colour": 1"#);
    assert_eq!(run(&["posterior", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 2);
    assert!(json(out.join("error.json"))["error"]["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn eigengap_too_small_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("config.json");
    fs::write(
        &path,
        r#"{"schema": 1, "n": 500, "truth": {"diag": [2.0, 1.95, 1.0]},
            "functional": {"kind": "eigenvalue", "m": 1, "target": "cov"},
            "prior": {"kind": "wishart", "b": 3}}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&["posterior", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]), 1);
    assert_eq!(json(out.join("error.json"))["error"]["kind"], "ZeroEigengap");
}

#[test]
fn bad_arguments_exit_with_usage_status() {
    assert_eq!(run(&["nonsense"]), 2);
    assert_eq!(run(&["posterior"]), 2);
    assert_eq!(run(&["posterior", "--config", "x.json", "--format", "xml"]), 2);
}

#[test]
fn regimes_table_lists_every_row() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run(&["regimes", "--config", config("regimes.json").to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let csv = fs::read_to_string(out.join("regimes.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "functional,column,required,satisfied");
    assert_eq!(csv.lines().count(), 28);
}

#[test]
fn kato_and_expansion_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (k, e) = (tmp.path().join("kato"), tmp.path().join("expand"));
    assert_eq!(run(&["kato", "--config", config("kato.json").to_str().unwrap(), "--out", k.to_str().unwrap()]), 0);
    assert_eq!(first_line(k.join("terms.csv")), "order,term,partial_sum");
    assert_eq!(run(&["expand-check", "--config", config("expand_check.json").to_str().unwrap(), "--out", e.to_str().unwrap()]), 0);
    let csv = fs::read_to_string(e.join("expansion.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,lhs,rhs,linear,quadratic,remainder,abs_error");
    for line in csv.lines().skip(1) {
        let abs_error: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(abs_error < 1e-8);
    }
}

#[test]
fn binary_reports_errors_on_stderr() {
    let tmp = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_covbvm"))
        .args(["posterior", "--config", "does-not-exist.json", "--out"])
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let record: Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(record["error"]["field"], "config");
}
