use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use schonmann_lab::manifest::sha256_hex;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schonmann-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn duality_prints_fixed_point_without_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d");
    let o = lab(&["duality", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0.5857864376269049"));
    let csv = fs::read_to_string(out.join("duality.csv")).unwrap();
    assert!(csv.starts_with("beta,dual_beta,p,dual_p\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn stochastic_experiment_requires_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(&["theta", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn unknown_key_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "beta = 0.7\n# comment\nbogus = 3\n");
    let o = lab(&["theta", "--config", &cfg, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn experiment_mismatch_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "experiment = vark\nseed = 3\n");
    let o = lab(&["theta", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("vark"), "{}", stderr(&o));
}

#[test]
fn failed_check_exits_two() {
    // Every gap lies beyond the box, so the curve is identically zero and
    // cannot be decreasing.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "box = 2\ngaps = 8,16\nsamples = 100\nbatches = 10\n");
    let out = tmp.path().join("m");
    let o = lab(&["phi-mixing", "--config", &cfg, "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL decreasing-curve"));
}

#[test]
fn manifest_checksums_match_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "beta = 0.8\nn = 1\nladder = 2,4\nbox = 6\nsamples = 400\nbatches = 10\n");
    let out = tmp.path().join("c");
    let o = lab(&["two-sided-probe", "--config", &cfg, "--seed", "9", "--out", out.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 9);
    let files = m["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        let name = f["name"].as_str().unwrap();
        let bytes = fs::read(out.join(name)).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    }
}

#[test]
fn output_independent_of_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "box = 8\ngaps = 2,4\nsamples = 2000\nchains = 4\n");
    let mut sums = Vec::new();
    for w in ["1", "3"] {
        let out = tmp.path().join(format!("w{w}"));
        let o = lab(&[
            "cone-mixing", "--config", &cfg, "--seed", "77", "--workers", w, "--out", out.to_str().unwrap(),
        ]);
        assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
        sums.push(sha256_hex(&fs::read(out.join("mixing.csv")).unwrap()));
    }
    assert_eq!(sums[0], sums[1]);
}
