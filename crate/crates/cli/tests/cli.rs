use std::path::Path;
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spectemp"));
    c.env_remove("SPECTEMP_THREADS");
    c
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A six-trial-per-class dataset shared by the tests.
fn dataset() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        run_ok(&[
            "gen",
            "--seed",
            "42",
            "--trials",
            "6",
            "--out",
            p(&dir.path().join("data")),
        ]);
        dir
    })
    .path()
}

fn data() -> String {
    p(&dataset().join("data")).to_string()
}

#[test]
fn gen_writes_manifest_and_tagged_csv() {
    let m: Value =
        serde_json::from_str(&std::fs::read_to_string(dataset().join("data/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["signals"].as_array().unwrap().len(), 30);
    assert_eq!(m["seed"], 42);
    let csv = std::fs::read_to_string(dataset().join("data/signals/mass_pos2_003.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next(), Some("t,u"));
    let echo: Value =
        serde_json::from_str(&std::fs::read_to_string(dataset().join("data/genconfig.json")).unwrap()).unwrap();
    assert_eq!(echo["n_trials"], 6);
}

#[test]
fn tau_json_schema() {
    let dir = tempfile::tempdir().unwrap();
    let tau = dir.path().join("tau.json");
    run_ok(&["tau", "--in", &data(), "--out", p(&tau)]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&tau).unwrap()).unwrap();
    let classes = doc["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 5);
    for c in classes {
        for key in ["nyquist_dt_s", "best_tau_s", "knee_tau_s", "s_star"] {
            assert!(c[key].as_f64().unwrap() > 0.0, "{key}");
        }
        assert!(!c["curve"].as_array().unwrap().is_empty());
    }
    assert!(doc["tau_common_best"].as_f64().unwrap() > 0.0);
    assert!(doc["tau_common_knee"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("tau_curves.csv").exists());
}

#[test]
fn run_rows_are_models_times_folds_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        run_ok(&[
            "run",
            "--in",
            &data(),
            "--out",
            p(out),
            "--method",
            "sta",
            "--tau",
            "0.02",
            "--models",
            "softmax,gnb",
        ]);
    }
    let results = std::fs::read_to_string(a.join("results.csv")).unwrap();
    let rows: Vec<&str> = results.lines().skip(2).collect();
    assert_eq!(rows.len(), 2 * 5);
    assert!(rows.iter().all(|r| r.contains(",STA(0.02),")));
    for f in ["results.csv", "summary.csv", "stability.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }

    let rep = run_ok(&[
        "report",
        "--in",
        p(&a.join("results.csv")),
        "--out",
        p(&dir.path().join("r")),
    ]);
    let stdout = String::from_utf8(rep.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("ranking: STA(0.02)")));
    assert!(dir.path().join("r/stability.json").exists());
}

#[test]
fn features_export_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "features",
        "--in",
        &data(),
        "--out",
        p(dir.path()),
        "--tau",
        "0.01",
        "--format",
        "json",
    ]);
    let feats: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("features.json")).unwrap()).unwrap();
    let row = &feats["rows"][0];
    for k in ["source_id", "window_index", "z1", "z6"] {
        assert!(!row[k].is_null(), "{k}");
    }
    let spec: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrogram.json")).unwrap()).unwrap();
    assert!(!spec["rows"][0]["b99"].is_null());
    assert!(spec["rows"][0]["b100"].is_null());
    let means: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("feature_means.json")).unwrap()).unwrap();
    assert_eq!(means["classes"].as_array().unwrap().len(), 5);
}

#[test]
fn build_bundle_shape() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "build",
        "--in",
        &data(),
        "--out",
        p(dir.path()),
        "--method",
        "hstf",
        "--tau",
        "0.02",
    ]);
    let info: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("dataset.json")).unwrap()).unwrap();
    let (m, d) = (
        info["sample_shape"][0].as_u64().unwrap(),
        info["sample_shape"][1].as_u64().unwrap(),
    );
    assert_eq!(d, info["window_len"].as_u64().unwrap() + 6);
    assert_eq!(info["n_samples"], 30);
    let csv = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    let header = csv.lines().nth(1).unwrap();
    assert_eq!(header.split(',').count() as u64, d + 3);
    assert_eq!(csv.lines().count() as u64, 2 + 30 * m);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin()
        .args([
            "tau",
            "--in",
            p(&dir.path().join("nope")),
            "--out",
            p(&dir.path().join("t.json")),
        ])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"window": {"alpha": 0.7}}"#).unwrap();
    let bad = bin()
        .args([
            "--config",
            p(&cfg),
            "tau",
            "--in",
            &data(),
            "--out",
            p(&dir.path().join("t.json")),
        ])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));

    let flag = bin()
        .args(["run", "--in", &data(), "--out", "x", "--method", "lstm"])
        .output()
        .unwrap();
    assert_eq!(flag.status.code(), Some(2));

    let junk = dir.path().join("junk");
    std::fs::create_dir(&junk).unwrap();
    std::fs::write(junk.join("manifest.json"), "{not json").unwrap();
    let runtime = bin()
        .args(["tau", "--in", p(&junk), "--out", p(&dir.path().join("t.json"))])
        .output()
        .unwrap();
    assert_eq!(runtime.status.code(), Some(1));
    assert!(!dir.path().join("t.json").exists());
}

#[test]
fn threads_flag_and_env() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "--threads",
        "1",
        "gen",
        "--trials",
        "2",
        "--out",
        p(&dir.path().join("a")),
    ]);
    let out = bin()
        .env("SPECTEMP_THREADS", "2")
        .args(["gen", "--trials", "2", "--out", p(&dir.path().join("b"))])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("a/manifest.json")).unwrap(),
        std::fs::read(dir.path().join("b/manifest.json")).unwrap()
    );
}
