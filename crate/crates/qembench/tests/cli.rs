//! CLI contract: config validation, exit codes, resume behavior, and the
//! shape of the emitted files.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qembench")
}

fn dataset_path() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/iris.csv")
        .to_str()
        .unwrap()
        .to_string()
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qembench_cli_{tag}_{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body.replace("DATASET", &dataset_path())).unwrap();
    path
}

fn small_config(dir: &Path) -> PathBuf {
    write_config(
        dir,
        r#"{
            "dataset": "DATASET",
            "noise_kinds": ["bit_flip"],
            "noise_levels": [0.0, 0.1],
            "mitigations": [{"kind": "none"}],
            "repetitions": 1,
            "epochs": 1
        }"#,
    )
}

#[test]
fn validate_config_reports_default_grid_size() {
    let dir = tmp_dir("validate");
    let config = write_config(&dir, "{}");
    let out = Command::new(bin())
        .args(["validate-config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("128 configurations, 384 runs"),
        "unexpected: {stdout}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_config_exits_with_code_1() {
    let dir = tmp_dir("invalid");
    // PEC without depolarizing noise in the grid.
    let config = write_config(
        &dir,
        r#"{"noise_kinds": ["bit_flip"], "mitigations": [{"kind": "pec"}]}"#,
    );
    let out = Command::new(bin())
        .args(["validate-config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pec"));

    // Unknown fields are rejected too.
    let config = write_config(&dir, r#"{"nois_kinds": ["bit_flip"]}"#);
    let out = Command::new(bin())
        .args(["validate-config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn run_emits_store_csv_summary_and_manifest() {
    let dir = tmp_dir("run");
    let config = small_config(&dir);
    let out_dir = dir.join("out");
    let out = Command::new(bin())
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--parallel",
            "2",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for file in [
        "results.ndjson",
        "results.csv",
        "summary.csv",
        "summary.txt",
        "split_manifest.json",
        "config.json",
    ] {
        assert!(out_dir.join(file).exists(), "{file} missing");
    }
    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "config_id,noise_kind,p,mitigation,repetition,seed,epoch,train_acc,val_acc,train_loss,val_loss,wall_time_s,eval_count,status"
    );
    // 2 runs x 1 epoch
    assert_eq!(csv.lines().count(), 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn rerunning_without_resume_is_refused_and_resume_skips_done_runs() {
    let dir = tmp_dir("resume");
    let config = small_config(&dir);
    let out_dir = dir.join("out");
    let run = |extra: &[&str]| {
        let mut args = vec![
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        Command::new(bin()).args(&args).output().unwrap()
    };
    assert!(run(&[]).status.success());
    // Plain rerun refuses to clobber the store.
    assert_eq!(run(&[]).status.code(), Some(1));
    // Resume executes nothing new but succeeds.
    let out = run(&["--resume"]);
    assert!(out.status.success());
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("0 to execute"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn summarize_and_plot_consume_the_store() {
    let dir = tmp_dir("plot");
    let config = small_config(&dir);
    let out_dir = dir.join("out");
    assert!(Command::new(bin())
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap()
        .status
        .success());

    let out = Command::new(bin())
        .args(["summarize", "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("bit_flip"));

    let out = Command::new(bin())
        .args(["plot", "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out_dir.join("accuracy_bit_flip.svg").exists());
    assert!(out_dir.join("accuracy_baseline.svg").exists());

    let out = Command::new(bin())
        .args(["plot", "--out", out_dir.to_str().unwrap(), "--data-only"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out_dir.join("accuracy_bit_flip.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn summarize_and_plot_fail_cleanly_on_empty_store() {
    let dir = tmp_dir("empty");
    for sub in ["summarize", "plot"] {
        let out = Command::new(bin())
            .args([sub, "--out", dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(1), "{sub} on empty store");
        assert!(String::from_utf8_lossy(&out.stderr).contains("no records"));
    }
    std::fs::remove_dir_all(&dir).ok();
}
