//! End-to-end tests of the `mtscale` binary: command wiring, artifact
//! layout, determinism, and the exit-code contract (0 success, 2 usage or
//! config error, 3 numeric abort, 4 gradient-check failure).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mtscale"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// A config kept tiny so CLI tests run in milliseconds.
fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("config.json");
    let json = format!(
        r#"{{
            "n_io": 2, "n_cf": 10, "n_cs": 3, "tau_f": 1.0, "tau_s": 20.0,
            "eta": 1e-4, "threshold": 1e-3, "max_iteration": 3, "epochs": 2,
            "alpha": 0.9, "seed": 12{extra}
        }}"#
    );
    std::fs::write(&path, json).unwrap();
    path
}

fn gen_case1_dir(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    let out = run(&["gen-data", "--case1", "--out", data.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    data
}

#[test]
fn gen_data_case1_is_deterministic_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = run(&["gen-data", "--case1", "--out", d.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["pattern_1.csv", "pattern_2.csv", "manifest.json"] {
        let fa = std::fs::read(a.join(name)).unwrap();
        let fb = std::fs::read(b.join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between reruns");
    }
}

#[test]
fn gen_data_multimodal_honors_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("mm");
    let out = run(&[
        "gen-data",
        "--multimodal",
        "--seqs",
        "4",
        "--seq-len",
        "30",
        "--seed",
        "9",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest = std::fs::read_to_string(data.join("manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["sequences"].as_array().unwrap().len(), 4);
    assert_eq!(v["sequences"][0]["t"], 30);
    assert_eq!(v["sequences"][0]["d"], 43);
}

#[test]
fn gen_data_requires_exactly_one_generator() {
    let dir = tempfile::tempdir().unwrap();
    let out_arg = dir.path().join("x");
    // Neither generator.
    let out = run(&["gen-data", "--out", out_arg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    // Both generators.
    let out = run(&[
        "gen-data",
        "--case1",
        "--multimodal",
        "--out",
        out_arg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    // Multimodal-only flag with case1.
    let out = run(&[
        "gen-data",
        "--case1",
        "--seqs",
        "3",
        "--out",
        out_arg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn train_writes_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_case1_dir(dir.path());
    let cfg = small_config(dir.path(), "");
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for o in [&out1, &out2] {
        let out = run(&[
            "train",
            "--config",
            cfg.to_str().unwrap(),
            "--cell",
            "mtrnn",
            "--data",
            data.to_str().unwrap(),
            "--out",
            o.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for f in ["config.json", "log.csv", "curve.csv", "checkpoint.bin", "report.json"] {
        assert!(out1.join(f).exists(), "{f} missing");
    }
    // Same config + data + seed → identical weights and identical curves.
    let c1 = std::fs::read(out1.join("checkpoint.bin")).unwrap();
    let c2 = std::fs::read(out2.join("checkpoint.bin")).unwrap();
    assert_eq!(c1, c2);
    let v1 = std::fs::read_to_string(out1.join("curve.csv")).unwrap();
    let v2 = std::fs::read_to_string(out2.join("curve.csv")).unwrap();
    assert_eq!(v1, v2);
}

#[test]
fn train_requires_a_cell_kind_from_flag_or_config() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_case1_dir(dir.path());
    let cfg = small_config(dir.path(), "");
    let out_dir = dir.path().join("run");
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cell"), "{}", stderr(&out));

    // The config can carry it instead of the flag.
    let cfg2 = small_config(dir.path(), r#", "cell_kind": "mtgru""#);
    let out = run(&[
        "train",
        "--config",
        cfg2.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn invalid_usage_and_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_case1_dir(dir.path());
    let cfg = small_config(dir.path(), "");

    // Unknown subcommand / flag → clap usage error.
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["train", "--no-such-flag"])), 2);

    // --epochs 0 fails validation.
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--cell",
        "mtrnn",
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("r").to_str().unwrap(),
        "--epochs",
        "0",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("epochs"), "{}", stderr(&out));

    // Unknown config key is rejected by name.
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"n_io": 2, "n_cf": 10, "n_cs": 3, "tau_f": 1.0, "tau_s": 20.0,
           "eta": 1e-4, "threshold": 1e-3, "max_iteration": 3, "epochs": 2,
           "alpha": 0.9, "seed": 12, "learninrate": 0.5}"#,
    )
    .unwrap();
    let out = run(&[
        "train",
        "--config",
        bad.to_str().unwrap(),
        "--cell",
        "mtrnn",
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("r").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("learninrate"), "{}", stderr(&out));

    // Missing data directory.
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--cell",
        "mtrnn",
        "--data",
        dir.path().join("nope").to_str().unwrap(),
        "--out",
        dir.path().join("r").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn env_seed_override_is_applied_and_logged() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_case1_dir(dir.path());
    let cfg = small_config(dir.path(), "");
    let out_dir = dir.path().join("run");
    let out = bin()
        .args([
            "train",
            "--config",
            cfg.to_str().unwrap(),
            "--cell",
            "mtrnn",
            "--data",
            data.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .env("MTSCALE_SEED", "4242")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("MTSCALE_SEED"), "{}", stdout(&out));
    assert!(stdout(&out).contains("4242"));
    // The effective config records the overridden seed.
    let written = std::fs::read_to_string(out_dir.join("config.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["seed"], 4242);

    // A malformed value is a config error.
    let out = bin()
        .args([
            "train",
            "--config",
            cfg.to_str().unwrap(),
            "--cell",
            "mtrnn",
            "--data",
            data.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .env("MTSCALE_SEED", "not-a-seed")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn compare_emits_both_arms_and_a_joint_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_case1_dir(dir.path());
    let cfg = small_config(dir.path(), "");
    let out_dir = dir.path().join("cmp");
    let out = run(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--serial",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("time ratio"));
    let report = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(v["time_ratio"].as_f64().unwrap() > 0.0);
    assert_eq!(v["mtrnn"]["cell_kind"], "mtrnn");
    assert_eq!(v["mtgru"]["cell_kind"], "mtgru");
    for arm in ["mtrnn", "mtgru"] {
        assert!(out_dir.join(arm).join("checkpoint.bin").exists());
        assert!(out_dir.join(arm).join("plots").join("cs_pca.csv").exists());
    }
}

#[test]
fn grad_check_passes_on_a_fresh_build() {
    let out = run(&["grad-check", "--cell", "both", "--coords", "40"]);
    assert_eq!(code(&out), 0, "{}\n{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn grad_check_rejects_bad_epsilon() {
    assert_eq!(code(&run(&["grad-check", "--eps", "0"])), 2);
    assert_eq!(code(&run(&["grad-check", "--eps", "-1e-5"])), 2);
    assert_eq!(code(&run(&["grad-check", "--coords", "0"])), 2);
}

#[test]
fn corrupted_backward_fails_grad_check_with_worst_coordinate() {
    let out = run(&[
        "grad-check",
        "--cell",
        "mtrnn",
        "--coords",
        "10",
        "--self-test-corrupt",
    ]);
    assert_eq!(code(&out), 4);
    let text = stdout(&out);
    assert!(text.contains("FAIL"), "{text}");
    // The worst offending coordinate is printed with block and index.
    assert!(text.contains("worst coordinate"), "{text}");
    assert!(text.contains('['), "{text}");
}

#[test]
fn analyze_exports_requested_kind_and_validates_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_case1_dir(dir.path());
    let cfg = small_config(dir.path(), "");
    let run_dir = dir.path().join("run");
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--cell",
        "mtgru",
        "--data",
        data.to_str().unwrap(),
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let ckpt = run_dir.join("checkpoint.bin");
    let pca_dir = dir.path().join("pca");
    let out = run(&[
        "analyze",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--kind",
        "context_pca",
        "--out",
        pca_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(pca_dir.join("cf_pca.csv").exists());
    assert!(pca_dir.join("cs_pca.csv").exists());

    // Unknown kind names the valid ones; missing checkpoint is a config error.
    let out = run(&[
        "analyze",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--kind",
        "scatter3d",
        "--out",
        pca_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("context_pca"), "{}", stderr(&out));
    let out = run(&[
        "analyze",
        "--checkpoint",
        dir.path().join("gone.bin").to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--kind",
        "context_pca",
        "--out",
        pca_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn flag_overrides_beat_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_case1_dir(dir.path());
    // Config points data/out elsewhere; flags win.
    let cfg = small_config(
        dir.path(),
        r#", "cell_kind": "mtrnn", "data": "/nonexistent", "out": "/nonexistent""#,
    );
    let out_dir = dir.path().join("real_out");
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--epochs",
        "1",
        "--seed",
        "77",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let written = std::fs::read_to_string(out_dir.join("config.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["epochs"], 1);
    assert_eq!(v["seed"], 77);
}
