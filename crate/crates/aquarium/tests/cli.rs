use std::path::Path;
use std::process::{Command, Output};

use aquarium::export::read_metrics_csv;
use aquarium::export::MetricsRow;

fn aquarium(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aquarium")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = aquarium(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn rows(path: &Path) -> Vec<MetricsRow> {
    read_metrics_csv(std::fs::File::open(path).unwrap()).unwrap()
}

fn count(rows: &[MetricsRow], kind: &str) -> usize {
    rows.iter().filter(|r| r.agent_kind == kind).count()
}

#[test]
fn unknown_config_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "fish_number = 3\nshark_speed = 9\n").unwrap();
    let out = aquarium(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("shark_speed"));

    let out = aquarium(&["run", "--shark-speed", "9"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("shark-speed"));
}

#[test]
fn bad_value_is_rejected() {
    let out = aquarium(&["run", "--fish-number", "many"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fish_number"));
}

#[test]
fn run_writes_one_row_per_seed_episode_and_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["run", "--seed", "1,2,3,4,5", "--episodes", "20", "--max-timesteps", "40", "--out", out]);
    let rows = rows(&dir.path().join("metrics/metrics.csv"));
    assert_eq!(count(&rows, "predator"), 100);
    assert_eq!(count(&rows, "prey"), 100);
    let config = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert!(config.starts_with("# fingerprint = "));
    assert!(config.contains("max_timesteps = 40"));

    let again = tempfile::tempdir().unwrap();
    ok(&["run", "--seed", "1,2,3,4,5", "--episodes", "20", "--max-timesteps", "40", "--out", again.path().to_str().unwrap()]);
    assert_eq!(
        std::fs::read(dir.path().join("metrics/metrics.csv")).unwrap(),
        std::fs::read(again.path().join("metrics/metrics.csv")).unwrap()
    );
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "fish_number = 3\nmax_timesteps = 500\n").unwrap();
    let out = dir.path().join("out");
    ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--max-timesteps",
        "20",
        "--log",
        "--out",
        out.to_str().unwrap(),
    ]);
    let written = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(written.contains("fish_number = 3"));
    assert!(written.contains("max_timesteps = 20"));
    let log = std::fs::read_dir(out.join("logs")).unwrap().count();
    assert_eq!(log, 1);
}

#[test]
fn train_then_eval_with_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let train_out = dir.path().join("train");
    ok(&[
        "train",
        "--mode",
        "ps",
        "--seed",
        "3",
        "--episodes",
        "2",
        "--episode-length",
        "60",
        "--batch-size",
        "64",
        "--checkpoint-every",
        "1",
        "--fish-number",
        "3",
        "--out",
        train_out.to_str().unwrap(),
    ]);
    let ckpts = train_out.join("checkpoints/seed3");
    for name in ["episode_000001.ckpt", "episode_000002.ckpt", "final.ckpt"] {
        assert!(ckpts.join(name).exists(), "{name}");
    }
    let curve = rows(&train_out.join("metrics/learning_curve.csv"));
    assert_eq!(count(&curve, "prey"), 2);

    let ckpt = ckpts.join("final.ckpt");
    let eval_out = dir.path().join("eval");
    ok(&[
        "eval",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--greedy",
        "--seed",
        "8",
        "--episodes",
        "3",
        "--max-timesteps",
        "50",
        "--fish-number",
        "3",
        "--out",
        eval_out.to_str().unwrap(),
    ]);
    let evals = rows(&eval_out.join("metrics/metrics.csv"));
    assert_eq!(count(&evals, "prey"), 3);

    // A checkpoint also works as a prey policy for `run`.
    let run_out = dir.path().join("run");
    ok(&[
        "run",
        "--prey-policy",
        ckpt.to_str().unwrap(),
        "--max-timesteps",
        "30",
        "--fish-number",
        "3",
        "--out",
        run_out.to_str().unwrap(),
    ]);

    // Different observation shape.
    let out = aquarium(&[
        "eval",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--observed-fish-number",
        "4",
        "--fish-number",
        "3",
        "--out",
        dir.path().join("bad").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("observation"), "{err}");
}

#[test]
fn il_training_keeps_a_net_per_slot() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "train",
        "--mode",
        "il",
        "--episodes",
        "1",
        "--episode-length",
        "40",
        "--batch-size",
        "32",
        "--fish-number",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let ck = aquarium::checkpoint::Checkpoint::load(&dir.path().join("checkpoints/seed0/final.ckpt")).unwrap();
    assert_eq!(ck.policies.len(), 2);
}

#[test]
fn render_exports_frames_from_a_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&["run", "--seed", "5", "--max-timesteps", "12", "--log", "--out", out.to_str().unwrap()]);
    let log = out.join("logs/seed5_ep0.jsonl");
    let frames = dir.path().join("frames");
    ok(&["render", "--log", log.to_str().unwrap(), "--out", frames.to_str().unwrap(), "--all-overlays"]);
    let ppm = std::fs::read_dir(&frames)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "ppm"))
        .count();
    assert_eq!(ppm, 12);
    assert!(frames.join("manifest.txt").exists());
}

#[test]
fn lv_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["lv", "--steps", "100", "--out", dir.path().to_str().unwrap()]);
    let text = std::fs::read_to_string(dir.path().join("lv.csv")).unwrap();
    assert_eq!(text.lines().count(), 102);
    assert!(text.starts_with("t,prey,predators"));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = aquarium(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
