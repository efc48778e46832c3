use std::path::Path;
use std::process::{Command, Output};

fn dlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlab"))
        .args(args)
        .output()
        .unwrap()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn classify_valid_tuple_prints_report_and_json() {
    let out = dlab(&[
        "classify", "--model", "inls", "--N", "1", "--b", "0.25", "--q", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json_line = stdout.lines().rfind(|l| l.starts_with('{')).unwrap();
    let v: serde_json::Value = serde_json::from_str(json_line).unwrap();
    assert_eq!(v["params"]["b"], "1/4");
}

#[test]
fn classify_lists_one_record_per_tuple() {
    let out = dlab(&["classify", "--b", "1/4", "--q", "2,3,4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn classify_invalid_tuple_exits_2() {
    let out = dlab(&[
        "classify", "--model", "inlh", "--N", "1", "--alpha", "1", "--b", "1/8", "--q", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_non_finite_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let huge = format!("1{}", "0".repeat(200));
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        format!("[model]\nkind = \"inls\"\nb = \"1/4\"\nq = \"3\"\n[lattice]\nn = 64\n[initial]\namplitude = \"{huge}\"\n"),
    )
    .unwrap();
    let out = dlab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--t1",
        "1/10",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn run_fixture_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dlab(&[
        "run",
        "--config",
        &fixture("linear_sanity.toml"),
        "--n",
        "128",
        "--t1",
        "1/2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(m["config"]["lattice"]["n"], 128);
    assert_eq!(m["status"], "complete");
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[model]\nkind = \"inls\"\nb = 0.25\nq = \"3\"\n").unwrap();
    let out = dlab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn sweep_reads_worker_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--config",
        &fixture("linear_sanity.toml"),
        "--q-list",
        "2,3",
        "--classify-only",
        "--format",
        "jsonl",
        "--out",
        dir.path().to_str().unwrap(),
    ];
    let bad = Command::new(env!("CARGO_BIN_EXE_dlab"))
        .args(args)
        .env("DLAB_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_dlab"))
        .args(args)
        .env("DLAB_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("sweep.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn unknown_suite_exits_2() {
    assert_eq!(dlab(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn failing_pcheck_exits_4() {
    // Far too coarse a lattice to resolve the transformed state.
    let out = dlab(&["pcheck", "--n", "64"]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
