use std::fs;
use std::path::Path;

use dlab_core::lattice::read_snapshot;
use dlab_harness::config::{parse_config, Override};
use dlab_harness::error::exit;
use dlab_harness::runner::{read_manifest, run_in, verify_manifest, RunStatus, MANIFEST_FILE};
use dlab_harness::{parse_config_with, HarnessError, RunConfig};

fn fixture(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name);
    parse_config(&fs::read_to_string(path).unwrap(), false).unwrap()
}

fn small(text_overrides: &[Override]) -> RunConfig {
    let base = "[model]\nkind = \"inls\"\nN = 1\nb = \"1/4\"\nq = \"3\"\n\
                [lattice]\nL = \"40\"\nn = 256\n[time]\nt1 = \"1/2\"\ndt = \"1/100\"\nsnapshots = 3\n";
    parse_config_with(base, text_overrides, false).unwrap()
}

#[test]
fn linear_sanity_conserves_mass() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_in(&fixture("linear_sanity.toml"), dir.path()).unwrap();
    let s = m.summary.unwrap();
    assert!(s.mass_drift <= 1e-12, "mass drift {}", s.mass_drift);
    assert_eq!(m.status, RunStatus::Complete);
    let stats = fs::read_to_string(dir.path().join("stats.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(stats.lines().next().unwrap()).unwrap();
    for key in ["t", "mass", "energy", "grad_norm"] {
        assert!(first.get(key).is_some(), "{key}");
    }
}

#[test]
fn identical_configs_give_identical_hashes() {
    let cfg = small(&[]);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = run_in(&cfg, a.path()).unwrap();
    let mb = run_in(&cfg, b.path()).unwrap();
    assert_eq!(ma.config_digest, mb.config_digest);
    assert!(!ma.files.is_empty());
    assert_eq!(ma.files, mb.files);
}

#[test]
fn manifest_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    run_in(&small(&[]), dir.path()).unwrap();
    assert!(verify_manifest(dir.path()).unwrap().is_empty());
    let target = dir.path().join("snapshots/snap_00001.dlab");
    let mut bytes = fs::read(&target).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    fs::write(&target, bytes).unwrap();
    assert_eq!(
        verify_manifest(dir.path()).unwrap(),
        vec!["snapshots/snap_00001.dlab".to_string()]
    );
}

#[test]
fn snapshots_round_trip_and_match_times() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_in(&small(&[]), dir.path()).unwrap();
    let times: Vec<f64> =
        serde_json::from_slice(&fs::read(dir.path().join("snapshots/times.json")).unwrap())
            .unwrap();
    assert_eq!(times, vec![0.0, 0.25, 0.5]);
    let f = read_snapshot(fs::File::open(dir.path().join("snapshots/snap_00002.dlab")).unwrap())
        .unwrap();
    assert_eq!(f.values().len(), 256);
    assert_eq!(m.summary.unwrap().snapshots, 3);
}

#[test]
fn cauchy_table_is_crlf_csv() {
    let dir = tempfile::tempdir().unwrap();
    run_in(&small(&[]), dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("cauchy.csv")).unwrap();
    assert!(text.starts_with("index,t_start,t_end,increment\r\n"));
    assert_eq!(text.matches("\r\n").count(), 3);
}

#[test]
fn file_initial_condition_restarts_a_run() {
    let dir = tempfile::tempdir().unwrap();
    run_in(&small(&[]), dir.path()).unwrap();
    let snap = dir.path().join("snapshots/snap_00002.dlab");
    let o = [
        Override::text("initial", "kind", "file"),
        Override::text("initial", "path", snap.display().to_string()),
    ];
    let second = tempfile::tempdir().unwrap();
    let m = run_in(&small(&o), second.path()).unwrap();
    assert_eq!(m.status, RunStatus::Complete);
}

#[test]
fn noisy_initial_condition_depends_only_on_seed() {
    let o = [Override::text("initial", "kind", "noisy-gaussian")];
    let cfg = small(&o);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ha = run_in(&cfg, a.path()).unwrap().files;
    let hb = run_in(&cfg, b.path()).unwrap().files;
    assert_eq!(ha, hb);
    let mut other = cfg.clone();
    other.seed = 7;
    let c = tempfile::tempdir().unwrap();
    assert_ne!(run_in(&other, c.path()).unwrap().files[0], ha[0]);
}

#[test]
fn non_finite_failure_leaves_partial_manifest() {
    let huge = format!("1{}", "0".repeat(200));
    let cfg = small(&[Override::text("initial", "amplitude", huge)]);
    let dir = tempfile::tempdir().unwrap();
    let err = run_in(&cfg, dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), exit::NON_FINITE);
    match &err {
        HarnessError::RunFailed { manifest, .. } => assert!(manifest.ends_with(MANIFEST_FILE)),
        other => panic!("unexpected {other:?}"),
    }
    let m = read_manifest(dir.path()).unwrap();
    assert_eq!(m.status, RunStatus::Partial);
    assert!(m.error.unwrap().contains("finite"));
}
