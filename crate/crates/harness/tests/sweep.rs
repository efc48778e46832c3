use std::fs;

use dlab_core::regime::{int, ratio, Rational};
use dlab_harness::config::parse_config;
use dlab_harness::sweep::{parse_q_list, parse_q_range, sweep, RowStatus};
use dlab_harness::table::{export_table, read_csv, read_jsonl, TableFormat, COLUMNS};
use dlab_harness::RunConfig;

fn base(amplitude: &str) -> RunConfig {
    let text = format!(
        "[model]\nkind = \"inls\"\nN = 1\nb = \"1/4\"\nq = \"3\"\n[lattice]\nL = \"40\"\nn = 128\n\
         [time]\nt1 = \"1/5\"\ndt = \"1/100\"\nsnapshots = 3\n[initial]\namplitude = \"{amplitude}\"\n"
    );
    parse_config(&text, false).unwrap()
}

#[test]
fn label_flips_exactly_at_split() {
    // Split at 1 + (2 - 2b)/N = 5/2 for N = 1, b = 1/4.
    let eps = ratio(1, 1_000_000_000);
    let split = ratio(5, 2);
    let qs: Vec<Rational> = vec![&split - &eps, split.clone(), &split + &eps];
    let dir = tempfile::tempdir().unwrap();
    let report = sweep(&base("1"), &qs, dir.path(), 2, false, true).unwrap();
    let labels: Vec<_> = report
        .rows
        .iter()
        .map(|r| r.label.clone().unwrap())
        .collect();
    assert_eq!(labels, ["NonScattering", "Scattering", "Scattering"]);
    assert_eq!(report.rows[1].q, "5/2");
    assert!(report.rows.iter().all(|r| r.run_dir.is_none()));
}

#[test]
fn empty_list_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = sweep(&base("1"), &[], dir.path(), 1, false, false).unwrap();
    assert!(report.rows.is_empty());
    let path = dir.path().join("t.csv");
    export_table(&report, TableFormat::Csv, &path).unwrap();
    assert!(read_csv(&path).unwrap().is_empty());
    assert!(parse_q_list("").unwrap().is_empty());
}

#[test]
fn duplicates_warn_and_run_once() {
    let dir = tempfile::tempdir().unwrap();
    let qs = parse_q_list("3, 3.0, 6/2, 7/2").unwrap();
    let report = sweep(&base("1"), &qs, dir.path(), 2, false, true).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.warnings.len(), 2);
}

#[test]
fn failures_are_isolated_per_row() {
    // At amplitude 1e100, |u|^4 overflows while |u|^2 does not.
    let amp = format!("1{}", "0".repeat(100));
    let dir = tempfile::tempdir().unwrap();
    let qs = vec![int(3), int(5), ratio(1, 2)];
    let report = sweep(&base(&amp), &qs, dir.path(), 2, true, false).unwrap();
    let status: Vec<_> = report.rows.iter().map(|r| r.status).collect();
    assert_eq!(status, [RowStatus::Ok, RowStatus::Failed, RowStatus::Ok]);
    assert!(report.rows[1].error.as_ref().unwrap().contains("finite"));
    assert!(
        report.rows[2].label.is_none(),
        "forced invalid tuple carries no label"
    );
    assert!(dir.path().join("q_3/manifest.json").exists());
    assert!(dir.path().join("q_5/manifest.json").exists());
}

#[test]
fn invalid_rows_without_force_are_marked() {
    let dir = tempfile::tempdir().unwrap();
    let report = sweep(
        &base("1"),
        &[ratio(1, 2), int(3)],
        dir.path(),
        1,
        false,
        true,
    )
    .unwrap();
    assert_eq!(report.rows[0].status, RowStatus::Invalid);
    assert_eq!(report.rows[1].status, RowStatus::Ok);
}

#[test]
fn single_row_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let report = sweep(&base("1/2"), &[int(3)], dir.path(), 1, false, false).unwrap();
    assert_eq!(report.rows.len(), 1);

    let csv_path = dir.path().join("t.csv");
    export_table(&report, TableFormat::Csv, &csv_path).unwrap();
    let text = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.split("\r\n").filter(|l| !l.is_empty()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], COLUMNS.join(","));
    assert_eq!(read_csv(&csv_path).unwrap(), report.rows);

    let jsonl_path = dir.path().join("t.jsonl");
    export_table(&report, TableFormat::Jsonl, &jsonl_path).unwrap();
    let first: serde_json::Value = serde_json::from_str(
        fs::read_to_string(&jsonl_path)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert_eq!(first["schema_version"], 1);
    assert_eq!(read_jsonl(&jsonl_path).unwrap(), report.rows);
}

#[test]
fn unfitted_slopes_are_empty_cells() {
    let dir = tempfile::tempdir().unwrap();
    let report = sweep(&base("1/2"), &[int(3)], dir.path(), 1, false, true).unwrap();
    let path = dir.path().join("t.csv");
    export_table(&report, TableFormat::Csv, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let row = text.split("\r\n").nth(1).unwrap();
    assert!(row.contains(",,"), "{row}");
    assert_eq!(read_csv(&path).unwrap()[0].upsilon_slope, None);
}

#[test]
fn ranges_include_grid_endpoint() {
    let qs = parse_q_range("2:3:1/4").unwrap();
    assert_eq!(qs.len(), 5);
    assert_eq!(qs[4], int(3));
    assert!(parse_q_range("2:3:0").is_err());
    assert!(parse_q_range("2:3").is_err());
}
