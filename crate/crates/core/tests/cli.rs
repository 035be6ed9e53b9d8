use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmsv-sync"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn delta_u_single_point() {
    let out = run(&["delta-u", "--r-db", "5", "--eta1", "0.695", "--eta2", "0.695"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let header: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let row = &csv_rows(&text)[0];
    let adv = row[header.iter().position(|c| *c == "advantage").unwrap()];
    assert!((adv - 1.900e-18).abs() < 1e-21, "{adv}");
}

#[test]
fn sweep_with_options() {
    let out = run(&[
        "sweep", "--var", "n-in", "--start", "100", "--stop", "10000", "--log", "--steps", "3", "--schemes", "tmsv,sql",
        "--r-db", "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "n_in,du_tmsv,du_sql");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    assert!((rows[1][0] - 1000.0).abs() < 1e-9);
    // Each decade of photons buys a factor sqrt(10).
    assert!((rows[0][1] / rows[1][1] - 10f64.sqrt()).abs() < 1e-7);
}

#[test]
fn zero_squeezing_sweep_equals_sql() {
    let out = run(&["sweep", "--steps", "5", "--schemes", "tmsv,sql", "--r-db", "0"]);
    for row in csv_rows(&stdout(&out)) {
        assert_eq!(row[1], row[2]);
    }
}

#[test]
fn validation_errors_exit_one() {
    for args in [
        &["delta-u", "--eta", "1.5"][..],
        &["sweep", "--start", "0.9", "--stop", "0.1"],
        &["fig2", "--steps", "1"],
        &["grid", "--n-in", "-3"],
        &["no-such-command"],
        &["fig2", "--format", "xml"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn io_errors_exit_three_with_path() {
    let out = run(&["fig4", "--out", "/nonexistent-dir/out.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/out.csv"));
    let out = run(&["fig4", "--config", "/nonexistent-dir/cfg.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.json");
    let out = run(&["fig4", "--steps", "7", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(file, stdout(&run(&["fig4", "--steps", "7", "--format", "json"])));
    let json: serde_json::Value = serde_json::from_str(&file).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 7);
    assert_eq!(json["columns"][4], "ratio");
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"sensing": {"r_db": 5, "n_in": 4000}, "channel": {"eta1": 0.585, "eta2": 0.825}}"#,
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let base = csv_rows(&stdout(&run(&["delta-u", "--config", cfg])))[0].clone();
    assert_eq!(&base[..3], &[0.585, 0.825, 5.0]);
    let flagged = csv_rows(&stdout(&run(&["delta-u", "--config", cfg, "--n-in", "1000"])))[0].clone();
    // Quarter the photons, double the offset.
    assert!((flagged[4] / base[4] - 2.0).abs() < 1e-8);

    std::fs::write(&path, r#"{"sensing": {"r_db": 5, "bogus": 1}}"#).unwrap();
    assert_eq!(run(&["delta-u", "--config", cfg]).status.code(), Some(1));
}

#[test]
fn link_budget_sets_transmissivity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"link": {"path1": {"eta_diffraction": 0.5, "eta_detector": 0.8}, "path2": {"eta_pointing": 0.9}}}"#,
    )
    .unwrap();
    let row = csv_rows(&stdout(&run(&["delta-u", "--config", path.to_str().unwrap()])))[0].clone();
    assert!((row[0] - 0.4).abs() < 1e-12);
    assert!((row[1] - 0.9).abs() < 1e-12);
}

#[test]
fn verify_reports_and_policies() {
    let shared = run(&["verify"]);
    assert_eq!(shared.status.code(), Some(0));
    assert!(stdout(&shared).lines().last().unwrap().contains("failures=0"));

    let independent = run(&["verify", "--policy", "independent"]);
    assert_eq!(independent.status.code(), Some(0));
    let text = stdout(&independent);
    assert!(text.lines().any(|l| l.starts_with("diagnostic")));
    assert!(text.lines().last().unwrap().ends_with("PASS"));

    let json = run(&["verify", "--format", "json", "--density", "3"]);
    let report: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["points"].as_array().unwrap().len(), 4 * 9 + 4 * 3);
}

#[test]
fn tm_check_passes() {
    let out = run(&["tm-check"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).trim_end().ends_with("PASS"));
    let coarse = run(&["tm-check", "--tm-omega0", "1000"]);
    assert_eq!(coarse.status.code(), Some(1));
}

#[test]
fn fig3_svg_draws_requested_contours() {
    let out = run(&["fig3", "--steps", "60", "--format", "svg"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = stdout(&out);
    assert!(svg.starts_with("<svg"));
    for level in ["5.00000000e-19", "1.00000000e-18", "1.50000000e-18", "1.90000000e-18"] {
        assert!(svg.contains(&format!("data-level=\"{level}\"")), "missing contour {level}");
    }
    let custom = stdout(&run(&["grid", "--steps", "30", "--format", "svg", "--r-db", "5", "--contours", "1e-18"]));
    assert!(custom.contains("data-level=\"1.00000000e-18\""));
    assert!(!custom.contains("data-level=\"1.90000000e-18\""));
}

#[test]
fn fig3_grid_keeps_negative_advantage() {
    let text = stdout(&run(&["fig3", "--steps", "51"]));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 51 * 51);
    assert!(rows.iter().any(|r| r[2] < 0.0 && r[3] == -1.0));
    assert!(rows.iter().any(|r| r[2] > 0.0 && r[3] == 1.0));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("tm-check"));
}
