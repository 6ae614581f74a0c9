use std::process::{Command, Output};

use confine_core::report::{RunDocument, SHIFT_CSV_HEADER};

fn confine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confine")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const QUARTIC: [&str; 4] = ["--potential", "quartic(1)", "--domain", "-1,1"];

#[test]
fn shift_succeeds_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let mut args = vec!["shift"];
    args.extend(QUARTIC);
    args.extend(["--m", "0", "--h", "0.1", "--oracle", "--json", path.to_str().unwrap()]);
    let out = confine(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let doc: RunDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.command, "shift");
    let r = &doc.reports[0];
    assert_eq!(r.status, "ok");
    assert!(r.ratio.unwrap() > 0.9 && r.ratio.unwrap() < 1.2);
    assert!(r.diagnostics.oracle_relative_difference.unwrap() < 1e-7);
    // re-serializing reproduces the same document
    let again: RunDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(again, doc);
}

#[test]
fn missing_mode_is_a_usage_error() {
    let mut args = vec!["shift"];
    args.extend(QUARTIC);
    args.extend(["--h", "0.1"]);
    let out = confine(&args);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--m"));
}

#[test]
fn conflicting_geometry_is_a_usage_error() {
    let out =
        confine(&["shift", "--potential", "harmonic", "--domain", "-1,1", "--box", "1", "--m", "0", "--h", "0.1"]);
    assert_eq!(code(&out), 2);
    let out = confine(&["shift", "--potential", "harmonic", "--box", "1", "--m", "0", "--h", "0.1"]);
    assert_eq!(code(&out), 2, "radial problem without --nu");
    let out = confine(&["shift", "--potential", "harmonic", "--domain", "-1,1", "--nu", "1", "--m", "0", "--h", "0.1"]);
    assert_eq!(code(&out), 2, "line problem with --nu");
}

#[test]
fn invalid_potential_exits_with_usage_code() {
    let out = confine(&["validate", "--potential-expr", "x^3", "--domain", "-1,1"]);
    assert_eq!(code(&out), 2);
    let out = confine(&["shift", "--potential-expr", "x^2 +* x", "--domain", "-1,1", "--m", "0", "--h", "0.1"]);
    assert_eq!(code(&out), 2);
    let out = confine(&["validate", "--potential-expr", "x^2 + x^4", "--domain", "-1,1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn hydrogen_quantum_numbers_are_checked() {
    let out = confine(&["hydrogen", "--n", "1", "--ell", "1", "--Z", "1", "--h", "1", "--R-grid", "8"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn hydrogen_csv_has_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let out = confine(&[
        "hydrogen",
        "--n",
        "1",
        "--ell",
        "0",
        "--Z",
        "1",
        "--h",
        "1",
        "--R-grid",
        "8,12",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "R,E_n,E_confined,numeric_shift,predicted_shift,ratio,log_numeric,log_predicted,status"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn sweep_csv_has_fixed_header() {
    let mut args = vec!["sweep", "--jobs", "1"];
    args.extend(QUARTIC);
    args.extend(["--m", "0", "--h-grid", "0.2,0.1,3", "--csv", "-"]);
    let out = confine(&args);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let header = SHIFT_CSV_HEADER.join(",");
    assert_eq!(
        header,
        "h,lambda0,lambda_confined,numeric_shift,predicted_shift,ratio,log_numeric,log_predicted,status"
    );
    let rows: Vec<&str> = stdout.lines().skip_while(|l| *l != header).collect();
    assert_eq!(rows.len(), 4, "{stdout}");
    assert!(rows[1..].iter().all(|r| r.ends_with(",ok")));
}

#[test]
fn empty_grids_are_rejected() {
    let mut args = vec!["sweep"];
    args.extend(QUARTIC);
    args.extend(["--m", "0", "--h-grid", "0.2,0.1,0"]);
    assert_eq!(code(&confine(&args)), 2);
    let mut args = vec!["oracle"];
    args.extend(QUARTIC);
    args.extend(["--h", "0.1", "--grid-n", "50"]);
    assert_eq!(code(&confine(&args)), 2);
}

#[test]
fn unattainable_box_is_a_numerical_failure() {
    // Bounded Agmon distance: no finite box reaches the decay target.
    let out = confine(&["shift", "--potential-expr", "x^2/(1+x^4)", "--domain", "-1,1", "--m", "0", "--h", "0.5"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let json = dir.path().join("out.json");
    std::fs::write(
        &cfg,
        format!(r#"{{"potential": "quartic(1)", "domain": "-1,1", "m": 1, "h": 0.2, "json": "{}"}}"#, json.display()),
    )
    .unwrap();
    let out = confine(&["--config", cfg.to_str().unwrap(), "shift", "--h", "0.1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: RunDocument = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    match &doc.reports[0].case {
        confine_core::report::Case::Confinement { m, h, .. } => {
            assert_eq!(*m, 1);
            assert_eq!(*h, 0.1);
        }
        other => panic!("{other:?}"),
    }
    std::fs::write(&cfg, r#"{"unknown-key": 1}"#).unwrap();
    assert_eq!(code(&confine(&["--config", cfg.to_str().unwrap(), "shift"])), 2);
}
