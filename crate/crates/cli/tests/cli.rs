use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tdefie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdefie")).args(args).output().unwrap()
}

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

fn write_config(dir: &Path, name: &str, body: String) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn octahedron_run(dir: &Path, moment: [f64; 3]) -> PathBuf {
    let body = format!(
        r#"{{
            "mesh": {{"path": "{}"}},
            "incident": {{"type": "dipole",
                          "params": {{"position": [0, 0, 0], "moment": {moment:?}}},
                          "waveform": {{"omega": 2.0}}}},
            "cq": {{"dt": 0.3, "steps": 30}},
            "probes": [[4, 0, 0]],
            "outputs": {{"density_csv": "out/j.csv", "field_csv": "out/e.csv", "report_json": "out/report.json"}}
        }}"#,
        fixture("meshes/octahedron.off").display()
    );
    write_config(dir, "run.json", body)
}

#[test]
fn selftest_passes_on_defaults() {
    let out = tdefie(&["selftest"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("[PASS] suite cq_oracles"));
}

#[test]
fn selftest_reports_corrupted_mesh_only() {
    let out = tdefie(&["selftest", fixture("configs/selftest_corrupted.json").to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout.contains("[FAIL] suite mesh"));
    assert_eq!(stdout.matches("[FAIL]").count(), 1, "{stdout}");
}

#[test]
fn zero_dipole_run_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = octahedron_run(dir.path(), [0.0, 0.0, 0.0]);
    let out = tdefie(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for f in ["out/j.csv", "out/e.csv", "out/report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["probes"][0]["error"], 0.0);
    assert!(report["gates"].as_array().unwrap().iter().all(|g| g["pass"] == true));
}

#[test]
fn failing_gate_exits_one_and_json_flag_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = octahedron_run(dir.path(), [0.0, 0.0, 1.0]);
    let out = tdefie(&["--json", "run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["campaign"], "run");
    assert!(report["gates"].as_array().unwrap().iter().any(|g| g["pass"] == false));
}

#[test]
fn errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(tdefie(&["run", missing.to_str().unwrap()]).status.code(), Some(2));
    let bad = write_config(dir.path(), "bad.json", r#"{"speeds": [1.0, -1.0]}"#.into());
    assert_eq!(tdefie(&["sweep", bad.to_str().unwrap()]).status.code(), Some(2));
    let open = write_config(
        dir.path(),
        "open.json",
        r#"{"incident": {"type": "plane_wave", "params": {"direction": [0,0,1], "polarization": [1,0,0]}}}"#.into(),
    );
    let out = tdefie(&["stability", open.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("compactly supported"));
}

#[test]
fn single_level_ladder_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ladder.json", r#"{"ladder": [{"level": 0}]}"#.into());
    let out = tdefie(&["converge", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("insufficient levels"));
}
