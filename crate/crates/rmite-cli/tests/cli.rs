use std::fs;
use std::path::Path;
use std::process::Command;

fn rmite() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rmite"))
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{
            "experiment": "evolution",
            "seed": 3,
            "hamiltonian": {"builtin": "tfim", "n-qubits": 2},
            "ansatz": {"hardware-efficient": {"n-qubits": 2, "layers": 1}},
            "theta0": {"random-uniform": {"scale": 0.1}},
            "evolution": {"method": "varqite", "dt": 0.05, "steps": 10}
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    let status = rmite()
        .args(["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    for f in ["trace.csv", "summary.json", "manifest.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
}

#[test]
fn missing_config_exits_2() {
    let status = rmite().args(["run", "/nonexistent/config.json"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{not json").unwrap();
    let status = rmite().args(["run", path.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_data_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{
            "experiment": "evolution",
            "seed": 1,
            "hamiltonian": {"file": "absent.json"},
            "ansatz": {"hardware-efficient": {"n-qubits": 2, "layers": 1}},
            "evolution": {"method": "varqite", "dt": 0.05, "steps": 1}
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = rmite()
        .args(["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn malformed_data_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.json"), r#"{"n_qubits": 1}"#).unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{
            "experiment": "evolution",
            "seed": 1,
            "hamiltonian": {"file": "h.json"},
            "ansatz": {"hardware-efficient": {"n-qubits": 1, "layers": 1}},
            "evolution": {"method": "varqite", "dt": 0.05, "steps": 1}
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = rmite()
        .args(["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn compare_runs_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{
            "experiment": "evolution",
            "seed": 2,
            "hamiltonian": {"builtin": "tfim", "n-qubits": 2},
            "ansatz": {"hardware-efficient": {"n-qubits": 2, "layers": 1}},
            "theta0": {"random-uniform": {"scale": 0.1}},
            "evolution": {"method": "varqite", "dt": 0.05, "steps": 5},
            "estimator": {"kind": "two-design", "ensemble": "haar", "samples": 2},
            "methods": [
                {"name": "exact", "method": "varqite"},
                {"name": "randomized", "method": "rmite"}
            ]
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = rmite()
        .args(["compare", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("exact"));
    assert!(stdout.contains("randomized"));
    assert!(out.join("compare.csv").exists());
}

#[test]
fn output_root_env_used_when_no_out_given() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let root = dir.path().join("root");
    let status = rmite()
        .args(["run", config.to_str().unwrap()])
        .env("RMITE_OUTPUT_ROOT", root.to_str().unwrap())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(root.join("seed-3").join("trace.csv").exists());
}
