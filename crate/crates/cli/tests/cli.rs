use std::path::Path;
use std::process::{Command, Output};

fn nslg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nslg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn table1_passes_and_emits_json() {
    let out = nslg(&["table1"]);
    assert_eq!(out.status.code(), Some(0));
    let out = nslg(&["table1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sem.csv");
    let out = nslg(&[
        "run",
        "--preset",
        "sem",
        "--out",
        csv.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("z_m,ct_m,sigma_m,rho_m,rho_st_m,rho_L_m,gouy_rad")
    );

    let json = dir.path().join("tem.json");
    let out = nslg(&[
        "run",
        "--preset",
        "tem",
        "--span",
        "1",
        "--out",
        json.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(value["name"], "tem");
}

#[test]
fn run_accepts_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let config = nslg_core::preset("medlinac").unwrap();
    std::fs::write(&cfg, serde_json::to_string(&config).unwrap()).unwrap();
    let out = nslg(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("medlinac"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(nslg(&["run", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(nslg(&["run"]).status.code(), Some(2));
    assert_eq!(
        nslg(&["psi", "--preset", "sem", "--ct", "0", "--grid", "10"])
            .status
            .code(),
        Some(2)
    );
    let missing = Path::new("/nonexistent-dir/profile.csv");
    let out = nslg(&[
        "fringe",
        "--profile",
        missing.to_str().unwrap(),
        "--rho",
        "2e-6",
        "--vphi",
        "1e-3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_reports_verdicts() {
    let ok = nslg(&["validate", "--preset", "sem", "--sigma-z", "1e-9"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("verdict"));
    let long = nslg(&["validate", "--preset", "sem", "--sigma-z", "1"]);
    assert_eq!(long.status.code(), Some(1));
    assert!(stdout(&long).contains("violated"));
}

#[test]
fn fringe_reads_a_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.csv");
    let mut text = String::from("z_m,h_t\n");
    for k in 0..=400 {
        let z = -0.1 + k as f64 * 5e-4;
        // smooth-edged 10 cm solenoid
        let h = 0.5 * ((z + 0.05) / 0.005).tanh() - 0.5 * ((z - 0.05) / 0.005).tanh();
        text.push_str(&format!("{z},{h}\n"));
    }
    std::fs::write(&path, text).unwrap();
    let out = nslg(&[
        "fringe",
        "--profile",
        path.to_str().unwrap(),
        "--rho",
        "2e-6",
        "--vphi",
        "1e-3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("effective d"));
}

#[test]
fn psi_writes_density() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.csv");
    let out = nslg(&[
        "psi",
        "--preset",
        "sem",
        "--ct",
        "1e-4",
        "--grid",
        "256,16",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho_m,phi_rad,density"));
    assert_eq!(lines.count(), 256 * 16);
}
