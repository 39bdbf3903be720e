use std::path::Path;
use std::process::{Command, Output};

fn wpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpl"))
        .args(args)
        .env_remove("WPL_CONFIG")
        .env_remove("WPL_PRESET")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn passing_preset_exits_zero() {
    let out = wpl(&["--preset", "quartic_two_cut", "verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("checks passed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn failed_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // a norm-limit threshold nobody can meet at n = 10
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scenario": "quartic_two_cut", "n": [10], "thresholds": {"norm_limit": 1e-12}}"#,
    );
    let out = wpl(&["--config", &cfg, "verify"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL norm_limit"));
}

#[test]
fn missing_config_exits_one() {
    let out = wpl(&["verify"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"scenario": "hermite", "tolerances": {"roots": 1e-9}}"#);
    let out = wpl(&["--config", &cfg, "equilibrium"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tolerances"), "{err}");
    assert!(err.contains("roots"), "{err}");
}

#[test]
fn report_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"scenario": "quartic_two_cut", "n": [10, 20]}"#);
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let out = wpl(&[
        "--config",
        &cfg,
        "--out-json",
        json.to_str().unwrap(),
        "--out-csv",
        csv.to_str().unwrap(),
        "report",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 2);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(rows.starts_with("scenario,p,n,"));
}
