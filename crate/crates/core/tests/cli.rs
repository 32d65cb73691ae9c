use std::path::Path;
use std::process::Command;

fn wavedens(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wavedens"))
        .args(args)
        .output()
        .unwrap()
}

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn basis_writes_node_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("haar.csv");
    let status = wavedens(&["basis", "--family", "haar", "--emit", out.to_str().unwrap()]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,phi"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert!(rows.len() > 1000);
    assert!(rows
        .iter()
        .filter(|(x, _)| *x < 1.0)
        .all(|(_, y)| *y == 1.0));
}

#[test]
fn limitsets_reports_endpoints_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("j.json");
    let status = wavedens(&[
        "limitsets",
        "--family",
        "haar",
        "--v",
        "1",
        "--emit",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((json["hi"].as_f64().unwrap() - std::f64::consts::E).abs() < 1e-9);
    assert_eq!(json["lo"].as_f64().unwrap(), 0.0);
    assert_eq!(json["v"].as_f64().unwrap(), 1.0);
    assert!(dir.path().join("j.certificate.csv").exists());
}

#[test]
fn validate_exit_codes() {
    assert_eq!(
        wavedens(&["validate", "--config", &config_path("theorem1.json")])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        wavedens(&["validate", "--config", &config_path("theorem2.json")])
            .status
            .code(),
        Some(0)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"theorem": 1}"#).unwrap();
    let out = wavedens(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn theorem_subcommand_rejects_other_theorem() {
    let out = wavedens(&["theorem1", "--config", &config_path("theorem2.json")]);
    assert_eq!(out.status.code(), Some(2));
}
