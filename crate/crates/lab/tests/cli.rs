use std::process::Command;

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gmc-lab"))
}

fn config(name: &str) -> String {
    format!("{}/../../configs/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn writes_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let status = lab()
        .args(["identities", "--config", &config("identities"), "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for f in ["report.json", "report.csv", "summary.md", "config.toml"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "kind = \"sample\"\nseed = 1\nreplicas = 4\nbogus = 3\n").unwrap();
    let out = lab().args(["sample", "--config"]).arg(&path).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
