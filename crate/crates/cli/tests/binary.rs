use std::process::Command;

fn srl_sim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_srl-sim"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn missing_config_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = srl_sim(&[
        "run",
        "--config",
        "/nonexistent.toml",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent.toml"));
    assert!(o.stdout.is_empty());
    assert!(!out.exists());
}

#[test]
fn unwritable_output_fails() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/case_1_2.toml");
    let o = srl_sim(&[
        "run",
        "--config",
        config,
        "--seed",
        "1",
        "--out",
        "/nonexistent/dir/x.csv",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot create"));
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/case_1_2.toml");
    let o = srl_sim(&[
        "run",
        "--config",
        config,
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(
        stdout.contains("scenario 1-2 (compensation off, seed 1)"),
        "{stdout}"
    );
    assert!(stdout.contains("normalization convention of this tool"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 252);
}

#[test]
fn compare_requires_config_or_all() {
    assert!(!srl_sim(&["compare", "--seed", "1"]).status.success());
}
