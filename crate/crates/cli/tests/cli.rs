use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn drc(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drc"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn compare_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = drc(dir.path(), &["--preset", "table2", "compare"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("table5.csv")).unwrap();
    assert_eq!(table.lines().count(), 19);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest_compare.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "compare");
    assert_eq!(manifest["seed"], 42);
}

#[test]
fn optimize_writes_designs() {
    let dir = tempfile::tempdir().unwrap();
    let o = drc(dir.path(), &["--strategy", "ff", "optimize"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let design: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("design_ff.json")).unwrap()).unwrap();
    assert!(design.is_object());
    assert!(dir.path().join("search_log_ff.csv").exists());
    assert!(!dir.path().join("design_sf.json").exists());
}

#[test]
fn infeasible_scenario_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("heavy.toml");
    fs::write(&cfg, "preset = \"table2\"\nlambda_p = 10000\nlambda_d = 10000\n").unwrap();
    let o = drc(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "--strategy", "ff", "optimize"],
    );
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_input_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = drc(dir.path(), &["--preset", "nope", "compare"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}
