use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pinninglab"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args(extra)
        .arg("run")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn same_config_gives_byte_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"experiment": "quenched-scan", "seed": 11, "N": 150, "samples": 12, "h_grid": [-0.2, 0.1, 0.4]}"#,
    );
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert!(run(&cfg, &a, &[]).status.success());
    assert!(run(&cfg, &b, &[]).status.success());
    assert!(run(&cfg, &c, &["--threads", "3"]).status.success());
    let read = |d: &Path| std::fs::read(d.join("quenched-scan-grid.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
    let text = String::from_utf8(read(&a)).unwrap();
    assert!(text.starts_with("# pinninglab "));
    assert!(text.contains("\n# seed 11\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn seed_override_changes_the_draws() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"experiment": "hier-free-energy", "seed": 1, "n": 6, "samples": 100, "h_grid": [0.05]}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&cfg, &a, &[]).status.success());
    assert!(run(&cfg, &b, &["--seed", "2"]).status.success());
    let a = std::fs::read_to_string(a.join("hier-free-energy-grid.csv")).unwrap();
    let b = std::fs::read_to_string(b.join("hier-free-energy-grid.csv")).unwrap();
    assert!(b.contains("# seed 2\n"));
    assert_ne!(a.lines().last(), b.lines().last());
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for text in [
        r#"{"experiment": "gw-check"}"#,
        r#"{"experiment": "gw-check", "seed": 1, "colour": "red"}"#,
        r#"{"experiment": "no-such-thing", "seed": 1}"#,
        r#"{"experiment": "quenched-scan", "seed": 1, "beta": -1.0}"#,
        "not json",
    ] {
        let cfg = write_config(tmp.path(), text);
        let out = run(&cfg, &tmp.path().join("o"), &[]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    }
    let out = run(&tmp.path().join("missing.json"), &tmp.path().join("o"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_flags_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    // 1.7 needs h well below 1e-3 before the slope settles
    let cfg = write_config(tmp.path(), r#"{"experiment": "annealed-scan", "seed": 1, "b": 1.7}"#);
    let out = run(&cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL slope_within_tolerance"));
}

#[test]
fn shipped_configs_run() {
    let tmp = tempfile::tempdir().unwrap();
    for name in [
        "annealed-scan",
        "gw-check",
        "overlap-identity",
        "renewal-green",
        "decomposition-check",
    ] {
        let out = run(&configs().join(format!("{name}.json")), tmp.path(), &[]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(tmp.path().join(format!("{name}.json")).exists());
    }
}

#[test]
fn acceptance_detects_a_corrupted_overlap() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = bin()
        .args(["acceptance", "--only", "1,2", "--dir"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(ok.status.success());
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("criterion  2 PASS"));
    let summary = std::fs::read_to_string(tmp.path().join("acceptance.csv")).unwrap();
    assert!(summary.starts_with("criterion,title,pass,wall_time_s"));

    let bad = bin()
        .args(["acceptance", "--only", "2", "--mutate", "overlap", "--dir"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("criterion  2 FAIL"));
}

#[test]
fn suite_file_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("suite.json"),
        r#"{"seed": 3, "criteria": [1], "extra": true}"#,
    )
    .unwrap();
    let out = bin().args(["acceptance", "--dir"]).arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(tmp.path().join("suite.json"), r#"{"seed": 3, "criteria": [1]}"#).unwrap();
    let out = bin().args(["acceptance", "--dir"]).arg(tmp.path()).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).matches("criterion ").count(), 1);
}
