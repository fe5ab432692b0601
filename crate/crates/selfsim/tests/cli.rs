use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use selfsim::Report;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_selfsim"))
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(config: &Path, extra: &[&str]) -> Output {
    bin().arg("--config").arg(config).args(extra).output().unwrap()
}

const HGROUP: &str = r#"{"command":"riesz-hgroup","params":{"family":"factorial","J":40,"theta":[0]}}"#;
const VERIFY_SIMPLE: &str = r#"{"command":"poisson-verify","params":{"mu":1,"j_max":4,"N":100000},"seed":7}"#;
const VERIFY_FULL: &str = r#"{"command":"poisson-verify","seed":11,"params":{
    "kappa":{"kind":"uniform","lo":1,"hi":3},"window":{"s":[1,3],"y":[0,1]},"L":1,
    "K":{"s":[1,2]},"K_prime":{"s":[2,3],"z":[0,0.5]},"t":[0.3],"N":10000,"j_max":5}}"#;

#[test]
fn factorial_series_at_zero_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&write_config(dir.path(), "c.json", HGROUP), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("riesz-hgroup,theta=0;J=40,0.0,0.0,"));
    assert!(lines[1].ends_with(",true"));
}

#[test]
fn simple_verify_gives_one_row_per_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&write_config(dir.path(), "c.json", VERIFY_SIMPLE), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn unknown_command_is_a_config_error_with_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"command":"riesz-nope","params":{}}"#);
    let target = dir.path().join("out.csv");
    let out = run(&cfg, &["--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!target.exists());
}

#[test]
fn schema_violations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (i, bad) in [
        r#"{"command":"riesz-hgroup","params":{"family":"factorial","J":4,"theta":[0],"extra":1}}"#,
        r#"{"command":"riesz-coeff","params":{"n":[2,1],"m":[0]}}"#,
        r#"{"command":"gauss-cov","params":{"sigma":{"kind":"atoms","atoms":[[1,1]]},"t":[0]}}"#,
        r#"{"command":"poisson-verify","params":{"mu":1,"j_max":4}}"#,
        r#"not json"#,
    ]
    .iter()
    .enumerate()
    {
        let out = run(&write_config(dir.path(), &format!("{i}.json"), bad), &[]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn failing_row_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // uniform sigma does not have covariance cos t
    let cfg = r#"{"command":"gauss-cov","params":{"sigma":{"kind":"uniform","window":2,"N":1024},"t":[0,1],"closed_form":"cos"}}"#;
    let out = run(&write_config(dir.path(), "c.json", cfg), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains(",false"));
}

#[test]
fn window_truncation_exits_3_and_names_the_guard() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command":"gauss-exp","params":{"sigma":{"kind":"bump","center":1,"width":0.05,"window":2,"N":4096},"half_width":3,"N":4096}}"#;
    let out = run(&write_config(dir.path(), "c.json", cfg), &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("convolution window truncation"));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", HGROUP);
    let target = dir.path().join("missing").join("out.csv");
    let out = run(&cfg, &["--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn empty_report_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"command":"riesz-coeff","params":{"n":[1,3],"m":[]}}"#);
    let out = run(&cfg, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "check_name,parameter,theoretical,empirical,band_low,band_high,pass\n");
}

#[test]
fn json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("r.json");
    let out = run(&write_config(dir.path(), "c.json", VERIFY_SIMPLE), &["--format", "json", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(&target).unwrap();
    let report = Report::from_json(&bytes).unwrap();
    assert_eq!(report.rows.len(), 5);
    assert_eq!(report.metadata.seed, 7);
    assert_eq!(Report::from_json(&report.to_json().unwrap()).unwrap(), report);
    assert_eq!(report.to_json().unwrap(), bytes);
}

#[test]
fn csv_field_count_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&write_config(dir.path(), "c.json", VERIFY_FULL), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let mut rows = 0;
    for rec in reader.records() {
        assert_eq!(rec.unwrap().len(), 7);
        rows += 1;
    }
    assert!(rows > 10);
}

#[test]
fn reruns_and_worker_counts_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", VERIFY_FULL);
    let a = run(&cfg, &["--workers", "1"]).stdout;
    let b = run(&cfg, &["--workers", "1"]).stdout;
    let c = run(&cfg, &["--workers", "4"]).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(a, c);
    // the seed flag overrides the config
    let d = run(&cfg, &["--seed", "12"]).stdout;
    assert_ne!(a, d);
}

#[test]
fn tables_go_to_sibling_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"command":"riesz-coeff","params":{"n":[1,3,8],"m":[5,4]}}"#);
    let target = dir.path().join("coef.csv");
    let out = run(&cfg, &["--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(dir.path().join("coef.coefficients.csv")).unwrap();
    assert_eq!(table, "m,re,im,representation\n5,0.25,0.0,3:+1 2:-1\n4,0.375,0.0,2:+1 1:+1\n");
}
