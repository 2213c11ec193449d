use std::fs;
use std::io::BufReader;
use std::process::Command;

use nitsche_cut::experiment::read_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nitsche-cut"))
}

#[test]
fn run_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ex4.csv");
    let status = bin()
        .args(["run", "--example", "ex4", "--K", "4", "--eps-from", "0.25", "--eps-to", "0.001"])
        .args(["--variant", "hybrid", "--cap", "500", "--diagnostics", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# example=ex4 "));
    assert!(text.contains("variant=hybrid cap=500"));
    let records = read_csv(BufReader::new(text.as_bytes())).unwrap();
    // 0.25 · 0.5^n ≥ 0.001 for n = 0..=7
    assert_eq!(records.len(), 8);
    assert!(records.iter().all(|r| r.diagnostics.is_some()));
    assert!(String::from_utf8_lossy(&status.stderr).contains("8 rows"));
}

#[test]
fn run_prints_to_stdout() {
    let out = bin()
        .args(["run", "--example", "ex1-tri", "--K", "4", "--eps-from", "0.1", "--eps-to", "0.05"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let records = read_csv(BufReader::new(&out.stdout[..])).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!((records[0].m, records[0].n), (16 * 4 + 7, 16 * 4 + 8));
}

#[test]
fn bad_arguments_fail() {
    let out = bin().args(["run", "--example", "ex9"]).output().unwrap();
    assert!(!out.status.success());
    let out = bin()
        .args(["run", "--example", "ex1-tri", "--order", "2", "--K", "4"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
