#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_uidthat"));
    cmd.env("UIDTHAT_LOG", "warn");
    cmd
}

/// Runs `uidthat <args> <stage>` against `corpus`, writing into `out`.
pub fn stage(corpus: &Path, out: &Path, extra: &[&str], stage: &str) -> Output {
    bin()
        .arg("--corpus")
        .arg(corpus)
        .arg("--output-dir")
        .arg(out)
        .args(extra)
        .arg(stage)
        .output()
        .expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn assert_ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(o));
}

/// Parses a CSV file into its header and rows of strings.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

/// Compares two CSV tables cell by cell, numerically where both cells parse.
pub fn assert_tables_close(got: &Path, want: &Path, tol: f64) {
    let (gh, grows) = read_csv(got);
    let (wh, wrows) = read_csv(want);
    assert_eq!(gh, wh, "headers differ");
    assert_eq!(grows.len(), wrows.len(), "row counts differ");
    for (i, (g, w)) in grows.iter().zip(&wrows).enumerate() {
        for (j, (a, b)) in g.iter().zip(w).enumerate() {
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => assert!(
                    (x - y).abs() <= tol * y.abs().max(1.0),
                    "row {i} column {}: {x} vs {y}",
                    gh[j]
                ),
                _ => assert_eq!(a, b, "row {i} column {}", gh[j]),
            }
        }
    }
}
