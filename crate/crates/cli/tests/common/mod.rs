#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn data(rel: &str) -> PathBuf {
    root().join("data").join(rel)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn pac_sim<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_pac-sim"))
        .args(args)
        .env("PAC_SIM_LOG", "error")
        .output()
        .expect("spawn pac-sim")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Compares two CSV texts cell by cell: text cells exactly, numbers to
/// `|a − b| ≤ abs + rel·|b|`.
pub fn csv_close(actual: &str, expected: &str, rel: f64, abs: f64) -> Result<(), String> {
    let a: Vec<&str> = actual.lines().collect();
    let e: Vec<&str> = expected.lines().collect();
    if a.len() != e.len() {
        return Err(format!("{} lines, expected {}", a.len(), e.len()));
    }
    for (k, (la, le)) in a.iter().zip(&e).enumerate() {
        let ca: Vec<&str> = la.split(',').collect();
        let ce: Vec<&str> = le.split(',').collect();
        if ca.len() != ce.len() {
            return Err(format!("line {}: {} cells, expected {}", k + 1, ca.len(), ce.len()));
        }
        for (x, y) in ca.iter().zip(&ce) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(u), Ok(v)) => {
                    if !((u - v).abs() <= abs + rel * v.abs()) {
                        return Err(format!("line {}: {u} vs expected {v}", k + 1));
                    }
                }
                _ if x == y => {}
                _ => return Err(format!("line {}: '{x}' vs expected '{y}'", k + 1)),
            }
        }
    }
    Ok(())
}

/// Checks `actual` against the golden file `name`; `PAC_SIM_BLESS=1`
/// rewrites the golden file instead.
pub fn check_golden(name: &str, actual: &str, rel: f64, abs: f64) {
    let path = golden_dir().join(name);
    if std::env::var_os("PAC_SIM_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    if let Err(msg) = csv_close(actual, &expected, rel, abs) {
        panic!("{name} differs from golden: {msg}");
    }
}
