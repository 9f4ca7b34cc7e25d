//! Deterministic number formatting and CSV output.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub const SIGNIFICANT_DIGITS: usize = 9;

/// `x` with nine significant digits, trailing zeros removed; scientific
/// notation outside `[1e-4, 1e9)`.
pub fn fmt(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-4..9).contains(&exponent) {
        return format!("{}e{exponent}", trim(mantissa));
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// CSV file written row by row and flushed after every row.
pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> CliResult<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
        }
        let file = File::create(path).map_err(|e| CliError::write(path, e))?;
        let mut out = Self {
            path: path.to_path_buf(),
            writer: csv::Writer::from_writer(BufWriter::new(file)),
        };
        out.row(header.iter().map(|s| s.to_string()))?;
        Ok(out)
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> CliResult<()> {
        let fields: Vec<String> = fields.into_iter().collect();
        self.writer
            .write_record(&fields)
            .and_then(|_| self.writer.flush().map_err(csv::Error::from))
            .map_err(|e| CliError::write(&self.path, std::io::Error::other(e)))
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    }
    let mut f = File::create(path).map_err(|e| CliError::write(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::write(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt(0.4062), "0.4062");
        assert_eq!(fmt(2.0 / std::f64::consts::PI), "0.636619772");
        assert_eq!(fmt(-1234.56789012), "-1234.56789");
        assert_eq!(fmt(1.0 / 3.0 * 1e-7), "3.33333333e-8");
        assert_eq!(fmt(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt(-0.0), "0");
        assert_eq!(fmt(1e-4), "0.0001");
        assert_eq!(fmt(99999999.95), "100000000");
    }
}
