//! Dataset loading, CSV/JSON emission, and full-precision float formatting.
//!
//! All numeric output goes through [`fmt_g17`], a `%.17g`-style formatter:
//! 17 significant digits guarantee that written doubles parse back to the
//! exact same bits, which is what makes report files byte-identical across
//! reruns of the same configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kboost_core::Dataset;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

/// `%.17g`-style formatting: shortest of fixed/scientific at 17 significant
/// digits, trailing zeros stripped.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    // {:.16e} rounds to 17 significant digits and exposes the decimal exponent
    let sci = format!("{:.16e}", x);
    let (mantissa, exp_str) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp_str.parse().expect("valid exponent");
    if exp < -4 || exp >= 17 {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let prec = (16 - exp).max(0) as usize;
        let fixed = format!("{x:.prec$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    }
}

/// Load a two-column dataset CSV. The header must contain the requested
/// column names (`x,y` by default); rows must hold finite numbers.
pub fn load_dataset(
    path: &Path,
    cols: Option<(&str, &str)>,
    support: Option<(f64, f64)>,
) -> Result<Dataset, IoError> {
    let (x_name, y_name) = cols.unwrap_or(("x", "y"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IoError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| IoError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| -> Result<usize, IoError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IoError::Format {
                path: path.to_path_buf(),
                message: format!("missing column '{name}' in header {headers:?}"),
            })
    };
    let xi = find(x_name)?;
    let yi = find(y_name)?;

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1;
        let record = record.map_err(|e| IoError::Row {
            path: path.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        let parse = |idx: usize, name: &str| -> Result<f64, IoError> {
            let raw = record.get(idx).ok_or_else(|| IoError::Row {
                path: path.to_path_buf(),
                row,
                message: format!("missing field '{name}'"),
            })?;
            let value: f64 = raw.parse().map_err(|_| IoError::Row {
                path: path.to_path_buf(),
                row,
                message: format!("unparsable number '{raw}' in column '{name}'"),
            })?;
            if !value.is_finite() {
                return Err(IoError::Row {
                    path: path.to_path_buf(),
                    row,
                    message: format!("non-finite value '{raw}' in column '{name}'"),
                });
            }
            Ok(value)
        };
        x.push(parse(xi, x_name)?);
        y.push(parse(yi, y_name)?);
    }

    let built = match support {
        Some((lo, hi)) => Dataset::with_support(x, y, lo, hi),
        None => Dataset::new(x, y),
    };
    built.map_err(|e| IoError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Write a CSV of named float columns (all columns equal length).
pub fn write_columns_csv(
    path: &Path,
    headers: &[&str],
    columns: &[&[f64]],
) -> Result<(), IoError> {
    assert_eq!(headers.len(), columns.len());
    let n = columns.first().map_or(0, |c| c.len());
    for c in columns {
        assert_eq!(c.len(), n, "ragged columns");
    }
    let mut out = String::new();
    out.push_str(&headers.join(","));
    out.push('\n');
    for i in 0..n {
        let row: Vec<String> = columns.iter().map(|c| fmt_g17(c[i])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Write a dataset as `x,y`.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<(), IoError> {
    write_columns_csv(path, &["x", "y"], &[data.x(), data.y()])
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| IoError::File {
                path: dir.to_path_buf(),
                source: e,
            })?;
        }
    }
    let mut file = fs::File::create(path).map_err(|e| IoError::File {
        path: path.to_path_buf(),
        source: e,
    })?;
    file.write_all(bytes).map_err(|e| IoError::File {
        path: path.to_path_buf(),
        source: e,
    })
}
