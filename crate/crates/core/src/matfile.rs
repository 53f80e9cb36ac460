//! Plain-text complex matrix files.
//!
//! Format: first line holds the dimension `n`, followed by `n` lines of `n`
//! whitespace-separated complex entries in `a+bi` form. Writers emit 17
//! significant digits so files round-trip f64 exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected matrix dimension, got {text:?}")]
    BadDimension { line: usize, text: String },
    #[error("line {line}: cannot parse complex entry {text:?}")]
    BadEntry { line: usize, text: String },
    #[error("line {line}: expected {expected} entries, found {found}")]
    WrongEntryCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} matrix rows, found {found}")]
    MissingRows { expected: usize, found: usize },
}

/// Renders one complex entry as `a+bi` with 17 significant digits.
pub fn format_complex(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}i", z.re, z.im)
}

/// Serializes a matrix in the text format.
pub fn format_matrix(m: &DMatrix<Complex64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.nrows());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format_complex(m[(r, c)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Parses the text format into a square complex matrix.
pub fn parse_matrix(text: &str) -> Result<DMatrix<Complex64>, MatFileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (dim_line, dim_text) = lines.next().ok_or(MatFileError::BadDimension {
        line: 1,
        text: String::new(),
    })?;
    let dim: usize = dim_text.parse().map_err(|_| MatFileError::BadDimension {
        line: dim_line,
        text: dim_text.to_string(),
    })?;

    let mut entries = Vec::with_capacity(dim * dim);
    let mut rows_found = 0;
    for (line_no, line) in lines.by_ref().take(dim) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != dim {
            return Err(MatFileError::WrongEntryCount {
                line: line_no,
                expected: dim,
                found: fields.len(),
            });
        }
        for f in fields {
            let z = Complex64::from_str(f).map_err(|_| MatFileError::BadEntry {
                line: line_no,
                text: f.to_string(),
            })?;
            entries.push(z);
        }
        rows_found += 1;
    }
    if rows_found != dim {
        return Err(MatFileError::MissingRows {
            expected: dim,
            found: rows_found,
        });
    }
    Ok(DMatrix::from_row_slice(dim, dim, &entries))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<Complex64>, MatFileError> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<Complex64>) -> Result<(), MatFileError> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}
