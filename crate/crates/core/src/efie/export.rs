use std::fmt::Write as _;
use std::path::Path;

use faer::Mat;

use crate::c64;
use crate::error::{Error, Result};

/// Row-major CSV with `re,im` pairs per entry.
pub fn matrix_to_csv(m: &Mat<c64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            let v = m[(i, j)];
            let _ = write!(out, "{},{}", v.re, v.im);
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &Mat<c64>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, matrix_to_csv(m)).map_err(|e| Error::io(path, e))
}

pub fn parse_matrix_csv(text: &str) -> Result<Mat<c64>> {
    let mut rows: Vec<Vec<c64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::parse(ln + 1, format!("bad number: {e}")))?;
        if vals.len() % 2 != 0 {
            return Err(Error::parse(ln + 1, "odd number of fields in a re,im row"));
        }
        let row: Vec<c64> = vals.chunks(2).map(|p| c64::new(p[0], p[1])).collect();
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    ln + 1,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(Mat::<c64>::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}
