//! Plain-text matrix serialization shared by the CLI and the test suites.
//!
//! Matrices are written as headerless RFC 4180 CSV with 17 significant
//! digits, enough for `f64` values to round-trip exactly.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Formats one value with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a matrix as headerless CSV.
pub fn matrix_to_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Renders a vector as a one-column CSV.
pub fn vector_to_csv(v: &Array1<f64>) -> String {
    let mut out = String::new();
    for &x in v.iter() {
        out.push_str(&format_f64(x));
        out.push('\n');
    }
    out
}

/// Parses a headerless numeric CSV into a dense matrix. All rows must have
/// the same number of fields.
pub fn matrix_from_csv(text: &str) -> Result<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad number {tok:?} on line {}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::invalid(format!(
                    "line {} has {} fields, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::invalid("empty matrix file".to_string()));
    }
    let ncols = rows[0].len();
    let nrows = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| Error::invalid(format!("bad matrix shape: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn matrix_round_trips_exactly() {
        let m = arr2(&[
            [0.1, -2.5e-17, 3.0],
            [f64::MIN_POSITIVE, 1.0 / 3.0, -0.446224],
        ]);
        let back = matrix_from_csv(&matrix_to_csv(&m)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(matrix_from_csv("1,2\n3\n").is_err());
        assert!(matrix_from_csv("").is_err());
        assert!(matrix_from_csv("1,x\n").is_err());
    }
}
