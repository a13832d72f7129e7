//! Plain-text export: Matrix Market (complex general coordinate) and re/im vectors.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{HelmError, Result};
use crate::sparse::{ComplexSparseMatrix, CsrMatrix};

/// Renders `a` as a Matrix Market `coordinate complex general` file (1-based indices).
pub fn matrix_market_string(a: &ComplexSparseMatrix) -> String {
    let mut s = String::with_capacity(a.nnz() * 48 + 64);
    s.push_str("%%MatrixMarket matrix coordinate complex general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, v) in cols.iter().zip(vals) {
            let _ = writeln!(s, "{} {} {:.17e} {:.17e}", i + 1, j + 1, v.re, v.im);
        }
    }
    s
}

pub fn write_matrix_market(a: &ComplexSparseMatrix, path: &Path) -> Result<()> {
    fs::write(path, matrix_market_string(a))?;
    Ok(())
}

/// Parses the output of [`matrix_market_string`] (also accepts `real` matrices).
pub fn parse_matrix_market(text: &str) -> Result<ComplexSparseMatrix> {
    let bad = |m: &str| HelmError::InvalidArgument(format!("matrix market: {m}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))?.to_ascii_lowercase();
    if !header.starts_with("%%matrixmarket matrix coordinate") {
        return Err(bad("unsupported header"));
    }
    let complex = header.contains("complex");
    let mut lines = lines.filter(|l| !l.starts_with('%') && !l.trim().is_empty());
    let dims: Vec<usize> = lines
        .next()
        .ok_or_else(|| bad("missing size line"))?
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| bad("bad size line")))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(bad("bad size line"));
    }
    let mut trip = Vec::with_capacity(dims[2]);
    for line in lines {
        let w: Vec<&str> = line.split_whitespace().collect();
        let need = if complex { 4 } else { 3 };
        if w.len() < need {
            return Err(bad("short entry line"));
        }
        let i: usize = w[0].parse().map_err(|_| bad("bad row index"))?;
        let j: usize = w[1].parse().map_err(|_| bad("bad column index"))?;
        let re: f64 = w[2].parse().map_err(|_| bad("bad value"))?;
        let im: f64 = if complex { w[3].parse().map_err(|_| bad("bad value"))? } else { 0.0 };
        if i == 0 || j == 0 {
            return Err(bad("indices are 1-based"));
        }
        trip.push((i - 1, j - 1, Complex64::new(re, im)));
    }
    CsrMatrix::from_triplets(dims[0], dims[1], &trip)
}

/// One `re im` pair per line.
pub fn vector_string(x: &[Complex64]) -> String {
    let mut s = String::with_capacity(x.len() * 48);
    for v in x {
        let _ = writeln!(s, "{:.17e} {:.17e}", v.re, v.im);
    }
    s
}

pub fn write_vector(x: &[Complex64], path: &Path) -> Result<()> {
    fs::write(path, vector_string(x))?;
    Ok(())
}

pub fn parse_vector(text: &str) -> Result<Vec<Complex64>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let w: Vec<f64> = l.split_whitespace().map(|t| t.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| HelmError::InvalidArgument(format!("bad vector line {l:?}")))?;
            match w.as_slice() {
                [re, im] => Ok(Complex64::new(*re, *im)),
                [re] => Ok(Complex64::new(*re, 0.0)),
                _ => Err(HelmError::InvalidArgument(format!("bad vector line {l:?}"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let a = CsrMatrix::from_triplets(3, 2, &[(0, 1, Complex64::new(1.5, -2.0)), (2, 0, Complex64::new(1e-300, 3.25))]).unwrap();
        let s = matrix_market_string(&a);
        assert!(s.starts_with("%%MatrixMarket matrix coordinate complex general\n3 2 2\n"));
        let b = parse_matrix_market(&s).unwrap();
        assert_eq!(a.max_abs_diff(&b), Some(0.0));
    }

    #[test]
    fn vector_round_trip() {
        let x = vec![Complex64::new(0.1, 0.2), Complex64::new(-1e10, 3.0)];
        assert_eq!(parse_vector(&vector_string(&x)).unwrap(), x);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(parse_matrix_market("hello").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n2 2 1\n0 1 1 0\n").is_err());
        assert!(parse_vector("1 2 3").is_err());
    }
}
