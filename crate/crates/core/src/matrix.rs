//! Row-major conversions between `DMatrix` and nested vectors, the matrix
//! representation used in scenario and gains documents.

use nalgebra::{DMatrix, DVector};

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Builds a matrix from rows; `cols` fixes the column count of an empty
/// (zero-row) matrix.
pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<DMatrix<f64>, String> {
    let Some(first) = rows.first() else {
        return Ok(DMatrix::zeros(0, cols));
    };
    let c = first.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != c) {
        return Err(format!("row {i} has {} entries, expected {c}", r.len()));
    }
    if let Some(v) = rows.iter().flatten().find(|v| !v.is_finite()) {
        return Err(format!("non-finite entry {v}"));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), c, rows.iter().flatten().copied()))
}

pub fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn from_vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let rows = to_rows(&m);
        assert_eq!(rows, vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        assert_eq!(from_rows(&rows, 0).unwrap(), m);
    }

    #[test]
    fn ragged_and_empty() {
        assert!(from_rows(&[vec![1.0], vec![1.0, 2.0]], 0).is_err());
        assert_eq!(from_rows(&[], 3).unwrap().shape(), (0, 3));
        assert_eq!(from_rows(&[vec![], vec![]], 0).unwrap().shape(), (2, 0));
    }
}
