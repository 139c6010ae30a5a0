//! JSON encoding of complex matrices.
//!
//! Entries are `[re, im]` pairs or bare real numbers. A matrix is either a
//! flat row-major list of `k*k` entries or a list of `k` rows. Output always
//! uses the flat `[re, im]` form.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexEntry> for Complex64 {
    fn from(e: ComplexEntry) -> Self {
        match e {
            ComplexEntry::Pair([re, im]) => Complex64::new(re, im),
            ComplexEntry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Rows(Vec<Vec<ComplexEntry>>),
    Flat(Vec<ComplexEntry>),
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let mut flat = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                flat.push(ComplexEntry::Pair([z.re, z.im]));
            }
        }
        MatrixJson::Flat(flat)
    }

    /// Converts to a `dim x dim` matrix, rejecting other shapes and non-finite entries.
    pub fn to_matrix(&self, dim: usize) -> Result<DMatrix<Complex64>> {
        let entries: Vec<Complex64> = match self {
            MatrixJson::Flat(v) => {
                if v.len() != dim * dim {
                    return Err(Error::invalid(format!(
                        "matrix has {} entries, expected {}",
                        v.len(),
                        dim * dim
                    )));
                }
                v.iter().map(|&e| e.into()).collect()
            }
            // a flat list of [re, im] pairs also parses as rows of two reals
            MatrixJson::Rows(rows)
                if dim > 1
                    && rows.len() == dim * dim
                    && rows.iter().all(|r| r.len() == 2 && r.iter().all(|e| matches!(e, ComplexEntry::Real(_)))) =>
            {
                rows.iter()
                    .map(|r| match (r[0], r[1]) {
                        (ComplexEntry::Real(re), ComplexEntry::Real(im)) => Complex64::new(re, im),
                        _ => unreachable!(),
                    })
                    .collect()
            }
            MatrixJson::Rows(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::invalid(format!("matrix is not {dim}x{dim}")));
                }
                rows.iter().flatten().map(|&e| e.into()).collect()
            }
        };
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        Ok(DMatrix::from_row_slice(dim, dim, &entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_rows_flat_and_bare_reals() {
        let rows: MatrixJson = serde_json::from_str("[[1, [0, 2]], [[0, -2], 3]]").unwrap();
        let flat: MatrixJson = serde_json::from_str("[[1,0],[0,2],[0,-2],[3,0]]").unwrap();
        assert_eq!(rows.to_matrix(2).unwrap(), flat.to_matrix(2).unwrap());
        assert!(flat.to_matrix(3).is_err());
    }
}
