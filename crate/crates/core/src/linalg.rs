//! Dense Hermitian matrices and the eigensolver glue shared by the modules.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance for the Hermiticity invariant.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |A - A^†| / max |A|`, or the absolute defect when `A` vanishes.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    let scale = max_abs(m);
    if scale > 0.0 { defect / scale } else { defect }
}

/// Ascending eigenvalues of a Hermitian matrix.
///
/// Purely real input is routed through the real symmetric solver, which is
/// several times cheaper.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut eig: Vec<f64> = if m.iter().all(|z| z.im == 0.0) {
        let re = m.map(|z| z.re);
        re.symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    eig.sort_by(f64::total_cmp);
    eig
}

/// A dense Hermitian matrix with one label per basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
    basis_labels: Vec<String>,
}

impl HermitianMatrix {
    pub fn new(data: DMatrix<C64>, basis_labels: Vec<String>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch { expected: data.nrows(), found: data.ncols() });
        }
        if data.nrows() == 0 {
            return Err(Error::param("data", "matrix must be non-empty"));
        }
        if basis_labels.len() != data.nrows() {
            return Err(Error::DimensionMismatch { expected: data.nrows(), found: basis_labels.len() });
        }
        let defect = hermiticity_defect(&data);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { data, basis_labels })
    }

    pub fn dimension(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.data)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.data)
    }
}

/// JSON form: entries are `[re, im]` pairs in row-major order.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dimension: usize,
    basis_labels: Vec<String>,
    data: Vec<[f64; 2]>,
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dimension();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.data[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixRepr { dimension: n, basis_labels: self.basis_labels.clone(), data }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let n = repr.dimension;
        if repr.data.len() != n * n {
            return Err(serde::de::Error::custom(format!(
                "expected {} entries, found {}",
                n * n,
                repr.data.len()
            )));
        }
        let data = DMatrix::from_row_iterator(n, n, repr.data.iter().map(|&[re, im]| C64::new(re, im)));
        HermitianMatrix::new(data, repr.basis_labels).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_y_eigenvalues() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        let h = HermitianMatrix::new(m, vec!["0".into(), "1".into()]).unwrap();
        let eig = h.eigenvalues();
        assert!((eig[0] + 1.0).abs() < 1e-14 && (eig[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(HermitianMatrix::new(m, vec!["a".into(), "b".into()]), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn json_is_row_major_pairs() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(0.0, -2.0), C64::new(3.0, 0.0)]);
        let h = HermitianMatrix::new(m, vec!["a".into(), "b".into()]).unwrap();
        let js = serde_json::to_value(&h).unwrap();
        assert_eq!(js["data"], serde_json::json!([[1.0, 0.0], [0.0, 2.0], [0.0, -2.0], [3.0, 0.0]]));
        let back: HermitianMatrix = serde_json::from_value(js).unwrap();
        assert_eq!(back, h);
    }
}
