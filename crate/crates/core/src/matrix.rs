use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A symmetric `p x p` matrix stored as its packed lower triangle.
///
/// Serializes as a full row-major nested array.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    lower: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            lower: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// Fills the lower triangle from `f(i, j)` with `i >= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut lower = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                lower.push(f(i, j));
            }
        }
        Self { dim, lower }
    }

    pub(crate) fn from_packed(dim: usize, lower: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len(), dim * (dim + 1) / 2);
        Self { dim, lower }
    }

    /// From full rows. Rejects non-square input, asymmetry beyond
    /// `1e-12 * max|a|` and non-finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension(format!(
                "row of length {} in a {dim}x{dim} matrix",
                r.len()
            )));
        }
        let scale = rows
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        value: v,
                        context: format!("matrix entry ({i}, {j})"),
                    });
                }
                if (v - rows[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::Dimension(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[packed(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.lower[packed(i, j)] = v;
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Entrywise `self + w * other`.
    pub fn add_scaled(&self, w: f64, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a + w * b)
                .collect(),
        })
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .lower
            .iter()
            .zip(&other.lower)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_dmatrix())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// PSD up to `-tol * max(trace, tiny)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol * self.trace().abs().max(f64::MIN_POSITIVE)
    }

    pub(crate) fn check_psd(&self, what: &'static str) -> Result<()> {
        if self.is_psd(1e-10) {
            Ok(())
        } else {
            Err(Error::NotPsd {
                what,
                min_eigenvalue: self.min_eigenvalue(),
            })
        }
    }

    fn check_same_dim(&self, other: &SymmetricMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        Ok(())
    }
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymmetricMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymmetricMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_access_is_symmetric() {
        let m = SymmetricMatrix::from_fn(3, |i, j| (10 * i + j) as f64);
        assert_eq!(m.get(2, 1), 21.0);
        assert_eq!(m.get(1, 2), 21.0);
        assert_eq!(m.to_rows()[0], vec![0.0, 10.0, 20.0]);
    }

    #[test]
    fn from_rows_validates() {
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).is_err());
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(SymmetricMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        let m = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let ev = m.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        assert!(m.is_psd(1e-10));
    }

    #[test]
    fn detects_indefinite() {
        let m = SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(!m.is_psd(1e-10));
        assert!(m.check_psd("m").is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = SymmetricMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 3.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,0.5],[0.5,3.0]]");
        assert_eq!(serde_json::from_str::<SymmetricMatrix>(&s).unwrap(), m);
    }
}
