//! Dense helpers for real symmetric matrices stored row-major in flat slices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Tolerance under which an asymmetric input is silently symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn side_of(len: usize) -> Option<usize> {
    let side = (len as f64).sqrt().round() as usize;
    (side * side == len).then_some(side)
}

pub fn to_matrix(coords: &[f64], side: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(side, side, coords)
}

pub fn to_coords(m: &DMatrix<f64>) -> Vec<f64> {
    let (rows, cols) = m.shape();
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn identity_coords(side: usize, scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; side * side];
    for i in 0..side {
        out[i * side + i] = scale;
    }
    out
}

pub fn trace(coords: &[f64], side: usize) -> f64 {
    (0..side).map(|i| coords[i * side + i]).sum()
}

pub fn max_asymmetry(coords: &[f64], side: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..side {
        for j in (i + 1)..side {
            worst = worst.max((coords[i * side + j] - coords[j * side + i]).abs());
        }
    }
    worst
}

pub fn symmetrize(coords: &[f64], side: usize) -> Vec<f64> {
    let mut out = coords.to_vec();
    for i in 0..side {
        for j in (i + 1)..side {
            let avg = 0.5 * (coords[i * side + j] + coords[j * side + i]);
            out[i * side + j] = avg;
            out[j * side + i] = avg;
        }
    }
    out
}

/// Symmetrizes when the asymmetry is below [`SYMMETRY_TOL`], rejects otherwise.
pub fn require_symmetric(coords: &[f64], side: usize) -> Result<Vec<f64>> {
    let dev = max_asymmetry(coords, side);
    if dev > SYMMETRY_TOL {
        return Err(Error::Asymmetric(dev));
    }
    Ok(symmetrize(coords, side))
}

/// Eigenvalues and orthonormal eigenvectors (as columns) of a symmetric matrix.
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    /// Reassembles `V diag(f(λ)) Vᵀ` in row-major order.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mapped = DVector::from_iterator(self.values.len(), self.values.iter().map(|&l| f(l)));
        let m = &self.vectors * DMatrix::from_diagonal(&mapped) * self.vectors.transpose();
        to_coords(&m)
    }

    /// Reassembles `V diag(values) Vᵀ` with replacement eigenvalues given in order.
    pub fn rebuild(&self, values: &[f64]) -> Vec<f64> {
        let mapped = DVector::from_column_slice(values);
        let m = &self.vectors * DMatrix::from_diagonal(&mapped) * self.vectors.transpose();
        to_coords(&m)
    }

    pub fn min(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, &v) in self.values.iter().enumerate() {
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn sym_eigen(coords: &[f64], side: usize) -> Result<Spectrum> {
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite matrix entry".into()));
    }
    let m = to_matrix(&symmetrize(coords, side), side);
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("iteration limit reached".into()))?;
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    Ok(Spectrum {
        values,
        vectors: eig.eigenvectors,
    })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix.
pub fn spectral_norm(coords: &[f64], side: usize) -> Result<f64> {
    let s = sym_eigen(coords, side)?;
    Ok(s.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reassemble_identity_roundtrip() {
        let m = vec![2.0, 1.0, 1.0, 3.0];
        let s = sym_eigen(&m, 2).unwrap();
        let back = s.reassemble(|l| l);
        for (a, b) in m.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_input_rejected() {
        let m = vec![1.0, 0.5, 0.0, 1.0];
        assert!(matches!(
            require_symmetric(&m, 2),
            Err(Error::Asymmetric(_))
        ));
        let tiny = vec![1.0, 0.5, 0.5 + 1e-14, 1.0];
        assert!(require_symmetric(&tiny, 2).is_ok());
    }

    #[test]
    fn side_detection() {
        assert_eq!(side_of(9), Some(3));
        assert_eq!(side_of(8), None);
    }
}
