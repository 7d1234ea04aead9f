//! Dense vectors and matrices in 64-bit floats, plus the two eigen-extremes
//! (smallest symmetric eigenvalue, largest singular value) everything else
//! is built on. Sized for desk-scale problems (n up to a few hundred), not
//! large-scale solvers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TronError};

/// Absolute tolerance accepted from the dense eigensolver.
pub const EIG_TOL: f64 = 1e-10;

/// Leaky ReLU: identity on the nonnegative half-line, slope `alpha` below it.
///
/// `alpha = 0` recovers the plain ReLU.
#[inline]
pub fn leaky_relu(z: f64, alpha: f64) -> f64 {
    debug_assert!(alpha >= 0.0);
    if z >= 0.0 {
        z
    } else {
        alpha * z
    }
}

/// Plain ReLU gate.
#[inline]
pub fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

/// Strict positive-part indicator; ties at exactly zero take the false branch.
#[inline]
pub fn indicator_pos(z: f64) -> bool {
    z > 0.0
}

/// Dense real vector with all entries finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(TronError::InvalidParameter {
                name: "RealVector",
                detail: "dimension must be positive".into(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(TronError::NonFinite("RealVector entry"));
        }
        Ok(RealVector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        RealVector(vec![0.0; dim])
    }

    /// Standard basis vector e_i in dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        RealVector(v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn dot(&self, other: &RealVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn add(&self, other: &RealVector) -> RealVector {
        assert_eq!(self.dim(), other.dim(), "add: dimension mismatch");
        RealVector(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &RealVector) -> RealVector {
        assert_eq!(self.dim(), other.dim(), "sub: dimension mismatch");
        RealVector(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> RealVector {
        RealVector(self.0.iter().map(|v| c * v).collect())
    }

    pub fn neg(&self) -> RealVector {
        self.scale(-1.0)
    }

    /// In-place `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &RealVector) {
        assert_eq!(self.dim(), other.dim(), "axpy: dimension mismatch");
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += c * b;
        }
    }

    pub fn distance_sq(&self, other: &RealVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "distance_sq: dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl From<&[f64]> for RealVector {
    fn from(s: &[f64]) -> Self {
        RealVector::new(s.to_vec()).expect("finite, non-empty slice")
    }
}

/// Dense row-major real matrix with all entries finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    entries: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(TronError::InvalidParameter {
                name: "RealMatrix",
                detail: "rows and cols must be positive".into(),
            });
        }
        if entries.len() != rows * cols {
            return Err(TronError::DimensionMismatch {
                context: "RealMatrix::new",
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(TronError::NonFinite("RealMatrix entry"));
        }
        Ok(RealMatrix {
            entries,
            rows,
            cols,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix {
            entries: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RealMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = RealMatrix::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, *d);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(TronError::InvalidParameter {
                name: "RealMatrix",
                detail: "rows must be non-empty".into(),
            });
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(TronError::InvalidParameter {
                name: "RealMatrix",
                detail: "ragged rows".into(),
            });
        }
        RealMatrix::new(rows.len(), cols, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| self.entries[r * self.cols..(r + 1) * self.cols].to_vec())
            .collect()
    }

    /// `M x` for a vector of matching dimension.
    pub fn matvec(&self, x: &RealVector) -> RealVector {
        assert_eq!(self.cols, x.dim(), "matvec: dimension mismatch");
        let out = self
            .entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum())
            .collect();
        RealVector(out)
    }

    /// `M^T w` for a vector of dimension `rows`.
    pub fn matvec_t(&self, w: &RealVector) -> RealVector {
        assert_eq!(self.rows, w.dim(), "matvec_t: dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let wr = w.get(r);
            let row = &self.entries[r * self.cols..(r + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += wr * a;
            }
        }
        RealVector(out)
    }

    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, other.rows, "matmul: dimension mismatch");
        let mut out = RealMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.entries[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> RealMatrix {
        let mut out = RealMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn add(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add: shape mismatch"
        );
        RealMatrix {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn sub(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "sub: shape mismatch"
        );
        RealMatrix {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn scale(&self, c: f64) -> RealMatrix {
        RealMatrix {
            entries: self.entries.iter().map(|v| c * v).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// In-place rank-one update `self += c * x x^T`.
    pub fn add_outer(&mut self, c: f64, x: &RealVector) {
        assert_eq!(self.rows, self.cols, "add_outer: square matrix required");
        assert_eq!(self.rows, x.dim(), "add_outer: dimension mismatch");
        let n = self.rows;
        for i in 0..n {
            let ci = c * x.get(i);
            for j in 0..n {
                self.entries[i * n + j] += ci * x.get(j);
            }
        }
    }

    /// Symmetric part `(S + S^T) / 2`; errors on non-square input.
    pub fn symmetric_part(&self) -> Result<RealMatrix> {
        if self.rows != self.cols {
            return Err(TronError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.add(&self.transpose()).scale(0.5))
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Smallest eigenvalue of the symmetric part of `s`.
///
/// Positivity statements on products like `A_bar Sigma M^T` are quadratic-form
/// statements, so only the symmetric part matters; the input is symmetrized
/// before the eigensolve. Errors on non-square input.
pub fn lambda_min_symmetric(s: &RealMatrix) -> Result<f64> {
    Ok(lambda_min_symmetric_with_vector(s)?.0)
}

/// As [`lambda_min_symmetric`] but also returns a unit eigenvector attaining
/// the bottom eigenvalue (used for Rayleigh-quotient error bars).
pub fn lambda_min_symmetric_with_vector(s: &RealMatrix) -> Result<(f64, RealVector)> {
    let sym = s.symmetric_part()?;
    let eig = nalgebra::SymmetricEigen::new(sym.to_nalgebra());
    let mut min_val = f64::INFINITY;
    let mut min_idx = 0;
    for (i, v) in eig.eigenvalues.iter().enumerate() {
        if *v < min_val {
            min_val = *v;
            min_idx = i;
        }
    }
    let col = eig.eigenvectors.column(min_idx);
    let vec = RealVector(col.iter().copied().collect());
    Ok((min_val, vec))
}

/// Largest singular value `sqrt(lambda_max(A A^T))`.
pub fn spectral_norm(a: &RealMatrix) -> f64 {
    let m = a.to_nalgebra();
    m.singular_values().max()
}

#[allow(dead_code)]
fn dvector(v: &RealVector) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn leaky_relu_positive_branch_is_identity() {
        assert_eq!(leaky_relu(3.0, 0.1), 3.0);
    }

    #[test]
    fn leaky_relu_negative_branch_scales() {
        assert_eq!(leaky_relu(-2.0, 0.1), -0.2);
    }

    #[test]
    fn leaky_relu_kink_value_is_zero() {
        assert_eq!(leaky_relu(0.0, 0.7), 0.0);
    }

    #[test]
    fn lambda_min_of_identity_is_one() {
        let i3 = RealMatrix::identity(3);
        assert_abs_diff_eq!(lambda_min_symmetric(&i3).unwrap(), 1.0, epsilon = EIG_TOL);
    }

    #[test]
    fn lambda_min_of_diagonal_picks_smallest() {
        let d = RealMatrix::from_diag(&[2.0, 0.5, 7.0]);
        assert_abs_diff_eq!(lambda_min_symmetric(&d).unwrap(), 0.5, epsilon = EIG_TOL);
    }

    #[test]
    fn lambda_min_of_sixth_identity_2x2() {
        // limit covariance of the boxed example at zero corruption
        let s = RealMatrix::from_diag(&[1.0 / 6.0, 1.0 / 6.0]);
        assert_abs_diff_eq!(
            lambda_min_symmetric(&s).unwrap(),
            1.0 / 6.0,
            epsilon = EIG_TOL
        );
    }

    #[test]
    fn lambda_min_rejects_non_square() {
        let m = RealMatrix::zeros(2, 3);
        assert!(matches!(
            lambda_min_symmetric(&m),
            Err(TronError::NotSquare { .. })
        ));
    }

    #[test]
    fn spectral_norm_of_identity_is_one() {
        for n in [1, 3, 5] {
            assert_abs_diff_eq!(spectral_norm(&RealMatrix::identity(n)), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectral_norm_takes_absolute_diagonal() {
        let d = RealMatrix::from_diag(&[3.0, -4.0]);
        assert_abs_diff_eq!(spectral_norm(&d), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn spectral_norm_nilpotent_2x2() {
        // [[0,2],[0,0]] has singular values {2, 0} (hand SVD)
        let m = RealMatrix::new(2, 2, vec![0.0, 2.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(spectral_norm(&m), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn vector_rejects_non_finite() {
        assert!(RealVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(RealVector::new(vec![f64::INFINITY]).is_err());
        assert!(RealVector::new(vec![]).is_err());
    }

    #[test]
    fn matvec_t_matches_transpose_matvec() {
        let m = RealMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let w = RealVector::new(vec![1.0, -1.0]).unwrap();
        let direct = m.matvec_t(&w);
        let via_transpose = m.transpose().matvec(&w);
        assert_eq!(direct, via_transpose);
    }

    proptest! {
        // Rayleigh quotient of any unit vector sits above the bottom eigenvalue.
        #[test]
        fn rayleigh_quotient_lower_bound(
            entries in proptest::collection::vec(-5.0f64..5.0, 9),
            raw in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let s = RealMatrix::new(3, 3, entries).unwrap().symmetric_part().unwrap();
            let norm: f64 = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-6);
            let v = RealVector::new(raw).unwrap().scale(1.0 / norm);
            let quad = v.dot(&s.matvec(&v));
            let lmin = lambda_min_symmetric(&s).unwrap();
            prop_assert!(quad >= lmin - 1e-8, "quad {} < lambda_min {}", quad, lmin);
        }

        // Operator norm dominates every Rayleigh ratio ||Av|| / ||v||.
        #[test]
        fn spectral_norm_dominates_ratios(
            entries in proptest::collection::vec(-5.0f64..5.0, 6),
            raw in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let a = RealMatrix::new(2, 3, entries).unwrap();
            let norm: f64 = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-6);
            let v = RealVector::new(raw).unwrap();
            let ratio = a.matvec(&v).norm() / v.norm();
            prop_assert!(ratio <= spectral_norm(&a) + 1e-8);
        }

        // sigma(z) - sigma(-z) = (1 + alpha) z, the reflection identity behind
        // the symmetric-set gradient computation.
        #[test]
        fn leaky_relu_reflection_identity(z in -1e3f64..1e3, alpha in 0.0f64..2.0) {
            let lhs = leaky_relu(z, alpha) - leaky_relu(-z, alpha);
            let rhs = (1.0 + alpha) * z;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }
}
