//! Dense row-major `f64` matrices plus the one factorization the crate
//! needs directly (Cholesky, for the spline hat matrix).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline(always)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline(always)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline(always)]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    #[inline(always)]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline(always)]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(v, &mut out);
        out
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        assert_eq!(out.len(), self.rows, "matvec output length mismatch");
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), v);
        }
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.at(j, i))
    }

    /// Replace the matrix by `(M + M^T) / 2`. Square matrices only.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols, "symmetrize needs a square matrix");
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self.at(i, j) + self.at(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    /// Largest `|M_ij - M_ji|` over all pairs.
    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max(fmath::abs(self.at(i, j) - self.at(j, i)));
            }
        }
        worst
    }

    /// Largest entrywise absolute difference against `other`.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max(fmath::abs(a - b)))
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x * y;
    }
    acc
}

/// Error raised by the dense factorizations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixError {
    /// Cholesky hit a non-positive pivot; the matrix is not positive definite.
    NotPositiveDefinite,
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::NotPositiveDefinite => {
                write!(f, "matrix is not positive definite")
            }
        }
    }
}

impl core::error::Error for MatrixError {}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Mat,
}

impl Cholesky {
    pub fn new(a: &Mat) -> Result<Self, MatrixError> {
        assert_eq!(a.rows(), a.cols(), "Cholesky needs a square matrix");
        let n = a.rows();
        let mut l = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = a.at(i, j);
                for k in 0..j {
                    s -= l.at(i, k) * l.at(j, k);
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(MatrixError::NotPositiveDefinite);
                    }
                    l.set(i, j, fmath::sqrt(s));
                } else {
                    l.set(i, j, s / l.at(j, j));
                }
            }
        }
        Ok(Cholesky { l })
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        // forward: L z = b
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l.at(i, k) * b[k];
            }
            b[i] = s / self.l.at(i, i);
        }
        // backward: L^T x = z
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l.at(k, i) * b[k];
            }
            b[i] = s / self.l.at(i, i);
        }
    }

    /// Dense inverse `A^{-1}`, column by column.
    pub fn inverse(&self) -> Mat {
        let n = self.l.rows();
        let mut inv = Mat::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_matmul_agree() {
        let a = Mat::from_fn(3, 3, |i, j| (i * 3 + j) as f64 + 1.0);
        let v = [1.0, -2.0, 0.5];
        let got = a.matvec(&v);
        assert_eq!(got, vec![-1.5, -3.0, -4.5]);

        let b = Mat::from_fn(3, 2, |i, j| (i as f64) - (j as f64));
        let c = a.matmul(&b);
        // spot-check one entry: row 1 of a times col 0 of b
        assert_eq!(c.at(1, 0), 4.0 * 0.0 + 5.0 * 1.0 + 6.0 * 2.0);
    }

    #[test]
    fn symmetrize_and_asymmetry() {
        let mut m = Mat::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { 2.0 } else { 1.0 });
        assert_eq!(m.max_asymmetry(), 1.0);
        m.symmetrize();
        assert_eq!(m.max_asymmetry(), 0.0);
        assert_eq!(m.at(0, 1), 1.5);
        assert_eq!(m.at(1, 0), 1.5);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        // A = B B^T + I is SPD
        let b = Mat::from_fn(4, 4, |i, j| ((i + 2 * j) % 5) as f64 / 5.0);
        let mut a = b.matmul(&b.transpose());
        for i in 0..4 {
            a.add_at(i, i, 1.0);
        }
        let chol = Cholesky::new(&a).unwrap();
        let x_true = [1.0, -1.0, 2.0, 0.25];
        let mut rhs = a.matvec(&x_true);
        chol.solve_in_place(&mut rhs);
        for (got, want) in rhs.iter().zip(x_true.iter()) {
            assert!((got - want).abs() < 1e-12);
        }
        let inv = chol.inverse();
        let prod = a.matmul(&inv);
        assert!(prod.max_abs_diff(&Mat::identity(4)) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = Mat::identity(2);
        a.set(1, 1, -1.0);
        assert_eq!(
            Cholesky::new(&a).unwrap_err(),
            MatrixError::NotPositiveDefinite
        );
    }
}
