//! Natural cubic smoothing-spline internals.
//!
//! The penalty is the Green-Silverman `K = Q R^{-1} Q^T`, but `K` is never
//! materialized: the hat matrix is computed in the Reinsch form
//! `(I + lambda K)^{-1} = I - lambda Q (R + lambda Q^T Q)^{-1} Q^T`,
//! whose inner matrix scales like `1/gap^2` instead of `1/gap^3` and stays
//! positive definite for tightly jittered tied knots and large `lambda`.
//!
//! Everything here works on knots already sorted ascending and strictly
//! distinct; `smoothers` handles ordering, tie jitter and permutation back
//! to the caller's data order.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{Cholesky, Mat};

/// Knot gaps plus the banded penalty factors built from them.
struct Penalty {
    /// knot gaps `h_i = t_{i+1} - t_i`, length n-1
    gaps: Vec<f64>,
}

impl Penalty {
    fn new(knots: &[f64]) -> Self {
        let gaps = knots.windows(2).map(|w| w[1] - w[0]).collect();
        Penalty { gaps }
    }

    fn n(&self) -> usize {
        self.gaps.len() + 1
    }

    /// `Q^T v` for a length-n vector, yielding length n-2.
    fn qt_mul(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n - 2];
        for j in 0..(n - 2) {
            let h0 = self.gaps[j];
            let h1 = self.gaps[j + 1];
            out[j] = v[j] / h0 - v[j + 1] * (1.0 / h0 + 1.0 / h1) + v[j + 2] / h1;
        }
        out
    }

    /// `Q v` for a length-(n-2) vector, yielding length n.
    fn q_mul(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for j in 0..(n - 2) {
            let h0 = self.gaps[j];
            let h1 = self.gaps[j + 1];
            out[j] += v[j] / h0;
            out[j + 1] -= v[j] * (1.0 / h0 + 1.0 / h1);
            out[j + 2] += v[j] / h1;
        }
        out
    }

    /// Solve the tridiagonal SPD system `R z = rhs` (Thomas algorithm).
    fn solve_r(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.n() - 2;
        debug_assert_eq!(rhs.len(), m);
        if m == 0 {
            return Vec::new();
        }
        let diag = |j: usize| (self.gaps[j] + self.gaps[j + 1]) / 3.0;
        let off = |j: usize| self.gaps[j + 1] / 6.0; // between rows j and j+1
        let mut c_prime = vec![0.0; m];
        let mut d_prime = vec![0.0; m];
        c_prime[0] = if m > 1 { off(0) / diag(0) } else { 0.0 };
        d_prime[0] = rhs[0] / diag(0);
        for j in 1..m {
            let denom = diag(j) - off(j - 1) * c_prime[j - 1];
            if j + 1 < m {
                c_prime[j] = off(j) / denom;
            }
            d_prime[j] = (rhs[j] - off(j - 1) * d_prime[j - 1]) / denom;
        }
        let mut z = vec![0.0; m];
        z[m - 1] = d_prime[m - 1];
        for j in (0..m - 1).rev() {
            z[j] = d_prime[j] - c_prime[j] * z[j + 1];
        }
        z
    }

    /// Dense `B = R + lambda Q^T Q`, the Reinsch system matrix. Banded with
    /// two off-diagonals on each side.
    fn reinsch_matrix(&self, lambda: f64) -> Mat {
        let m = self.n() - 2;
        let inv: Vec<f64> = self.gaps.iter().map(|h| 1.0 / h).collect();
        let mut b = Mat::zeros(m, m);
        for j in 0..m {
            let d = -(inv[j] + inv[j + 1]); // middle entry of column j
            let r_diag = (self.gaps[j] + self.gaps[j + 1]) / 3.0;
            b.set(
                j,
                j,
                r_diag + lambda * (inv[j] * inv[j] + d * d + inv[j + 1] * inv[j + 1]),
            );
            if j + 1 < m {
                let d_next = -(inv[j + 1] + inv[j + 2]);
                let r_off = self.gaps[j + 1] / 6.0;
                let qq = d * inv[j + 1] + inv[j + 1] * d_next;
                let v = r_off + lambda * qq;
                b.set(j, j + 1, v);
                b.set(j + 1, j, v);
            }
            if j + 2 < m {
                let qq = inv[j + 1] * inv[j + 2];
                let v = lambda * qq;
                b.set(j, j + 2, v);
                b.set(j + 2, j, v);
            }
        }
        b
    }
}

/// Hat matrix `(I + lambda K)^{-1}` at sorted distinct knots, symmetrized.
pub(crate) fn hat_matrix(knots: &[f64], lambda: f64) -> Mat {
    let n = knots.len();
    if lambda == 0.0 || n < 3 {
        // no penalty, or a penalty with empty interior: interpolation
        return Mat::identity(n);
    }
    let penalty = Penalty::new(knots);
    let chol =
        Cholesky::new(&penalty.reinsch_matrix(lambda)).expect("R + lambda Q'Q is positive definite");
    // hat = I - lambda Q B^{-1} Q^T, column by column
    let mut hat = Mat::identity(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let mut rhs = penalty.qt_mul(&e);
        chol.solve_in_place(&mut rhs);
        let col = penalty.q_mul(&rhs);
        for i in 0..n {
            hat.add_at(i, j, -lambda * col[i]);
        }
    }
    hat.symmetrize();
    hat
}

/// Weights `w` such that `w . z` is the smoothing-spline fit at `x_eval`,
/// where `z` is the response at the sorted knots. Points outside the knot
/// range use the spline's natural linear extension.
pub(crate) fn eval_rows(knots: &[f64], lambda: f64, x_eval: &[f64]) -> Mat {
    let n = knots.len();
    let penalty = Penalty::new(knots);

    // ell(x): linear functional giving the natural-spline interpolant at x
    // in terms of its values at the knots.
    let interp_row = |x: f64| -> Vec<f64> {
        let mut alpha = vec![0.0; n]; // direct value weights
        let mut beta = vec![0.0; n.saturating_sub(2)]; // second-derivative weights
        if n == 2 {
            let h = knots[1] - knots[0];
            let t = (x - knots[0]) / h;
            alpha[0] = 1.0 - t;
            alpha[1] = t;
            return alpha;
        }
        if x <= knots[0] {
            // linear extension: g(t0) - (t0 - x) g'(t0)
            let h0 = penalty.gaps[0];
            let dist = knots[0] - x;
            alpha[0] = 1.0 + dist / h0;
            alpha[1] = -dist / h0;
            beta[0] = dist * h0 / 6.0;
        } else if x >= knots[n - 1] {
            let hm = penalty.gaps[n - 2];
            let dist = x - knots[n - 1];
            alpha[n - 1] = 1.0 + dist / hm;
            alpha[n - 2] = -dist / hm;
            beta[n - 3] = dist * hm / 6.0;
        } else {
            // interval [t_i, t_{i+1}] containing x
            let mut i = match knots.binary_search_by(|k| k.partial_cmp(&x).unwrap()) {
                Ok(pos) => pos,
                Err(pos) => pos - 1,
            };
            if i >= n - 1 {
                i = n - 2;
            }
            let h = penalty.gaps[i];
            let a = knots[i + 1] - x;
            let b = x - knots[i];
            alpha[i] = a / h;
            alpha[i + 1] = b / h;
            // second-derivative terms; gamma_0 = gamma_{n-1} = 0 (natural)
            let w_i = -(a * b) / 6.0 * (1.0 + a / h);
            let w_ip1 = -(a * b) / 6.0 * (1.0 + b / h);
            if i >= 1 {
                beta[i - 1] += w_i;
            }
            if i < n - 2 {
                beta[i] += w_ip1;
            }
        }
        // alpha + Q R^{-1} beta  (the gamma coefficients are R^{-1} Q^T values)
        let z = penalty.solve_r(&beta);
        let q_z = penalty.q_mul(&z);
        for (a, q) in alpha.iter_mut().zip(q_z.iter()) {
            *a += q;
        }
        alpha
    };

    let mut rows = Mat::zeros(x_eval.len(), n);
    if lambda == 0.0 || n < 3 {
        for (r, &x) in x_eval.iter().enumerate() {
            let ell = interp_row(x);
            rows.row_mut(r).copy_from_slice(&ell);
        }
        return rows;
    }

    let chol =
        Cholesky::new(&penalty.reinsch_matrix(lambda)).expect("R + lambda Q'Q is positive definite");
    for (r, &x) in x_eval.iter().enumerate() {
        // row on z is ell(x) (I + lambda K)^{-1}; the hat matrix is symmetric
        // so apply it directly: w = ell - lambda Q B^{-1} Q^T ell
        let ell = interp_row(x);
        let mut rhs = penalty.qt_mul(&ell);
        chol.solve_in_place(&mut rhs);
        let corr = penalty.q_mul(&rhs);
        let out = rows.row_mut(r);
        for i in 0..n {
            out[i] = ell[i] - lambda * corr[i];
        }
    }
    rows
}
