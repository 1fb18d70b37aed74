//! Spectral form of the boosting operator.
//!
//! For a symmetric smoother `S = U diag(lambda) U^T`, `b` boosting iterations
//! realize `U diag(1 - (1 - lambda_k)^(b+1)) U^T`. Truncating to the top `d`
//! eigenpairs gives the low-rank operator whose storage is `O(n d)` instead
//! of `O(n^2)`; this module provides the decomposition, the (possibly
//! truncated) operator, its approximation error, and the squared-bias /
//! variance profile of the boosting estimate.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::eigen::{self, EigenError};
use crate::fmath;
use crate::matrix::Mat;
use crate::smoothers::{Smoother, SmootherKind, SmootherMatrix, SmootherParams};

/// Tolerance for eigenvalues of projection/spline smoothers straying outside
/// `[0, 1]`. Inside the band they are clipped; outside it is an error, since
/// silent clipping would mask construction bugs.
const EIGENVALUE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    /// The smoother is not flagged symmetric; use [`nonsymmetric_spectrum`].
    NotSymmetric,
    /// An eigenvalue lies outside `[-1e-8, 1 + 1e-8]`.
    EigenvalueOutOfRange { index: usize, value: f64 },
    RankOutOfRange { rank: usize, n: usize },
    LengthMismatch { expected: usize, got: usize },
    Eigen(EigenError),
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::NotSymmetric => write!(
                f,
                "smoother is not symmetric; use the nonsymmetric spectrum diagnostic"
            ),
            SpectralError::EigenvalueOutOfRange { index, value } => write!(
                f,
                "eigenvalue {index} = {value} outside [0, 1] beyond tolerance"
            ),
            SpectralError::RankOutOfRange { rank, n } => {
                write!(f, "rank {rank} out of range 1..={n}")
            }
            SpectralError::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            SpectralError::Eigen(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SpectralError {}

impl From<EigenError> for SpectralError {
    fn from(e: EigenError) -> Self {
        SpectralError::Eigen(e)
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric
/// smoother, with the source smoother's metadata.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// column `k` pairs with `eigenvalues[k]`
    vectors: Mat,
    source_kind: SmootherKind,
    source_params: SmootherParams,
}

impl SpectralDecomposition {
    #[inline]
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    #[inline]
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    #[inline]
    pub fn vectors(&self) -> &Mat {
        &self.vectors
    }

    pub fn source_kind(&self) -> SmootherKind {
        self.source_kind
    }

    pub fn source_params(&self) -> &SmootherParams {
        &self.source_params
    }

    /// Eigenvalues clipped into `[0, 1]`; values outside by more than the
    /// tolerance are an error rather than silently clipped.
    pub fn unit_eigenvalues(&self) -> Result<Vec<f64>, SpectralError> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                if value < -EIGENVALUE_SLACK || value > 1.0 + EIGENVALUE_SLACK {
                    Err(SpectralError::EigenvalueOutOfRange { index, value })
                } else {
                    Ok(value.clamp(0.0, 1.0))
                }
            })
            .collect()
    }

    /// `U diag(lambda) U^T`, for reconstruction checks.
    pub fn reconstruct(&self) -> Mat {
        let n = self.n();
        let mut scaled = self.vectors.clone();
        for i in 0..n {
            for k in 0..n {
                let v = scaled.at(i, k) * self.eigenvalues[k];
                scaled.set(i, k, v);
            }
        }
        scaled.matmul(&self.vectors.transpose())
    }

    /// Coefficients `U^T v` of a vector in the eigenbasis.
    pub fn coefficients(&self, v: &[f64]) -> Result<Vec<f64>, SpectralError> {
        if v.len() != self.n() {
            return Err(SpectralError::LengthMismatch {
                expected: self.n(),
                got: v.len(),
            });
        }
        let n = self.n();
        let mut gamma = vec![0.0; n];
        for (k, g) in gamma.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.vectors.at(i, k) * v[i];
            }
            *g = acc;
        }
        Ok(gamma)
    }
}

/// One complex eigenvalue of a general matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEigenvalue {
    pub re: f64,
    pub im: f64,
}

/// Eigendecomposition of a symmetric smoother.
pub fn eigendecompose(s: &SmootherMatrix) -> Result<SpectralDecomposition, SpectralError> {
    if !s.is_symmetric() {
        return Err(SpectralError::NotSymmetric);
    }
    let (eigenvalues, vectors) = eigen::symmetric_eigen(s.weights().clone())?;
    Ok(SpectralDecomposition {
        eigenvalues,
        vectors,
        source_kind: s.kind(),
        source_params: s.params().clone(),
    })
}

/// Complex spectrum of any smoother, sorted by real part descending.
/// Diagnostic only; no eigenvectors are computed.
pub fn nonsymmetric_spectrum(s: &SmootherMatrix) -> Result<Vec<ComplexEigenvalue>, SpectralError> {
    let vals = eigen::general_eigenvalues(s.weights().clone())?;
    Ok(vals
        .into_iter()
        .map(|(re, im)| ComplexEigenvalue { re, im })
        .collect())
}

/// The boosting operator `S_b(d)` truncated to the top `d` eigenpairs.
#[derive(Debug, Clone)]
pub struct LowRankOperator {
    rank: usize,
    /// retained eigenvalues, clipped into `[0, 1]`
    eigenvalues: Vec<f64>,
    /// `n x d` block of retained eigenvectors
    vectors: Mat,
    iterations: usize,
    /// shrink factors `1 - (1 - lambda_k)^(b+1)`
    shrink: Vec<f64>,
}

impl LowRankOperator {
    #[inline]
    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn shrink_factors(&self) -> &[f64] {
        &self.shrink
    }

    /// Dense `n x n` realization, for oracles and small-n export.
    pub fn to_dense(&self) -> Mat {
        let n = self.vectors.rows();
        Mat::from_fn(n, n, |i, j| {
            (0..self.rank)
                .map(|k| self.vectors.at(i, k) * self.shrink[k] * self.vectors.at(j, k))
                .sum()
        })
    }
}

impl Smoother for LowRankOperator {
    fn len(&self) -> usize {
        self.vectors.rows()
    }

    fn smooth_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.vectors.rows();
        assert_eq!(v.len(), n);
        assert_eq!(out.len(), n);
        let mut coeff = vec![0.0; self.rank];
        for (k, c) in coeff.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.vectors.at(i, k) * v[i];
            }
            *c = acc * self.shrink[k];
        }
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..self.rank {
                acc += self.vectors.at(i, k) * coeff[k];
            }
            *o = acc;
        }
    }
}

/// Shrink factor `1 - (1 - lambda)^(b+1)`.
#[inline]
fn shrink_factor(lambda: f64, b: usize) -> f64 {
    1.0 - fmath::powi(1.0 - lambda, b as u64 + 1)
}

/// Boosting operator after `b` iterations, truncated to rank `d`.
pub fn boosting_operator(
    dec: &SpectralDecomposition,
    b: usize,
    d: usize,
) -> Result<LowRankOperator, SpectralError> {
    let n = dec.n();
    if d == 0 || d > n {
        return Err(SpectralError::RankOutOfRange { rank: d, n });
    }
    let unit = dec.unit_eigenvalues()?;
    let eigenvalues: Vec<f64> = unit[..d].to_vec();
    let shrink: Vec<f64> = eigenvalues.iter().map(|&l| shrink_factor(l, b)).collect();
    let vectors = Mat::from_fn(n, d, |i, k| dec.vectors.at(i, k));
    Ok(LowRankOperator {
        rank: d,
        eigenvalues,
        vectors,
        iterations: b,
        shrink,
    })
}

/// Default truncation rank `ceil(c_rank * support_width / h)`, at least 1.
/// Callers clamp to the sample size.
pub fn default_rank(h: f64, support_width: f64, c_rank: f64) -> usize {
    assert!(h > 0.0 && support_width > 0.0 && c_rank > 0.0);
    let d = fmath::ceil(c_rank * support_width / h);
    if d < 1.0 {
        1
    } else {
        d as usize
    }
}

/// Squared Frobenius approximation error
/// `||S_b - S_b(d)||_F^2 = sum_{k > d} (1 - (1 - lambda_k)^(b+1))^2`.
pub fn approximation_error(
    dec: &SpectralDecomposition,
    b: usize,
    d: usize,
) -> Result<f64, SpectralError> {
    let n = dec.n();
    if d > n {
        return Err(SpectralError::RankOutOfRange { rank: d, n });
    }
    let unit = dec.unit_eigenvalues()?;
    Ok(unit[d..]
        .iter()
        .map(|&l| {
            let s = shrink_factor(l, b);
            s * s
        })
        .sum())
}

/// Squared bias and variance of the rank-`d` boosting estimate after `b`
/// iterations against the truth vector `m_true` and noise variance `sigma2`:
///
/// * `bias^2 = n^{-1} sum_{k<=d} gamma_k^2 (1 - lambda_k)^(2(b+1))`
/// * `var    = sigma2 n^{-1} sum_{k<=d} (1 - (1 - lambda_k)^(b+1))^2`
///
/// with `gamma = U^T m_true`.
pub fn bias_variance_profile(
    dec: &SpectralDecomposition,
    m_true: &[f64],
    sigma2: f64,
    b: usize,
    d: usize,
) -> Result<(f64, f64), SpectralError> {
    let n = dec.n();
    if d == 0 || d > n {
        return Err(SpectralError::RankOutOfRange { rank: d, n });
    }
    let unit = dec.unit_eigenvalues()?;
    let gamma = dec.coefficients(m_true)?;
    let mut bias2 = 0.0;
    let mut var = 0.0;
    for k in 0..d {
        let decay = fmath::powi(1.0 - unit[k], 2 * (b as u64 + 1));
        bias2 += gamma[k] * gamma[k] * decay;
        let s = shrink_factor(unit[k], b);
        var += s * s;
    }
    let n_inv = 1.0 / n as f64;
    Ok((bias2 * n_inv, sigma2 * var * n_inv))
}
