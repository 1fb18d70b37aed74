//! Huber-loss machinery: the pseudo-data fixed-point fitter, robustified
//! boosting, and robust scale estimation.
//!
//! The pseudo-data trick turns the robust score equation into a least-squares
//! one: with `z(m) = m + psi(y - m) / 2`, the robust fit is the fixed point
//! of `m = S z(m)`, reachable by plain smoothing of transformed responses.
//! Robustified boosting runs that fixed point once per boosting step on the
//! current residuals. With an infinite cutoff `psi(x)/2 = x`, every routine
//! here degenerates to its L2 counterpart.

use alloc::vec::Vec;
use core::fmt;

use crate::boosting::{mean_sq_err, BoostTrajectory};
use crate::fmath;
use crate::smoothers::Smoother;

/// Consistency constant of the Qn estimator at the normal distribution.
const QN_CONSTANT: f64 = 2.2219;
/// MAD-to-sigma constant at the normal distribution.
const MAD_CONSTANT: f64 = 1.4826;

/// Huber loss `rho(x) = x^2` inside the cutoff, `2c|x| - c^2` outside.
pub fn huber_rho(x: f64, c: f64) -> f64 {
    debug_assert!(c > 0.0);
    let a = fmath::abs(x);
    if a <= c {
        x * x
    } else {
        2.0 * c * a - c * c
    }
}

/// Huber score `psi = rho'`: `2x` inside the cutoff, `2c sign(x)` outside.
pub fn huber_psi(x: f64, c: f64) -> f64 {
    debug_assert!(c > 0.0);
    if fmath::abs(x) <= c {
        2.0 * x
    } else {
        2.0 * fmath::copysign(c, x)
    }
}

/// Robust fitting configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustSpec {
    /// Huber cutoff `c` (may be `f64::INFINITY` for the L2 limit)
    pub cutoff: f64,
    /// relative sup-norm change declaring the psi fixed point converged
    pub psi_tol: f64,
    /// cap on fixed-point iterations
    pub psi_max_iter: usize,
    /// multiplier for the data-driven cutoff `c = factor * sigma_hat`
    pub huber_factor: f64,
}

impl RobustSpec {
    pub fn new(cutoff: f64) -> Result<Self, RobustError> {
        if !(cutoff > 0.0) {
            return Err(RobustError::InvalidCutoff(cutoff));
        }
        Ok(RobustSpec {
            cutoff,
            ..RobustSpec::default()
        })
    }

    pub fn with_tolerance(mut self, psi_tol: f64, psi_max_iter: usize) -> Result<Self, RobustError> {
        if !(psi_tol > 0.0) || psi_max_iter == 0 {
            return Err(RobustError::InvalidTolerance);
        }
        self.psi_tol = psi_tol;
        self.psi_max_iter = psi_max_iter;
        Ok(self)
    }
}

impl Default for RobustSpec {
    /// L2 limit: infinite cutoff, tolerance 1e-6, 100 iterations, Huber
    /// factor 1.345.
    fn default() -> Self {
        RobustSpec {
            cutoff: f64::INFINITY,
            psi_tol: 1e-6,
            psi_max_iter: 100,
            huber_factor: 1.345,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RobustError {
    InvalidCutoff(f64),
    InvalidTolerance,
    /// fewer than two residuals
    TooFewResiduals,
    /// all residuals identical
    DegenerateScale,
    InvalidScale(f64),
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for RobustError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobustError::InvalidCutoff(c) => write!(f, "Huber cutoff must be positive, got {c}"),
            RobustError::InvalidTolerance => {
                write!(f, "psi tolerance must be positive with at least one iteration")
            }
            RobustError::TooFewResiduals => write!(f, "need at least 2 residuals"),
            RobustError::DegenerateScale => write!(f, "degenerate scale: all residuals identical"),
            RobustError::InvalidScale(s) => write!(f, "scale must be positive, got {s}"),
            RobustError::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl core::error::Error for RobustError {}

/// Result of the pseudo-data fixed-point iteration.
#[derive(Debug, Clone)]
pub struct PseudoFit {
    /// the robust fitted vector
    pub fit: Vec<f64>,
    /// final pseudo data `z(fit) = fit + psi(y - fit) / 2`
    pub pseudo_data: Vec<f64>,
    /// vector `v` with `fit = S v` exactly; the hook for extending the fit
    /// to test points with smoother weight rows
    pub preimage: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, &x| acc.max(fmath::abs(x)))
}

fn pseudo_data(y: &[f64], m: &[f64], c: f64) -> Vec<f64> {
    y.iter()
        .zip(m.iter())
        .map(|(&yi, &mi)| mi + huber_psi(yi - mi, c) / 2.0)
        .collect()
}

/// Pseudo-data fixed point: iterate `m_k = S [m_{k-1} + psi(y - m_{k-1})/2]`
/// from `m_0 = S y` until the relative sup-norm change is within tolerance
/// or the cap is hit. Non-convergence is reported through the flag, not an
/// error.
///
/// On convergence the returned fit satisfies
/// `||fit - S z(fit)||_inf / (1 + ||fit||_inf) <= psi_tol` by construction.
pub fn pseudo_data_fit<S: Smoother>(s: &S, y: &[f64], spec: &RobustSpec) -> PseudoFit {
    assert_eq!(y.len(), s.len(), "response length mismatch");
    let mut prev_input = y.to_vec();
    let mut m_prev = s.smooth(y);
    for k in 1..=spec.psi_max_iter {
        let z = pseudo_data(y, &m_prev, spec.cutoff);
        let m_next = s.smooth(&z);
        let change = m_next
            .iter()
            .zip(m_prev.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max(fmath::abs(a - b)));
        if change / (1.0 + sup_norm(&m_prev)) <= spec.psi_tol {
            return PseudoFit {
                fit: m_prev,
                pseudo_data: z,
                preimage: prev_input,
                iterations_used: k,
                converged: true,
            };
        }
        m_prev = m_next;
        prev_input = z;
    }
    let z = pseudo_data(y, &m_prev, spec.cutoff);
    PseudoFit {
        fit: m_prev,
        pseudo_data: z,
        preimage: prev_input,
        iterations_used: spec.psi_max_iter,
        converged: false,
    }
}

/// Robustified boosting: run the pseudo-data fit on the current residuals at
/// every boosting step.
pub fn robust_boost<S: Smoother>(
    s: &S,
    y: &[f64],
    spec: &RobustSpec,
    b_max: usize,
) -> Result<BoostTrajectory, RobustError> {
    let n = s.len();
    if y.len() != n {
        return Err(RobustError::LengthMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let mut fits = Vec::with_capacity(b_max + 1);
    let mut increments = Vec::with_capacity(b_max + 1);
    let mut train_mse = Vec::with_capacity(b_max + 1);
    let mut nonconverged = 0usize;

    let first = pseudo_data_fit(s, y, spec);
    if !first.converged {
        nonconverged += 1;
    }
    train_mse.push(mean_sq_err(y, &first.fit));
    fits.push(first.fit);
    increments.push(first.preimage);

    for _ in 1..=b_max {
        let prev = fits.last().expect("nonempty");
        let delta: Vec<f64> = y.iter().zip(prev.iter()).map(|(a, b)| a - b).collect();
        let step = pseudo_data_fit(s, &delta, spec);
        if !step.converged {
            nonconverged += 1;
        }
        let fit: Vec<f64> = prev.iter().zip(step.fit.iter()).map(|(a, b)| a + b).collect();
        train_mse.push(mean_sq_err(y, &fit));
        fits.push(fit);
        increments.push(step.preimage);
    }

    Ok(BoostTrajectory::new(fits, train_mse, increments, nonconverged))
}

/// Finite-sample correction factor for the Qn estimator.
fn qn_correction(n: usize) -> f64 {
    match n {
        0 | 1 => 1.0,
        2 => 0.399,
        3 => 0.994,
        4 => 0.512,
        5 => 0.844,
        6 => 0.611,
        7 => 0.857,
        8 => 0.669,
        9 => 0.872,
        _ => {
            if n % 2 == 1 {
                n as f64 / (n as f64 + 1.4)
            } else {
                n as f64 / (n as f64 + 3.8)
            }
        }
    }
}

/// Count of pairs `i < j` (sorted input) with `x_j - x_i <= t`.
fn pairs_within(sorted: &[f64], t: f64) -> u64 {
    let mut total = 0u64;
    let mut i = 0usize;
    for j in 0..sorted.len() {
        while sorted[j] - sorted[i] > t {
            i += 1;
        }
        total += (j - i) as u64;
    }
    total
}

/// `k`-th smallest (1-indexed) pairwise difference of a sorted sample, found
/// by bisection on the bit representation of nonnegative doubles. Exact: the
/// result is the smallest representable value with at least `k` pairs below
/// or equal.
fn kth_pairwise_difference(sorted: &[f64], k: u64) -> f64 {
    if pairs_within(sorted, 0.0) >= k {
        return 0.0;
    }
    let max_diff = sorted[sorted.len() - 1] - sorted[0];
    let mut lo = 0u64; // bits of 0.0
    let mut hi = max_diff.to_bits();
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if pairs_within(sorted, f64::from_bits(mid)) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    f64::from_bits(hi)
}

/// Qn robust scale: the `C(h,2)`-th order statistic (`h = n/2 + 1`) of the
/// pairwise absolute differences, times 2.2219 and a finite-sample
/// correction. Location-free with a 50% breakdown point.
pub fn robust_scale(residuals: &[f64]) -> Result<f64, RobustError> {
    let n = residuals.len();
    if n < 2 {
        return Err(RobustError::TooFewResiduals);
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite residuals"));
    if sorted[0] == sorted[n - 1] {
        return Err(RobustError::DegenerateScale);
    }
    let h = n / 2 + 1;
    let k = (h * (h - 1) / 2) as u64;
    let q = kth_pairwise_difference(&sorted, k);
    Ok(QN_CONSTANT * qn_correction(n) * q)
}

/// Median absolute deviation scale, `1.4826 * median(|x - median(x)|)`.
pub fn mad_scale(residuals: &[f64]) -> Result<f64, RobustError> {
    let n = residuals.len();
    if n < 2 {
        return Err(RobustError::TooFewResiduals);
    }
    fn median(v: &mut [f64]) -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite residuals"));
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
    let mut tmp = residuals.to_vec();
    let med = median(&mut tmp);
    let mut dev: Vec<f64> = residuals.iter().map(|&x| fmath::abs(x - med)).collect();
    let mad = median(&mut dev);
    if mad == 0.0 {
        return Err(RobustError::DegenerateScale);
    }
    Ok(MAD_CONSTANT * mad)
}

/// Data-driven Huber cutoff `c = factor * sigma_hat`.
pub fn huber_constant(sigma_hat: f64, factor: f64) -> Result<f64, RobustError> {
    if !(sigma_hat > 0.0) {
        return Err(RobustError::InvalidScale(sigma_hat));
    }
    if !(factor > 0.0) {
        return Err(RobustError::InvalidCutoff(factor));
    }
    Ok(factor * sigma_hat)
}
