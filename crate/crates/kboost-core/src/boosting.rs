//! Iterative L2 boosting over any linear smoother.
//!
//! Starting from the plain fit `S y`, each iteration refits the residuals
//! and adds the correction: `fit_b = fit_{b-1} + S (y - fit_{b-1})`. The
//! whole trajectory is recorded because cross-validation over the iteration
//! count reuses one boosting run for every candidate `b`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::kernels::{KernelSpec, QuadratureGrid};
use crate::matrix::Mat;
use crate::smoothers::{
    build_projection_smoother, test_rows, Dataset, PolyOrder, Smoother, SmootherError,
};

#[derive(Debug, Clone, PartialEq)]
pub enum BoostError {
    LengthMismatch { expected: usize, got: usize },
    IterationOutOfRange { b: usize, b_max: usize },
    Smoother(SmootherError),
}

impl fmt::Display for BoostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoostError::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            BoostError::IterationOutOfRange { b, b_max } => {
                write!(f, "iteration {b} beyond recorded trajectory 0..={b_max}")
            }
            BoostError::Smoother(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for BoostError {}

impl From<SmootherError> for BoostError {
    fn from(e: SmootherError) -> Self {
        BoostError::Smoother(e)
    }
}

/// Recorded boosting run: fitted vectors and training loss for `b = 0..=B`.
#[derive(Debug, Clone)]
pub struct BoostTrajectory {
    fits: Vec<Vec<f64>>,
    train_mse: Vec<f64>,
    /// `increments[b]` is the vector the smoother was applied to at step `b`,
    /// so `fits[b] = fits[b-1] + S increments[b]` (with `fits[-1] = 0`).
    /// For plain L2 boosting these are the residual vectors (`y` at b = 0);
    /// for robust boosting, the final pseudo-data of each inner fit. They are
    /// what a test-point weight row gets applied to for out-of-sample
    /// prediction.
    increments: Vec<Vec<f64>>,
    /// robust inner fits that hit their iteration cap (0 for plain L2)
    nonconverged_steps: usize,
}

impl BoostTrajectory {
    pub(crate) fn new(
        fits: Vec<Vec<f64>>,
        train_mse: Vec<f64>,
        increments: Vec<Vec<f64>>,
        nonconverged_steps: usize,
    ) -> Self {
        BoostTrajectory {
            fits,
            train_mse,
            increments,
            nonconverged_steps,
        }
    }

    /// Largest recorded iteration index `B`.
    pub fn b_max(&self) -> usize {
        self.fits.len() - 1
    }

    pub fn fits(&self) -> &[Vec<f64>] {
        &self.fits
    }

    pub fn fit_at(&self, b: usize) -> Result<&[f64], BoostError> {
        self.fits
            .get(b)
            .map(|v| v.as_slice())
            .ok_or(BoostError::IterationOutOfRange {
                b,
                b_max: self.b_max(),
            })
    }

    pub fn final_fit(&self) -> &[f64] {
        self.fits.last().expect("trajectory has at least b = 0")
    }

    pub fn train_mse(&self) -> &[f64] {
        &self.train_mse
    }

    pub fn increments(&self) -> &[Vec<f64>] {
        &self.increments
    }

    pub fn nonconverged_steps(&self) -> usize {
        self.nonconverged_steps
    }
}

pub(crate) fn mean_sq_err(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        acc += d * d;
    }
    acc / n as f64
}

/// L2 boosting of `y` with smoother `s` for `b_max` iterations.
pub fn l2_boost<S: Smoother>(s: &S, y: &[f64], b_max: usize) -> Result<BoostTrajectory, BoostError> {
    let n = s.len();
    if y.len() != n {
        return Err(BoostError::LengthMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let mut fits = Vec::with_capacity(b_max + 1);
    let mut increments = Vec::with_capacity(b_max + 1);
    let mut train_mse = Vec::with_capacity(b_max + 1);

    let fit0 = s.smooth(y);
    train_mse.push(mean_sq_err(y, &fit0));
    fits.push(fit0);
    increments.push(y.to_vec());

    for _ in 1..=b_max {
        let prev = fits.last().expect("nonempty");
        let delta: Vec<f64> = y.iter().zip(prev.iter()).map(|(a, b)| a - b).collect();
        let correction = s.smooth(&delta);
        let fit: Vec<f64> = prev
            .iter()
            .zip(correction.iter())
            .map(|(a, b)| a + b)
            .collect();
        train_mse.push(mean_sq_err(y, &fit));
        fits.push(fit);
        increments.push(delta);
    }

    Ok(BoostTrajectory::new(fits, train_mse, increments, 0))
}

/// Out-of-sample prediction from a recorded trajectory: the test rows applied
/// to the accumulated increment vectors up to iteration `b`.
pub fn predict_from_trajectory(
    rows: &Mat,
    trajectory: &BoostTrajectory,
    b: usize,
) -> Result<Vec<f64>, BoostError> {
    if b > trajectory.b_max() {
        return Err(BoostError::IterationOutOfRange {
            b,
            b_max: trajectory.b_max(),
        });
    }
    let n = rows.cols();
    let mut acc = vec![0.0; n];
    for inc in &trajectory.increments[..=b] {
        if inc.len() != n {
            return Err(BoostError::LengthMismatch {
                expected: n,
                got: inc.len(),
            });
        }
        for (a, v) in acc.iter_mut().zip(inc.iter()) {
            *a += v;
        }
    }
    Ok(rows.matvec(&acc))
}

/// Boosted projection-smoother prediction at arbitrary test points.
///
/// Builds the projection smoother for `(spec, order, grid)` on the training
/// data, boosts the training response for `b` iterations, and extends the
/// fit to `x_test` through the test-point weight rows.
pub fn boost_predict(
    data: &Dataset,
    spec: &KernelSpec,
    order: PolyOrder,
    grid: &QuadratureGrid,
    b: usize,
    x_test: &[f64],
) -> Result<Vec<f64>, BoostError> {
    let s = build_projection_smoother(data, spec, order, grid)?;
    let trajectory = l2_boost(&s, data.y(), b)?;
    let rows = test_rows(data, spec, order, grid, x_test)?;
    predict_from_trajectory(&rows, &trajectory, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelKind, KernelSpec};
    use crate::rng::CounterRng;
    use crate::smoothers::{build_spline_smoother, SplineConfig};

    fn design(n: usize, seed: u64) -> Dataset {
        let mut rng = CounterRng::new(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| 0.8 * v + libm::sin(6.0 * v) + rng.normal() * libm::sqrt(2.0))
            .collect();
        Dataset::with_support(x, y, -0.5, 0.5).unwrap()
    }

    fn projection(data: &Dataset, h: f64) -> crate::smoothers::SmootherMatrix {
        let grid = data.grid(200).unwrap();
        let spec = KernelSpec::new(KernelKind::Epanechnikov, h).unwrap();
        build_projection_smoother(data, &spec, PolyOrder::Constant, &grid).unwrap()
    }

    #[test]
    fn b0_is_single_smooth() {
        let data = design(30, 1);
        let s = projection(&data, 0.4);
        let t = l2_boost(&s, data.y(), 0).unwrap();
        assert_eq!(t.b_max(), 0);
        assert_eq!(t.final_fit(), s.smooth(data.y()).as_slice());
    }

    #[test]
    fn identity_smoother_fixes_y_immediately() {
        let data = design(12, 2);
        let s = build_spline_smoother(&data, &SplineConfig::new(0.0).unwrap()).unwrap();
        let t = l2_boost(&s, data.y(), 5).unwrap();
        for b in 0..=5 {
            for (f, y) in t.fit_at(b).unwrap().iter().zip(data.y()) {
                assert!((f - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn update_rule_matches_definition() {
        let data = design(20, 3);
        let s = projection(&data, 0.3);
        let t = l2_boost(&s, data.y(), 10).unwrap();
        for b in 1..=10 {
            let prev = t.fit_at(b - 1).unwrap();
            let delta: Vec<f64> = data.y().iter().zip(prev).map(|(a, b)| a - b).collect();
            let step = s.smooth(&delta);
            for i in 0..20 {
                let want = prev[i] + step[i];
                assert_eq!(t.fit_at(b).unwrap()[i], want);
            }
        }
    }

    #[test]
    fn residuals_contract_for_projection_smoother() {
        let data = design(40, 4);
        let s = projection(&data, 0.4);
        let t = l2_boost(&s, data.y(), 50).unwrap();
        let mut prev = f64::INFINITY;
        for b in 0..=50 {
            let r: f64 = data
                .y()
                .iter()
                .zip(t.fit_at(b).unwrap())
                .map(|(y, f)| (y - f) * (y - f))
                .sum();
            assert!(r <= prev + 1e-12, "residual grew at b={b}");
            prev = r;
        }
    }

    #[test]
    fn boosting_is_linear_in_y() {
        let data = design(15, 5);
        let s = projection(&data, 0.5);
        let mut rng = CounterRng::new(99);
        let y1: Vec<f64> = (0..15).map(|_| rng.normal()).collect();
        let y2: Vec<f64> = (0..15).map(|_| rng.normal()).collect();
        let alpha = 1.7;
        let combo: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| alpha * a + b).collect();
        let t1 = l2_boost(&s, &y1, 8).unwrap();
        let t2 = l2_boost(&s, &y2, 8).unwrap();
        let tc = l2_boost(&s, &combo, 8).unwrap();
        for b in 0..=8 {
            for i in 0..15 {
                let want = alpha * t1.fit_at(b).unwrap()[i] + t2.fit_at(b).unwrap()[i];
                assert!((tc.fit_at(b).unwrap()[i] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn constant_response_reproduced_at_every_iteration() {
        let data = design(25, 6);
        let s = projection(&data, 0.3);
        let c = 3.25;
        let y = vec![c; 25];
        let t = l2_boost(&s, &y, 20).unwrap();
        for b in 0..=20 {
            for f in t.fit_at(b).unwrap() {
                assert!((f - c).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn predict_at_training_points_matches_fits() {
        let data = design(30, 7);
        let grid = data.grid(200).unwrap();
        let spec = KernelSpec::new(KernelKind::Epanechnikov, 0.4).unwrap();
        for b in [0usize, 3, 12] {
            let pred =
                boost_predict(&data, &spec, PolyOrder::Constant, &grid, b, data.x()).unwrap();
            let s = build_projection_smoother(&data, &spec, PolyOrder::Constant, &grid).unwrap();
            let t = l2_boost(&s, data.y(), b).unwrap();
            for (p, f) in pred.iter().zip(t.fit_at(b).unwrap()) {
                assert!((p - f).abs() < 1e-9, "b={b}: {p} vs {f}");
            }
        }
    }

    #[test]
    fn predict_constant_response() {
        let data = {
            let mut rng = CounterRng::new(8);
            let x: Vec<f64> = (0..30).map(|_| rng.uniform(-0.5, 0.5)).collect();
            Dataset::with_support(x, vec![2.0; 30], -0.5, 0.5).unwrap()
        };
        let grid = data.grid(200).unwrap();
        let spec = KernelSpec::new(KernelKind::Gaussian, 0.3).unwrap();
        let x_test = [-0.45, -0.2, 0.0, 0.31, 0.5];
        for b in [0usize, 5, 25] {
            let pred = boost_predict(&data, &spec, PolyOrder::Linear, &grid, b, &x_test).unwrap();
            for p in &pred {
                assert!((p - 2.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn predict_b0_is_test_row_dot_y() {
        let data = design(20, 9);
        let grid = data.grid(200).unwrap();
        let spec = KernelSpec::new(KernelKind::Epanechnikov, 0.5).unwrap();
        let x_test = [0.1, -0.3];
        let pred = boost_predict(&data, &spec, PolyOrder::Constant, &grid, 0, &x_test).unwrap();
        let rows = test_rows(&data, &spec, PolyOrder::Constant, &grid, &x_test).unwrap();
        let want = rows.matvec(data.y());
        for (p, w) in pred.iter().zip(&want) {
            assert!((p - w).abs() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let data = design(10, 10);
        let s = projection(&data, 0.4);
        assert!(matches!(
            l2_boost(&s, &[1.0, 2.0], 3),
            Err(BoostError::LengthMismatch { .. })
        ));
    }
}
