//! Loss criteria and k-fold cross-validation over `(smoothing parameter,
//! boosting iterations)` grids.
//!
//! One boosting trajectory per `(fold, parameter)` serves every candidate
//! iteration count: held-out predictions accumulate increment by increment,
//! so the full `params x (0..=b_max)` loss grid costs one run per cell
//! column instead of one per cell.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::boosting::{l2_boost, BoostTrajectory};
use crate::fmath;
use crate::kernels::{KernelKind, KernelSpec};
use crate::matrix::Mat;
use crate::rng::CounterRng;
use crate::robust::{huber_rho, robust_boost, RobustSpec};
use crate::smoothers::{
    build_nw_smoother, build_projection_smoother, build_spline_smoother, nw_test_row,
    spline_test_rows, test_rows, Dataset, PolyOrder, SmootherError, SmootherMatrix, SplineConfig,
};

#[derive(Debug, Clone, PartialEq)]
pub enum TuningError {
    LengthMismatch { expected: usize, got: usize },
    InvalidConfig(String),
    /// every grid cell failed to produce a finite loss
    NoFiniteCell,
}

impl fmt::Display for TuningError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TuningError::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            TuningError::InvalidConfig(msg) => write!(f, "invalid CV config: {msg}"),
            TuningError::NoFiniteCell => write!(f, "no CV cell produced a finite loss"),
        }
    }
}

impl core::error::Error for TuningError {}

/// Mean squared residual `n^{-1} sum (y_i - fit_i)^2`.
pub fn mse(y: &[f64], fit: &[f64]) -> Result<f64, TuningError> {
    if y.len() != fit.len() {
        return Err(TuningError::LengthMismatch {
            expected: y.len(),
            got: fit.len(),
        });
    }
    let mut acc = 0.0;
    for (a, b) in y.iter().zip(fit.iter()) {
        let d = a - b;
        acc += d * d;
    }
    Ok(acc / y.len() as f64)
}

/// Mean squared error against the true regression function (simulation only).
pub fn mse_t(m_true: &[f64], fit: &[f64]) -> Result<f64, TuningError> {
    mse(m_true, fit)
}

/// Huber-loss criterion `(MSE / n) sum rho((y_i - fit_i) / sqrt(MSE))`,
/// with the plain L2 `MSE` of the same residuals as the internal scale.
/// Recovers `mse` exactly when the cutoff is infinite.
pub fn mse_rho(y: &[f64], fit: &[f64], spec: &RobustSpec) -> Result<f64, TuningError> {
    let s2 = mse(y, fit)?;
    if s2 == 0.0 {
        return Ok(0.0);
    }
    let s = fmath::sqrt(s2);
    let n = y.len() as f64;
    let sum: f64 = y
        .iter()
        .zip(fit.iter())
        .map(|(a, b)| huber_rho((a - b) / s, spec.cutoff))
        .sum();
    Ok(s2 / n * sum)
}

/// Smoother family being tuned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvSmoother {
    Projection { order: PolyOrder, kernel: KernelKind },
    NadarayaWatson { kernel: KernelKind },
    CubicSpline,
}

impl CvSmoother {
    /// Whether the tuned parameter is a bandwidth (true) or a spline
    /// smoothing parameter (false).
    pub fn param_is_bandwidth(&self) -> bool {
        !matches!(self, CvSmoother::CubicSpline)
    }
}

/// Cross-validation configuration.
#[derive(Debug, Clone)]
pub struct CvConfig {
    pub smoother: CvSmoother,
    /// quadrature grid length for projection smoothers
    pub grid_size: usize,
    /// robust mode: pseudo-data boosting and the MSE(rho) held-out criterion
    pub robust: Option<RobustSpec>,
    pub b_max: usize,
    pub folds: usize,
    pub seed: u64,
}

/// One cell of the CV loss grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvCell {
    pub param: f64,
    pub b: usize,
    pub loss: f64,
}

/// Full CV grid plus the selected cell.
#[derive(Debug, Clone)]
pub struct CvResult {
    pub grid: Vec<CvCell>,
    pub best_param: f64,
    pub best_b: usize,
    pub best_loss: f64,
    pub folds: usize,
    pub seed: u64,
    /// cells marked infinite because a fold could not be built or predicted
    pub infinite_cells: usize,
}

/// Deterministic fold assignment: a seeded permutation dealt round-robin,
/// so fold sizes differ by at most one.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = CounterRng::substream(seed, &[0x666f_6c64]); // "fold"
    rng.shuffle(&mut perm);
    let mut assignment = vec![Vec::new(); folds];
    for (pos, &idx) in perm.iter().enumerate() {
        assignment[pos % folds].push(idx);
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    assignment
}

struct FoldFit {
    smoother: SmootherMatrix,
    test_rows: Mat,
}

fn build_fold(
    train: &Dataset,
    test_x: &[f64],
    smoother: CvSmoother,
    grid_size: usize,
    param: f64,
) -> Result<FoldFit, SmootherError> {
    match smoother {
        CvSmoother::Projection { order, kernel } => {
            let spec = KernelSpec::new(kernel, param).map_err(SmootherError::from)?;
            let grid = train.grid(grid_size)?;
            let s = build_projection_smoother(train, &spec, order, &grid)?;
            let rows = test_rows(train, &spec, order, &grid, test_x)?;
            Ok(FoldFit {
                smoother: s,
                test_rows: rows,
            })
        }
        CvSmoother::NadarayaWatson { kernel } => {
            let spec = KernelSpec::new(kernel, param).map_err(SmootherError::from)?;
            let s = build_nw_smoother(train, &spec)?;
            let mut rows = Mat::zeros(test_x.len(), train.n());
            for (r, &x) in test_x.iter().enumerate() {
                let row = nw_test_row(train, &spec, x)?;
                rows.row_mut(r).copy_from_slice(&row);
            }
            Ok(FoldFit {
                smoother: s,
                test_rows: rows,
            })
        }
        CvSmoother::CubicSpline => {
            let config = SplineConfig::new(param)?;
            let s = build_spline_smoother(train, &config)?;
            let rows = spline_test_rows(train, &config, test_x)?;
            Ok(FoldFit {
                smoother: s,
                test_rows: rows,
            })
        }
    }
}

fn run_trajectory(
    fit: &FoldFit,
    y: &[f64],
    robust: Option<&RobustSpec>,
    b_max: usize,
) -> BoostTrajectory {
    match robust {
        Some(spec) => {
            robust_boost(&fit.smoother, y, spec, b_max).expect("lengths checked by caller")
        }
        None => l2_boost(&fit.smoother, y, b_max).expect("lengths checked by caller"),
    }
}

/// K-fold cross-validation of `(param, b)` over the full grid.
///
/// For every fold and parameter, one boosting trajectory on the training
/// split is evaluated out-of-fold at every iteration count; losses average
/// over folds. In robust mode the held-out criterion is MSE(rho) with the
/// scale taken from the evaluated cell's own held-out residuals. Parameters
/// whose fold fits fail (bandwidth too small, unreachable held-out point)
/// get infinite loss instead of aborting the search.
pub fn kfold_cv(
    data: &Dataset,
    config: &CvConfig,
    param_grid: &[f64],
) -> Result<CvResult, TuningError> {
    let n = data.n();
    if config.folds < 2 {
        return Err(TuningError::InvalidConfig(String::from("need k >= 2 folds")));
    }
    if n < 2 * config.folds {
        return Err(TuningError::InvalidConfig(format!(
            "need n >= 2k observations, got n = {n} with k = {}",
            config.folds
        )));
    }
    if param_grid.is_empty() {
        return Err(TuningError::InvalidConfig(String::from("empty parameter grid")));
    }
    for &p in param_grid {
        let ok = if config.smoother.param_is_bandwidth() {
            p > 0.0 && p.is_finite()
        } else {
            p >= 0.0 && p.is_finite()
        };
        if !ok {
            return Err(TuningError::InvalidConfig(format!("invalid grid value {p}")));
        }
    }
    if config.grid_size < 2 {
        return Err(TuningError::InvalidConfig(String::from(
            "quadrature grid needs at least 2 points",
        )));
    }

    let folds = fold_assignment(n, config.folds, config.seed);
    let b_count = config.b_max + 1;
    let mut sums = vec![vec![0.0_f64; b_count]; param_grid.len()];
    let mut poisoned = vec![false; param_grid.len()];

    for fold_idx in folds.iter() {
        let in_fold = {
            let mut mask = vec![false; n];
            for &i in fold_idx {
                mask[i] = true;
            }
            mask
        };
        let train_idx: Vec<usize> = (0..n).filter(|i| !in_fold[*i]).collect();
        let train = data
            .subset(&train_idx)
            .map_err(|e| TuningError::InvalidConfig(format!("fold too small: {e}")))?;
        let test_x: Vec<f64> = fold_idx.iter().map(|&i| data.x()[i]).collect();
        let test_y: Vec<f64> = fold_idx.iter().map(|&i| data.y()[i]).collect();

        for (p_idx, &param) in param_grid.iter().enumerate() {
            if poisoned[p_idx] {
                continue;
            }
            let fit = match build_fold(&train, &test_x, config.smoother, config.grid_size, param) {
                Ok(f) => f,
                Err(_) => {
                    poisoned[p_idx] = true;
                    continue;
                }
            };
            let trajectory = run_trajectory(&fit, train.y(), config.robust.as_ref(), config.b_max);

            // incremental held-out predictions across b
            let mut pred = vec![0.0; test_x.len()];
            let mut step = vec![0.0; test_x.len()];
            for b in 0..b_count {
                fit.test_rows.matvec_into(&trajectory.increments()[b], &mut step);
                for (p, s) in pred.iter_mut().zip(step.iter()) {
                    *p += s;
                }
                let loss = match config.robust.as_ref() {
                    Some(spec) => mse_rho(&test_y, &pred, spec)?,
                    None => mse(&test_y, &pred)?,
                };
                sums[p_idx][b] += loss;
            }
        }
    }

    let k = config.folds as f64;
    let mut grid = Vec::with_capacity(param_grid.len() * b_count);
    let mut infinite_cells = 0usize;
    let mut best: Option<CvCell> = None;
    for (p_idx, &param) in param_grid.iter().enumerate() {
        for b in 0..b_count {
            let loss = if poisoned[p_idx] {
                infinite_cells += 1;
                f64::INFINITY
            } else {
                sums[p_idx][b] / k
            };
            let cell = CvCell { param, b, loss };
            grid.push(cell);
            if loss.is_finite() {
                let better = match &best {
                    None => true,
                    Some(cur) => {
                        loss < cur.loss
                            || (loss == cur.loss
                                && (b < cur.b || (b == cur.b && param < cur.param)))
                    }
                };
                if better {
                    best = Some(cell);
                }
            }
        }
    }
    let best = best.ok_or(TuningError::NoFiniteCell)?;
    Ok(CvResult {
        grid,
        best_param: best.param,
        best_b: best.b,
        best_loss: best.loss,
        folds: config.folds,
        seed: config.seed,
        infinite_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn mse_values() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 2.5);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mse_matches_two_pass_oracle() {
        let mut rng = CounterRng::new(51);
        let y: Vec<f64> = (0..500).map(|_| rng.normal()).collect();
        let f: Vec<f64> = (0..500).map(|_| rng.normal()).collect();
        let got = mse(&y, &f).unwrap();
        // independent two-pass evaluation
        let resid: Vec<f64> = y.iter().zip(&f).map(|(a, b)| a - b).collect();
        let want = resid.iter().map(|r| r * r).sum::<f64>() / 500.0;
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn mse_t_constant_shift() {
        let m = vec![0.5, -0.25, 1.0];
        let a = 0.3;
        let fit: Vec<f64> = m.iter().map(|v| v + a).collect();
        assert!((mse_t(&m, &fit).unwrap() - a * a).abs() < 1e-15);
    }

    #[test]
    fn mse_rho_degenerates_to_mse_with_infinite_cutoff() {
        let mut rng = CounterRng::new(52);
        let spec = RobustSpec::default();
        for _ in 0..100 {
            let y: Vec<f64> = (0..40).map(|_| rng.normal()).collect();
            let f: Vec<f64> = (0..40).map(|_| rng.normal()).collect();
            let plain = mse(&y, &f).unwrap();
            let rho = mse_rho(&y, &f, &spec).unwrap();
            assert!((plain - rho).abs() <= 1e-12 * plain.max(1.0));
        }
    }

    #[test]
    fn mse_rho_zero_residuals() {
        let spec = RobustSpec::new(1.0).unwrap();
        assert_eq!(mse_rho(&[1.0, 2.0], &[1.0, 2.0], &spec).unwrap(), 0.0);
    }

    #[test]
    fn mse_rho_matches_direct_formula() {
        let mut rng = CounterRng::new(53);
        let spec = RobustSpec::new(1.0).unwrap();
        let y: Vec<f64> = (0..60).map(|_| 2.0 * rng.student_t3()).collect();
        let f: Vec<f64> = (0..60).map(|_| rng.normal()).collect();
        let got = mse_rho(&y, &f, &spec).unwrap();
        // independent re-implementation
        let n = 60.0;
        let s2 = y.iter().zip(&f).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
        let s = s2.sqrt();
        let mut sum = 0.0;
        for (a, b) in y.iter().zip(&f) {
            let u = (a - b) / s;
            sum += if u.abs() <= 1.0 { u * u } else { 2.0 * u.abs() - 1.0 };
        }
        let want = s2 / n * sum;
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn fold_assignment_is_balanced_partition() {
        let folds = fold_assignment(53, 5, 99);
        let mut seen = vec![false; 53];
        for fold in &folds {
            for &i in fold {
                assert!(!seen[i], "index {i} in two folds");
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
        let min = sizes.iter().min().unwrap();
        let max = sizes.iter().max().unwrap();
        assert!(max - min <= 1);
        // deterministic
        assert_eq!(folds, fold_assignment(53, 5, 99));
        assert_ne!(folds, fold_assignment(53, 5, 100));
    }
}
