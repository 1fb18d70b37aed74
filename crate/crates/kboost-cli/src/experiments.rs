//! Monte-Carlo benchmark harness.
//!
//! Implements the simulation protocol used throughout the numerical study:
//! per repeat, tune `(parameter, iterations)` by 5-fold cross-validation on
//! a fresh sample, then average `MSE(T)` over fresh replicate datasets at
//! the tuned values, and finally report mean and standard deviation over
//! repeats. Low-rank and robust studies run the same protocol with
//! truncated spectral operators and paired robust/non-robust fits.
//!
//! Every sample is drawn from a counter-based RNG stream addressed by
//! `(purpose, model, errors, n, repeat, replicate)`, never by anything a
//! scheduler could reorder. Workers only compute; aggregation happens in
//! index order, so reports are byte-identical no matter how many threads
//! run (`jobs = 0` leaves the pool size to the runtime).

use rayon::prelude::*;
use serde::Serialize;

use kboost_core::{
    boosting_operator, build_nw_smoother, build_projection_smoother, build_spline_smoother,
    eigendecompose, kfold_cv, l2_boost, mse, mse_t, robust_boost, robust_scale, simulate,
    boosting::BoostError, kernels::KernelError, mad_scale, nw_test_row,
    smoothers::SmootherError, spectral::SpectralError, tuning::TuningError, CounterRng, CvConfig,
    CvSmoother, Dataset, ErrorLaw, KernelKind, KernelSpec, PolyOrder, RobustSpec,
    SimulationModel, Smoother, SplineConfig,
};
use kboost_core::robust::RobustError;
use thiserror::Error;

const STREAM_TUNE: u64 = 1;
const STREAM_REPLICATE: u64 = 2;
const STREAM_FOLD: u64 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Tuning(#[from] TuningError),
    #[error("{0}")]
    Smoother(#[from] SmootherError),
    #[error("{0}")]
    Kernel(#[from] KernelError),
    #[error("{0}")]
    Robust(#[from] RobustError),
    #[error("{0}")]
    Boost(#[from] BoostError),
    #[error("{0}")]
    Spectral(#[from] SpectralError),
    #[error("invalid study configuration: {0}")]
    Config(String),
}

/// Smoother family run by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Lc,
    Ll,
    Nw,
    Spline,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [
        MethodKind::Lc,
        MethodKind::Ll,
        MethodKind::Nw,
        MethodKind::Spline,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::Lc => "lc",
            MethodKind::Ll => "ll",
            MethodKind::Nw => "nw",
            MethodKind::Spline => "spline",
        }
    }


    pub fn uses_bandwidth(&self) -> bool {
        !matches!(self, MethodKind::Spline)
    }
}

impl std::str::FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lc" => Ok(MethodKind::Lc),
            "ll" => Ok(MethodKind::Ll),
            "nw" => Ok(MethodKind::Nw),
            "spline" | "ss" => Ok(MethodKind::Spline),
            other => Err(format!(
                "unknown smoother '{other}' (expected lc, ll, nw or spline)"
            )),
        }
    }
}

/// A method cell of the study: smoother family, kernel, optional Huber
/// cutoff (absolute, as in the simulation tables).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Method {
    pub kind: MethodKind,
    pub kernel: KernelKindSer,
    pub robust_c: Option<f64>,
}

/// Thin serializable wrapper so reports can embed the kernel name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelKindSer(pub KernelKind);

impl Serialize for KernelKindSer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.0.name())
    }
}

impl Method {
    pub fn new(kind: MethodKind, kernel: KernelKind) -> Self {
        Method {
            kind,
            kernel: KernelKindSer(kernel),
            robust_c: None,
        }
    }

    pub fn robust(kind: MethodKind, kernel: KernelKind, c: f64) -> Self {
        Method {
            kind,
            kernel: KernelKindSer(kernel),
            robust_c: Some(c),
        }
    }

    fn cv_smoother(&self) -> CvSmoother {
        match self.kind {
            MethodKind::Lc => CvSmoother::Projection {
                order: PolyOrder::Constant,
                kernel: self.kernel.0,
            },
            MethodKind::Ll => CvSmoother::Projection {
                order: PolyOrder::Linear,
                kernel: self.kernel.0,
            },
            MethodKind::Nw => CvSmoother::NadarayaWatson {
                kernel: self.kernel.0,
            },
            MethodKind::Spline => CvSmoother::CubicSpline,
        }
    }

    fn robust_spec(&self) -> Result<Option<RobustSpec>, HarnessError> {
        self.robust_c.map(RobustSpec::new).transpose().map_err(Into::into)
    }
}

/// Grid/budget/seed knobs of the protocol.
#[derive(Debug, Clone, Serialize)]
pub struct StudyOptions {
    pub bandwidth_range: (f64, f64),
    pub bandwidth_count: usize,
    pub lambda_range: (f64, f64),
    pub lambda_count: usize,
    pub cv_b_max: usize,
    pub folds: usize,
    pub grid_size: usize,
    pub replicates: usize,
    pub repeats: usize,
    pub seed: u64,
    /// worker threads; 0 = runtime default
    #[serde(skip)]
    pub jobs: usize,
}

impl StudyOptions {
    /// Desk-scale defaults: shorter grids and budgets that still land inside
    /// the reference tolerance bands.
    pub fn desk(seed: u64) -> Self {
        StudyOptions {
            bandwidth_range: (0.1, 4.0),
            bandwidth_count: 15,
            lambda_range: (0.0, 1000.0),
            lambda_count: 15,
            cv_b_max: 500,
            folds: 5,
            grid_size: 200,
            replicates: 100,
            repeats: 3,
            seed,
            jobs: 0,
        }
    }

    /// Full-scale protocol: 40-point grids, 5000 boosting iterations,
    /// 10 repeats.
    pub fn paper(seed: u64) -> Self {
        StudyOptions {
            bandwidth_count: 40,
            lambda_count: 40,
            cv_b_max: 5000,
            repeats: 10,
            ..StudyOptions::desk(seed)
        }
    }

    fn param_grid(&self, kind: MethodKind) -> Vec<f64> {
        if kind.uses_bandwidth() {
            linspace(self.bandwidth_range.0, self.bandwidth_range.1, self.bandwidth_count)
        } else {
            linspace(self.lambda_range.0, self.lambda_range.1, self.lambda_count)
        }
    }
}

/// Linearly spaced grid, inclusive of both ends.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 1);
    if count == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| if i == count - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

fn model_tag(model: SimulationModel) -> u64 {
    match model {
        SimulationModel::M1 => 1,
        SimulationModel::M2 => 2,
    }
}

fn errors_tag(errors: ErrorLaw) -> u64 {
    match errors {
        ErrorLaw::Normal => 1,
        ErrorLaw::StudentT3 => 2,
    }
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    if jobs == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

/// Tuned `(parameter, iterations)` for one repeat: 5-fold CV on a fresh
/// sample. The tuning sample stream depends only on `(model, errors, n,
/// repeat)`, so every method sees the same sample, and robust/non-robust
/// variants stay paired.
pub fn tune_method(
    model: SimulationModel,
    errors: ErrorLaw,
    n: usize,
    method: &Method,
    opts: &StudyOptions,
    repeat: usize,
) -> Result<(f64, usize), HarnessError> {
    let mt = model_tag(model);
    let et = errors_tag(errors);
    let mut rng = CounterRng::substream(opts.seed, &[STREAM_TUNE, mt, et, n as u64, repeat as u64]);
    let sample = simulate(model, errors, n, &mut rng);
    let config = CvConfig {
        smoother: method.cv_smoother(),
        grid_size: opts.grid_size,
        robust: method.robust_spec()?,
        b_max: opts.cv_b_max,
        folds: opts.folds,
        seed: CounterRng::derive_seed(opts.seed, &[STREAM_FOLD, mt, et, n as u64, repeat as u64]),
    };
    let grid = opts.param_grid(method.kind);
    let cv = kfold_cv(&sample.data, &config, &grid)?;
    Ok((cv.best_param, cv.best_b))
}

/// Fitted values of a method at fixed `(parameter, iterations)`.
pub fn fit_tuned(
    data: &Dataset,
    method: &Method,
    param: f64,
    b: usize,
    grid_size: usize,
) -> Result<Vec<f64>, HarnessError> {
    let smoother = match method.kind {
        MethodKind::Lc | MethodKind::Ll => {
            let spec = KernelSpec::new(method.kernel.0, param)?;
            let grid = data.grid(grid_size)?;
            let order = if method.kind == MethodKind::Lc {
                PolyOrder::Constant
            } else {
                PolyOrder::Linear
            };
            build_projection_smoother(data, &spec, order, &grid)?
        }
        MethodKind::Nw => {
            let spec = KernelSpec::new(method.kernel.0, param)?;
            build_nw_smoother(data, &spec)?
        }
        MethodKind::Spline => build_spline_smoother(data, &SplineConfig::new(param)?)?,
    };
    let fit = match method.robust_spec()? {
        Some(spec) => robust_boost(&smoother, data.y(), &spec, b)?
            .fit_at(b)?
            .to_vec(),
        None => l2_boost(&smoother, data.y(), b)?.fit_at(b)?.to_vec(),
    };
    Ok(fit)
}

/// One report cell: mean and sd over repeats of replicate-averaged MSE(T).
#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub n: usize,
    pub method: MethodKind,
    pub kernel: KernelKindSer,
    /// absolute Huber cutoff for robust cells
    pub c: Option<f64>,
    /// truncation rank for low-rank cells (`None` = full rank)
    pub rank: Option<usize>,
    pub mean: f64,
    pub sd: f64,
    pub repeat_means: Vec<f64>,
    /// tuned `(parameter, iterations)` per repeat
    pub tuned: Vec<(f64, usize)>,
}

/// A finished study: configuration echo plus all cells.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub study: String,
    pub version: String,
    pub model: String,
    pub errors: String,
    pub options: StudyOptions,
    pub cells: Vec<Cell>,
}

fn crate_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct RepeatOutcome {
    avg_mse_t: f64,
    param: f64,
    b: usize,
}

/// Tune once, then average MSE(T) over fresh replicates; one outcome per
/// repeat. `eval` maps a replicate's simulated data to one or more labelled
/// losses so the low-rank study can reuse a single tuned fit across ranks.
fn run_repeats<F>(
    model: SimulationModel,
    errors: ErrorLaw,
    n: usize,
    method: &Method,
    opts: &StudyOptions,
    replicates: usize,
    eval: F,
) -> Result<Vec<RepeatOutcome>, HarnessError>
where
    F: Fn(&Dataset, &[f64], f64, usize) -> Result<f64, HarnessError> + Sync,
{
    let mt = model_tag(model);
    let et = errors_tag(errors);
    (0..opts.repeats)
        .into_par_iter()
        .map(|repeat| {
            let (param, b) = tune_method(model, errors, n, method, opts, repeat)?;
            let losses: Result<Vec<f64>, HarnessError> = (0..replicates)
                .into_par_iter()
                .map(|j| {
                    let mut rng = CounterRng::substream(
                        opts.seed,
                        &[STREAM_REPLICATE, mt, et, n as u64, repeat as u64, j as u64],
                    );
                    let sim = simulate(model, errors, n, &mut rng);
                    eval(&sim.data, &sim.truth, param, b)
                })
                .collect();
            let losses = losses?;
            let avg = losses.iter().sum::<f64>() / losses.len() as f64;
            Ok(RepeatOutcome {
                avg_mse_t: avg,
                param,
                b,
            })
        })
        .collect()
}

fn cell_from_outcomes(
    n: usize,
    method: &Method,
    rank: Option<usize>,
    outcomes: &[RepeatOutcome],
) -> Cell {
    let repeat_means: Vec<f64> = outcomes.iter().map(|o| o.avg_mse_t).collect();
    let (mean, sd) = mean_sd(&repeat_means);
    Cell {
        n,
        method: method.kind,
        kernel: method.kernel,
        c: method.robust_c,
        rank,
        mean,
        sd,
        repeat_means,
        tuned: outcomes.iter().map(|o| (o.param, o.b)).collect(),
    }
}

/// The out-of-sample prediction-error protocol over methods and sample
/// sizes (the Table 1/3-style study).
pub fn run_benchmark(
    model: SimulationModel,
    errors: ErrorLaw,
    methods: &[Method],
    n_list: &[usize],
    opts: &StudyOptions,
) -> Result<BenchmarkReport, HarnessError> {
    let cells = with_pool(opts.jobs, || -> Result<Vec<Cell>, HarnessError> {
        let mut cells = Vec::new();
        for &n in n_list {
            for method in methods {
                let outcomes = run_repeats(
                    model,
                    errors,
                    n,
                    method,
                    opts,
                    opts.replicates,
                    |data, truth, param, b| {
                        let fit = fit_tuned(data, method, param, b, opts.grid_size)?;
                        Ok(mse_t(truth, &fit)?)
                    },
                )?;
                cells.push(cell_from_outcomes(n, method, None, &outcomes));
            }
        }
        Ok(cells)
    })?;
    Ok(BenchmarkReport {
        study: "tables".to_string(),
        version: crate_version(),
        model: model.name().to_string(),
        errors: errors.name().to_string(),
        options: opts.clone(),
        cells,
    })
}

/// Low-rank study: the local-constant projection smoother evaluated at each
/// truncation rank (plus full rank) with shared tuning and shared data.
pub fn run_lowrank_study(
    model: SimulationModel,
    errors: ErrorLaw,
    kernel: KernelKind,
    n_specs: &[(usize, usize)],
    ranks: &[usize],
    opts: &StudyOptions,
) -> Result<BenchmarkReport, HarnessError> {
    let method = Method::new(MethodKind::Lc, kernel);
    let mt = model_tag(model);
    let et = errors_tag(errors);

    let cells = with_pool(opts.jobs, || -> Result<Vec<Cell>, HarnessError> {
        let mut cells = Vec::new();
        for &(n, replicates) in n_specs {
            let mut rank_list: Vec<usize> = ranks.iter().map(|&d| d.min(n)).collect();
            rank_list.push(n);
            rank_list.dedup();

            // per repeat: tune once, then per replicate decompose once and
            // fit every rank from the same spectrum
            let per_repeat: Result<Vec<(Vec<f64>, f64, usize)>, HarnessError> = (0..opts
                .repeats)
                .into_par_iter()
                .map(|repeat| {
                    let (param, b) = tune_method(model, errors, n, &method, opts, repeat)?;
                    let spec = KernelSpec::new(kernel, param)?;
                    let per_replicate: Result<Vec<Vec<f64>>, HarnessError> = (0..replicates)
                        .into_par_iter()
                        .map(|j| {
                            let mut rng = CounterRng::substream(
                                opts.seed,
                                &[STREAM_REPLICATE, mt, et, n as u64, repeat as u64, j as u64],
                            );
                            let sim = simulate(model, errors, n, &mut rng);
                            let grid = sim.data.grid(opts.grid_size)?;
                            let s = build_projection_smoother(
                                &sim.data,
                                &spec,
                                PolyOrder::Constant,
                                &grid,
                            )?;
                            let dec = eigendecompose(&s)?;
                            rank_list
                                .iter()
                                .map(|&d| {
                                    let op = boosting_operator(&dec, b, d)?;
                                    let fit = op.smooth(sim.data.y());
                                    Ok(mse_t(&sim.truth, &fit)?)
                                })
                                .collect()
                        })
                        .collect();
                    let per_replicate = per_replicate?;
                    // average each rank over replicates
                    let mut avgs = vec![0.0; rank_list.len()];
                    for rep in &per_replicate {
                        for (a, v) in avgs.iter_mut().zip(rep.iter()) {
                            *a += v;
                        }
                    }
                    let m = per_replicate.len() as f64;
                    avgs.iter_mut().for_each(|a| *a /= m);
                    Ok((avgs, param, b))
                })
                .collect();
            let per_repeat = per_repeat?;

            for (rank_idx, &d) in rank_list.iter().enumerate() {
                let outcomes: Vec<RepeatOutcome> = per_repeat
                    .iter()
                    .map(|(avgs, param, b)| RepeatOutcome {
                        avg_mse_t: avgs[rank_idx],
                        param: *param,
                        b: *b,
                    })
                    .collect();
                let rank = if d == n { None } else { Some(d) };
                cells.push(cell_from_outcomes(n, &method, rank, &outcomes));
            }
        }
        Ok(cells)
    })?;

    Ok(BenchmarkReport {
        study: "lowrank".to_string(),
        version: crate_version(),
        model: model.name().to_string(),
        errors: errors.name().to_string(),
        options: opts.clone(),
        cells,
    })
}

/// Robust study: paired robust/non-robust cells per method, sample size and
/// Huber constant, on identical replicate data.
pub fn run_robust_study(
    model: SimulationModel,
    methods: &[Method],
    n_list: &[usize],
    c_list: &[f64],
    opts: &StudyOptions,
) -> Result<BenchmarkReport, HarnessError> {
    let errors = ErrorLaw::StudentT3;
    let cells = with_pool(opts.jobs, || -> Result<Vec<Cell>, HarnessError> {
        let mut cells = Vec::new();
        for &n in n_list {
            for base in methods {
                let plain = Method {
                    robust_c: None,
                    ..*base
                };
                let outcomes = run_repeats(
                    model,
                    errors,
                    n,
                    &plain,
                    opts,
                    opts.replicates,
                    |data, truth, param, b| {
                        let fit = fit_tuned(data, &plain, param, b, opts.grid_size)?;
                        Ok(mse_t(truth, &fit)?)
                    },
                )?;
                cells.push(cell_from_outcomes(n, &plain, None, &outcomes));

                for &c in c_list {
                    let robust = Method {
                        robust_c: Some(c),
                        ..*base
                    };
                    let outcomes = run_repeats(
                        model,
                        errors,
                        n,
                        &robust,
                        opts,
                        opts.replicates,
                        |data, truth, param, b| {
                            let fit = fit_tuned(data, &robust, param, b, opts.grid_size)?;
                            Ok(mse_t(truth, &fit)?)
                        },
                    )?;
                    cells.push(cell_from_outcomes(n, &robust, None, &outcomes));
                }
            }
        }
        Ok(cells)
    })?;
    Ok(BenchmarkReport {
        study: "robust".to_string(),
        version: crate_version(),
        model: model.name().to_string(),
        errors: errors.name().to_string(),
        options: opts.clone(),
        cells,
    })
}

/// Scale estimator for the real-data pilot residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleEstimator {
    Qn,
    Mad,
}

impl std::str::FromStr for ScaleEstimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qn" => Ok(ScaleEstimator::Qn),
            "mad" => Ok(ScaleEstimator::Mad),
            other => Err(format!("unknown scale estimator '{other}' (expected qn or mad)")),
        }
    }
}

/// Real-data protocol configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RealOptions {
    pub bandwidth_range: (f64, f64),
    pub bandwidth_count: usize,
    pub lambda_range: (f64, f64),
    pub lambda_count: usize,
    pub cv_b_max: usize,
    pub folds: usize,
    pub grid_size: usize,
    /// kernel for the kernel-based smoothers
    pub kernel: KernelKindSer,
    /// Huber factors to report (cutoff = factor * sigma_hat)
    pub factors: Vec<f64>,
    pub scale: ScaleEstimator,
    /// pilot boosting budget for the scale fit
    pub pilot_b: usize,
    pub seed: u64,
    #[serde(skip)]
    pub jobs: usize,
}

impl RealOptions {
    pub fn desk(seed: u64) -> Self {
        RealOptions {
            bandwidth_range: (5.0, 20.0),
            bandwidth_count: 15,
            lambda_range: (0.0, 5000.0),
            lambda_count: 15,
            cv_b_max: 1000,
            folds: 5,
            grid_size: 200,
            kernel: KernelKindSer(KernelKind::Epanechnikov),
            factors: vec![1.345, 1.0, 1.6],
            scale: ScaleEstimator::Qn,
            pilot_b: 10,
            seed,
            jobs: 0,
        }
    }

    pub fn paper(seed: u64) -> Self {
        RealOptions {
            bandwidth_count: 40,
            lambda_count: 40,
            ..RealOptions::desk(seed)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RealRow {
    pub method: MethodKind,
    /// Huber factor (None = non-robust fit)
    pub factor: Option<f64>,
    /// cutoff actually used
    pub c: Option<f64>,
    pub param: f64,
    pub b: usize,
    /// full-data L2 MSE of the final fit
    pub mse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RealReport {
    pub version: String,
    pub sigma_hat: f64,
    pub pilot_bandwidth: f64,
    pub pilot_b: usize,
    pub options: RealOptions,
    pub rows: Vec<RealRow>,
}

/// Pilot scale estimate: an L2 boost of fixed small budget with CV-selected
/// bandwidth stands in for an external pilot fit; the robust scale of its
/// residuals gives `sigma_hat`.
pub fn pilot_scale(data: &Dataset, opts: &RealOptions) -> Result<(f64, f64), HarnessError> {
    let method = Method::new(MethodKind::Lc, opts.kernel.0);
    let config = CvConfig {
        smoother: method.cv_smoother(),
        grid_size: opts.grid_size,
        robust: None,
        b_max: opts.pilot_b,
        folds: opts.folds,
        seed: CounterRng::derive_seed(opts.seed, &[STREAM_FOLD, 0]),
    };
    let grid = linspace(opts.bandwidth_range.0, opts.bandwidth_range.1, opts.bandwidth_count);
    let cv = kfold_cv(data, &config, &grid)?;
    // fixed pilot budget: best bandwidth among the cells at b = pilot_b
    let pilot_h = cv
        .grid
        .iter()
        .filter(|cell| cell.b == opts.pilot_b && cell.loss.is_finite())
        .min_by(|a, b| a.loss.partial_cmp(&b.loss).expect("finite"))
        .map(|cell| cell.param)
        .ok_or_else(|| HarnessError::Config("pilot CV produced no finite cell".to_string()))?;
    let fit = fit_tuned(data, &method, pilot_h, opts.pilot_b, opts.grid_size)?;
    let residuals: Vec<f64> = data.y().iter().zip(fit.iter()).map(|(y, f)| y - f).collect();
    let sigma = match opts.scale {
        ScaleEstimator::Qn => robust_scale(&residuals)?,
        ScaleEstimator::Mad => mad_scale(&residuals)?,
    };
    Ok((sigma, pilot_h))
}

/// Full-data fit of one smoother at fixed parameters; returns the fit and
/// its L2 MSE. Used by the real-data table and for spot checks.
pub fn fit_real_at(
    data: &Dataset,
    kind: MethodKind,
    kernel: KernelKind,
    param: f64,
    b: usize,
    robust_c: Option<f64>,
    grid_size: usize,
) -> Result<(Vec<f64>, f64), HarnessError> {
    let method = Method {
        kind,
        kernel: KernelKindSer(kernel),
        robust_c,
    };
    let fit = fit_tuned(data, &method, param, b, grid_size)?;
    let loss = mse(data.y(), &fit)?;
    Ok((fit, loss))
}

/// The real-data protocol: pilot scale, then per smoother a CV-tuned
/// non-robust fit and one robust fit per Huber factor.
pub fn run_real_data(data: &Dataset, opts: &RealOptions) -> Result<RealReport, HarnessError> {
    let (sigma_hat, pilot_h) = pilot_scale(data, opts)?;

    let variants: Vec<(MethodKind, Option<f64>)> = {
        let mut v = Vec::new();
        for kind in MethodKind::ALL {
            v.push((kind, None));
            for &factor in &opts.factors {
                v.push((kind, Some(factor)));
            }
        }
        v
    };

    let rows = with_pool(opts.jobs, || -> Result<Vec<RealRow>, HarnessError> {
        variants
            .par_iter()
            .map(|&(kind, factor)| {
                let c = factor.map(|f| f * sigma_hat);
                let method = Method {
                    kind,
                    kernel: opts.kernel,
                    robust_c: c,
                };
                let grid = if kind.uses_bandwidth() {
                    linspace(opts.bandwidth_range.0, opts.bandwidth_range.1, opts.bandwidth_count)
                } else {
                    linspace(opts.lambda_range.0, opts.lambda_range.1, opts.lambda_count)
                };
                let config = CvConfig {
                    smoother: method.cv_smoother(),
                    grid_size: opts.grid_size,
                    robust: method.robust_spec()?,
                    b_max: opts.cv_b_max,
                    folds: opts.folds,
                    seed: CounterRng::derive_seed(opts.seed, &[STREAM_FOLD, 1]),
                };
                let cv = kfold_cv(data, &config, &grid)?;
                let (fit, loss) =
                    fit_real_at(data, kind, opts.kernel.0, cv.best_param, cv.best_b, c, opts.grid_size)?;
                let _ = fit;
                Ok(RealRow {
                    method: kind,
                    factor,
                    c,
                    param: cv.best_param,
                    b: cv.best_b,
                    mse: loss,
                })
            })
            .collect()
    })?;

    Ok(RealReport {
        version: crate_version(),
        sigma_hat,
        pilot_bandwidth: pilot_h,
        pilot_b: opts.pilot_b,
        options: opts.clone(),
        rows,
    })
}

/// Predictions of a fitted method at arbitrary points (the CLI `predict`
/// surface for the non-projection smoothers; projection smoothers go
/// through `boost_predict`).
pub fn predict_at(
    data: &Dataset,
    method: &Method,
    param: f64,
    b: usize,
    grid_size: usize,
    x_test: &[f64],
) -> Result<Vec<f64>, HarnessError> {
    use kboost_core::boosting::predict_from_trajectory;
    use kboost_core::Mat;

    let (smoother, rows): (kboost_core::SmootherMatrix, Mat) = match method.kind {
        MethodKind::Lc | MethodKind::Ll => {
            let spec = KernelSpec::new(method.kernel.0, param)?;
            let grid = data.grid(grid_size)?;
            let order = if method.kind == MethodKind::Lc {
                PolyOrder::Constant
            } else {
                PolyOrder::Linear
            };
            let s = build_projection_smoother(data, &spec, order, &grid)?;
            let rows = kboost_core::smoothers::test_rows(data, &spec, order, &grid, x_test)?;
            (s, rows)
        }
        MethodKind::Nw => {
            let spec = KernelSpec::new(method.kernel.0, param)?;
            let s = build_nw_smoother(data, &spec)?;
            let mut rows = Mat::zeros(x_test.len(), data.n());
            for (r, &x) in x_test.iter().enumerate() {
                let row = nw_test_row(data, &spec, x)?;
                rows.row_mut(r).copy_from_slice(&row);
            }
            (s, rows)
        }
        MethodKind::Spline => {
            let config = SplineConfig::new(param)?;
            let s = build_spline_smoother(data, &config)?;
            let rows = kboost_core::smoothers::spline_test_rows(data, &config, x_test)?;
            (s, rows)
        }
    };
    let trajectory = match method.robust_spec()? {
        Some(spec) => robust_boost(&smoother, data.y(), &spec, b)?,
        None => l2_boost(&smoother, data.y(), b)?,
    };
    Ok(predict_from_trajectory(&rows, &trajectory, b)?)
}
