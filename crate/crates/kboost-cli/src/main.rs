//! `kboost`: kernel-regression L2 boosting from the command line.
//!
//! Subcommands: `fit`, `predict`, `cv`, `simulate`, `eigen`, `bench`.
//! Exit codes: 0 success, 2 usage error, 1 runtime error.

// flag validators use `!(x > 0.0)` so NaN is rejected along with nonpositives
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use kboost_cli::experiments::{
    self, linspace, Method, MethodKind, RealOptions, ScaleEstimator, StudyOptions,
};
use kboost_cli::io::{self, fmt_g17};
use kboost_cli::report;
use kboost_core::{
    boosting_operator, build_nw_smoother, build_projection_smoother, build_spline_smoother,
    eigendecompose, kfold_cv, l2_boost, nonsymmetric_spectrum, robust_boost, robust_scale,
    simulate, CounterRng, CvConfig, Dataset, ErrorLaw, KernelKind, KernelSpec, PolyOrder,
    RobustSpec, SimulationModel, Smoother, SplineConfig, mad_scale,
};

#[derive(Debug)]
enum CliError {
    /// bad flags or values: exit 2
    Usage(String),
    /// anything that fails after parsing: exit 1
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "kboost",
    version,
    about = "Kernel-regression L2 boosting: projection smoothers, low-rank spectral approximation, Huber-robust fitting",
    after_help = "Numeric output uses full %.17g precision so files round-trip bit-exactly."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a boosted smoother to a dataset and write x,y,fit
    Fit(FitArgs),
    /// Predict at new points from a fitted boosted smoother
    Predict(PredictArgs),
    /// Cross-validate (parameter, iterations) over a grid
    Cv(CvArgs),
    /// Draw a simulated dataset from one of the study models
    Simulate(SimulateArgs),
    /// Eigenvalues of a smoother matrix (spectrum diagnostic)
    Eigen(EigenArgs),
    /// Run a full benchmark study and write its tables
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// input dataset CSV (header row required)
    #[arg(long)]
    data: PathBuf,
    /// column names as X:Y (default "x:y")
    #[arg(long)]
    cols: Option<String>,
    /// covariate support as LO:HI (default: data range)
    #[arg(long, allow_hyphen_values = true)]
    support: Option<String>,
}

#[derive(Args, Clone)]
struct SmootherArgs {
    /// smoother family: lc, ll, nw or spline
    #[arg(long)]
    smoother: String,
    /// kernel: epanechnikov, gaussian, triangular, uniform, biweight
    #[arg(long, default_value = "epanechnikov")]
    kernel: String,
    /// kernel bandwidth (lc/ll/nw)
    #[arg(long)]
    bandwidth: Option<f64>,
    /// spline smoothing parameter
    #[arg(long)]
    lambda: Option<f64>,
    /// quadrature grid length for the projection smoothers
    #[arg(long, default_value_t = 200)]
    grid: usize,
}

#[derive(Args, Clone)]
struct RobustArgs {
    /// robust (Huber pseudo-data) fitting
    #[arg(long)]
    robust: bool,
    /// Huber cutoff: a number, or "auto" for factor * robust residual scale
    #[arg(long, default_value = "auto")]
    huber_c: String,
    /// multiplier for the automatic cutoff
    #[arg(long, default_value_t = 1.345)]
    huber_factor: f64,
    /// relative tolerance of the pseudo-data fixed point
    #[arg(long, default_value_t = 1e-6)]
    psi_tol: f64,
    /// iteration cap of the pseudo-data fixed point
    #[arg(long, default_value_t = 100)]
    psi_max_iter: usize,
    /// residual scale estimator for "auto": qn or mad
    #[arg(long, default_value = "qn")]
    scale: String,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    smoother: SmootherArgs,
    /// boosting iterations
    #[arg(long, default_value_t = 0)]
    iters: usize,
    /// truncation rank: an integer, or "full"
    #[arg(long, default_value = "full")]
    rank: String,
    #[command(flatten)]
    robust: RobustArgs,
    /// output CSV (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// also write the n x n smoother matrix (row-major CSV, full precision)
    #[arg(long)]
    dump_smoother: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PredictArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    smoother: SmootherArgs,
    #[arg(long, default_value_t = 0)]
    iters: usize,
    #[command(flatten)]
    robust: RobustArgs,
    /// prediction points as LO:HI:COUNT
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    /// or a CSV file with an "x" column
    #[arg(long)]
    points_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    smoother: SmootherArgs,
    /// parameter grid as LO:HI:COUNT (linear spacing)
    #[arg(long, allow_hyphen_values = true)]
    param_grid: String,
    /// largest boosting iteration evaluated
    #[arg(long, default_value_t = 1000)]
    b_max: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    robust: RobustArgs,
    /// write the full loss grid here (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    /// model: m1 or m2
    #[arg(long, default_value = "m1")]
    model: String,
    /// error law: normal or t3
    #[arg(long, default_value = "normal")]
    errors: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// output CSV with columns x,y,truth (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct EigenArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    smoother: SmootherArgs,
    /// output CSV (default: stdout): k,lambda or k,re,im
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct BenchArgs {
    /// study: tables, lowrank, robust or real
    #[arg(long)]
    study: String,
    /// output directory for the table CSVs and metadata.json
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// full protocol scale: 40-point grids, 5000 iterations, 10 repeats
    #[arg(long)]
    paper_scale: bool,
    /// simulation model (tables/lowrank/robust)
    #[arg(long, default_value = "m1")]
    model: String,
    /// error law for the tables study: normal or t3
    #[arg(long, default_value = "normal")]
    errors: String,
    /// smoother families, comma separated (tables/robust)
    #[arg(long, default_value = "lc")]
    methods: String,
    /// kernel for the kernel-based smoothers
    #[arg(long, default_value = "epanechnikov")]
    kernel: String,
    /// sample sizes, comma separated
    #[arg(long)]
    n_list: Option<String>,
    /// replicates per repeat
    #[arg(long)]
    replicates: Option<usize>,
    /// protocol repeats
    #[arg(long)]
    repeats: Option<usize>,
    /// CV boosting budget override
    #[arg(long)]
    b_max: Option<usize>,
    /// bandwidth grid length override
    #[arg(long)]
    param_count: Option<usize>,
    /// truncation ranks for the lowrank study, comma separated
    #[arg(long, default_value = "2,5,10,15")]
    ranks: String,
    /// Huber constants for the robust study, comma separated
    #[arg(long, default_value = "1.0,2.0")]
    c_list: String,
    /// real-data CSV (real study)
    #[arg(long)]
    data: Option<PathBuf>,
    /// column names as X:Y for the real-data CSV
    #[arg(long, default_value = "age:logwage")]
    cols: String,
    /// scale estimator for the real-data pilot: qn or mad
    #[arg(long, default_value = "qn")]
    scale: String,
    /// worker threads (0 = all cores)
    #[arg(long, env = "KBOOST_JOBS", default_value_t = 0)]
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Cv(args) => cmd_cv(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Eigen(args) => cmd_eigen(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

// ---- flag parsing helpers ----

fn parse_kernel(s: &str) -> Result<KernelKind, CliError> {
    KernelKind::from_str(s).map_err(|e| usage(format!("--kernel: {e}")))
}

fn parse_method_kind(s: &str) -> Result<MethodKind, CliError> {
    MethodKind::from_str(s).map_err(|e| usage(format!("--smoother: {e}")))
}

fn parse_model(s: &str) -> Result<SimulationModel, CliError> {
    SimulationModel::from_str(s).map_err(|e| usage(format!("--model: {e}")))
}

fn parse_errors(s: &str) -> Result<ErrorLaw, CliError> {
    ErrorLaw::from_str(s).map_err(|e| usage(format!("--errors: {e}")))
}

fn parse_pair(s: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(usage(format!("{flag}: expected LO:HI, got '{s}'")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("{flag}: unparsable number '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("{flag}: unparsable number '{}'", parts[1])))?;
    Ok((lo, hi))
}

fn parse_grid_spec(s: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("{flag}: expected LO:HI:COUNT, got '{s}'")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("{flag}: unparsable number '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("{flag}: unparsable number '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| usage(format!("{flag}: unparsable count '{}'", parts[2])))?;
    if count == 0 {
        return Err(usage(format!("{flag}: count must be at least 1")));
    }
    if count > 1 && !(lo < hi) {
        return Err(usage(format!("{flag}: need LO < HI")));
    }
    Ok(linspace(lo, hi, count))
}

fn parse_cols(s: &str) -> Result<(String, String), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 || parts[0].is_empty() || parts[1].is_empty() {
        return Err(usage(format!("--cols: expected XCOL:YCOL, got '{s}'")));
    }
    Ok((parts[0].to_string(), parts[1].to_string()))
}

fn parse_usize_list(s: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| usage(format!("{flag}: unparsable integer '{p}'")))
        })
        .collect()
}

fn parse_f64_list(s: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| usage(format!("{flag}: unparsable number '{p}'")))
        })
        .collect()
}

fn load_data(args: &DataArgs) -> Result<Dataset, CliError> {
    let cols = args.cols.as_deref().map(parse_cols).transpose()?;
    let support = args
        .support
        .as_deref()
        .map(|s| parse_pair(s, "--support"))
        .transpose()?;
    let cols_ref = cols.as_ref().map(|(a, b)| (a.as_str(), b.as_str()));
    io::load_dataset(&args.data, cols_ref, support).map_err(runtime)
}

/// Resolved smoother request: the parameter and what it means.
struct SmootherRequest {
    kind: MethodKind,
    kernel: KernelKind,
    param: f64,
    grid_size: usize,
}

fn resolve_smoother(args: &SmootherArgs) -> Result<SmootherRequest, CliError> {
    let kind = parse_method_kind(&args.smoother)?;
    let kernel = parse_kernel(&args.kernel)?;
    if args.grid < 2 {
        return Err(usage("--grid: need at least 2 quadrature points"));
    }
    let param = if kind.uses_bandwidth() {
        let h = args
            .bandwidth
            .ok_or_else(|| usage("--bandwidth is required for lc/ll/nw smoothers"))?;
        if !(h > 0.0) || !h.is_finite() {
            return Err(usage(format!("--bandwidth: must be positive, got {h}")));
        }
        if args.lambda.is_some() {
            return Err(usage("--lambda only applies to the spline smoother"));
        }
        h
    } else {
        let l = args
            .lambda
            .ok_or_else(|| usage("--lambda is required for the spline smoother"))?;
        if !(l >= 0.0) || !l.is_finite() {
            return Err(usage(format!("--lambda: must be nonnegative, got {l}")));
        }
        if args.bandwidth.is_some() {
            return Err(usage("--bandwidth does not apply to the spline smoother"));
        }
        l
    };
    Ok(SmootherRequest {
        kind,
        kernel,
        param,
        grid_size: args.grid,
    })
}

fn build_smoother(
    req: &SmootherRequest,
    data: &Dataset,
) -> Result<kboost_core::SmootherMatrix, CliError> {
    match req.kind {
        MethodKind::Lc | MethodKind::Ll => {
            let spec = KernelSpec::new(req.kernel, req.param).map_err(runtime)?;
            let grid = data.grid(req.grid_size).map_err(runtime)?;
            let order = if req.kind == MethodKind::Lc {
                PolyOrder::Constant
            } else {
                PolyOrder::Linear
            };
            build_projection_smoother(data, &spec, order, &grid).map_err(runtime)
        }
        MethodKind::Nw => {
            let spec = KernelSpec::new(req.kernel, req.param).map_err(runtime)?;
            build_nw_smoother(data, &spec).map_err(runtime)
        }
        MethodKind::Spline => {
            let config = SplineConfig::new(req.param).map_err(runtime)?;
            build_spline_smoother(data, &config).map_err(runtime)
        }
    }
}

/// Resolve the robust flags into a spec; "auto" derives the cutoff from the
/// robust scale of L2 residuals at the same smoother parameters.
fn resolve_robust(
    args: &RobustArgs,
    data: &Dataset,
    req: &SmootherRequest,
    iters: usize,
) -> Result<Option<RobustSpec>, CliError> {
    if !args.robust {
        return Ok(None);
    }
    if !(args.psi_tol > 0.0) {
        return Err(usage(format!("--psi-tol: must be positive, got {}", args.psi_tol)));
    }
    if args.psi_max_iter == 0 {
        return Err(usage("--psi-max-iter: must be at least 1"));
    }
    if !(args.huber_factor > 0.0) {
        return Err(usage(format!(
            "--huber-factor: must be positive, got {}",
            args.huber_factor
        )));
    }
    let scale: ScaleEstimator = args
        .scale
        .parse()
        .map_err(|e: String| usage(format!("--scale: {e}")))?;
    let c = if args.huber_c == "auto" {
        let s = build_smoother(req, data)?;
        let trajectory = l2_boost(&s, data.y(), iters).map_err(runtime)?;
        let fit = trajectory.final_fit();
        let residuals: Vec<f64> = data.y().iter().zip(fit.iter()).map(|(y, f)| y - f).collect();
        let sigma = match scale {
            ScaleEstimator::Qn => robust_scale(&residuals).map_err(runtime)?,
            ScaleEstimator::Mad => mad_scale(&residuals).map_err(runtime)?,
        };
        let c = args.huber_factor * sigma;
        eprintln!(
            "auto Huber cutoff: scale {} = {}, c = {}",
            match scale {
                ScaleEstimator::Qn => "qn",
                ScaleEstimator::Mad => "mad",
            },
            fmt_g17(sigma),
            fmt_g17(c)
        );
        c
    } else {
        let c: f64 = args
            .huber_c
            .parse()
            .map_err(|_| usage(format!("--huber-c: expected a number or 'auto', got '{}'", args.huber_c)))?;
        if !(c > 0.0) {
            return Err(usage(format!("--huber-c: must be positive, got {c}")));
        }
        c
    };
    let spec = RobustSpec::new(c)
        .and_then(|s| s.with_tolerance(args.psi_tol, args.psi_max_iter))
        .map_err(runtime)?;
    Ok(Some(spec))
}

fn emit_csv(out: Option<&PathBuf>, headers: &[&str], columns: &[&[f64]]) -> Result<(), CliError> {
    match out {
        Some(path) => io::write_columns_csv(path, headers, columns).map_err(runtime),
        None => {
            let mut text = String::new();
            text.push_str(&headers.join(","));
            text.push('\n');
            let n = columns.first().map_or(0, |c| c.len());
            for i in 0..n {
                let row: Vec<String> = columns.iter().map(|c| fmt_g17(c[i])).collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
            print!("{text}");
            Ok(())
        }
    }
}

// ---- subcommands ----

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let req = resolve_smoother(&args.smoother)?;
    let data = load_data(&args.data)?;
    if data.tie_count() > 0 && req.kind == MethodKind::Spline {
        eprintln!(
            "warning: {} tied covariate values; spline knots are jittered",
            data.tie_count()
        );
    }
    let robust = resolve_robust(&args.robust, &data, &req, args.iters)?;

    let rank: Option<usize> = if args.rank == "full" {
        None
    } else {
        let d: usize = args
            .rank
            .parse()
            .map_err(|_| usage(format!("--rank: expected an integer or 'full', got '{}'", args.rank)))?;
        if d == 0 || d > data.n() {
            return Err(usage(format!(
                "--rank: must be in 1..={} for this dataset, got {d}",
                data.n()
            )));
        }
        Some(d)
    };

    let smoother = build_smoother(&req, &data)?;
    if let Some(path) = &args.dump_smoother {
        let w = smoother.weights();
        let mut text = String::new();
        for i in 0..w.rows() {
            let row: Vec<String> = w.row(i).iter().map(|&v| fmt_g17(v)).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        io::write_atomic(path, text.as_bytes()).map_err(runtime)?;
    }
    let fit: Vec<f64> = match rank {
        None => match &robust {
            Some(spec) => robust_boost(&smoother, data.y(), spec, args.iters)
                .map_err(runtime)?
                .final_fit()
                .to_vec(),
            None => l2_boost(&smoother, data.y(), args.iters)
                .map_err(runtime)?
                .final_fit()
                .to_vec(),
        },
        Some(d) => {
            let dec = eigendecompose(&smoother).map_err(|e| {
                runtime(format!("--rank requires a symmetric smoother: {e}"))
            })?;
            let op = boosting_operator(&dec, args.iters, d).map_err(runtime)?;
            match &robust {
                // low-rank operator as the base learner of the robust scheme
                Some(spec) => robust_boost(&op, data.y(), spec, args.iters)
                    .map_err(runtime)?
                    .final_fit()
                    .to_vec(),
                None => op.smooth(data.y()),
            }
        }
    };

    emit_csv(args.out.as_ref(), &["x", "y", "fit"], &[data.x(), data.y(), &fit])
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let req = resolve_smoother(&args.smoother)?;
    let data = load_data(&args.data)?;
    let robust = resolve_robust(&args.robust, &data, &req, args.iters)?;

    let points: Vec<f64> = match (&args.points, &args.points_file) {
        (Some(spec), None) => parse_grid_spec(spec, "--points")?,
        (None, Some(path)) => {
            let loaded = io::load_dataset(path, Some(("x", "x")), None);
            match loaded {
                Ok(d) => d.x().to_vec(),
                Err(_) => {
                    // single-column file: fall back to x,y reader semantics
                    return Err(usage(format!(
                        "--points-file: {} must be a CSV with an 'x' column",
                        path.display()
                    )));
                }
            }
        }
        _ => return Err(usage("exactly one of --points or --points-file is required")),
    };

    let method = Method {
        kind: req.kind,
        kernel: experiments::KernelKindSer(req.kernel),
        robust_c: robust.as_ref().map(|r| r.cutoff),
    };
    let pred = experiments::predict_at(&data, &method, req.param, args.iters, req.grid_size, &points)
        .map_err(runtime)?;
    emit_csv(args.out.as_ref(), &["x", "prediction"], &[&points, &pred])
}

fn cmd_cv(args: CvArgs) -> Result<(), CliError> {
    let req = resolve_smoother_for_cv(&args.smoother)?;
    let data = load_data(&args.data)?;
    let grid = parse_grid_spec(&args.param_grid, "--param-grid")?;
    for &p in &grid {
        let ok = if req.0.uses_bandwidth() { p > 0.0 } else { p >= 0.0 };
        if !ok {
            return Err(usage(format!(
                "--param-grid: value {p} invalid for the {} smoother",
                req.0.name()
            )));
        }
    }
    if args.folds < 2 {
        return Err(usage("--folds: need at least 2"));
    }

    let robust = if args.robust.robust {
        if args.robust.huber_c == "auto" {
            return Err(usage(
                "--huber-c: cross-validation needs an explicit numeric cutoff (auto depends on a fitted model)",
            ));
        }
        let c: f64 = args
            .robust
            .huber_c
            .parse()
            .map_err(|_| usage(format!("--huber-c: unparsable number '{}'", args.robust.huber_c)))?;
        if !(c > 0.0) {
            return Err(usage(format!("--huber-c: must be positive, got {c}")));
        }
        Some(
            RobustSpec::new(c)
                .and_then(|s| s.with_tolerance(args.robust.psi_tol, args.robust.psi_max_iter))
                .map_err(runtime)?,
        )
    } else {
        None
    };

    let config = CvConfig {
        smoother: method_to_cv(req.0, req.1),
        grid_size: req.2,
        robust,
        b_max: args.b_max,
        folds: args.folds,
        seed: args.seed,
    };
    let result = kfold_cv(&data, &config, &grid).map_err(runtime)?;

    if result.infinite_cells > 0 {
        eprintln!(
            "warning: {} grid cells could not be evaluated and were marked infinite",
            result.infinite_cells
        );
    }

    let params: Vec<f64> = result.grid.iter().map(|c| c.param).collect();
    let bs: Vec<f64> = result.grid.iter().map(|c| c.b as f64).collect();
    let losses: Vec<f64> = result.grid.iter().map(|c| c.loss).collect();
    emit_csv(args.out.as_ref(), &["param", "b", "loss"], &[&params, &bs, &losses])?;
    println!(
        "best param={} b={} loss={}",
        fmt_g17(result.best_param),
        result.best_b,
        fmt_g17(result.best_loss)
    );
    Ok(())
}

/// CV variant of smoother resolution: no fixed parameter is required.
fn resolve_smoother_for_cv(args: &SmootherArgs) -> Result<(MethodKind, KernelKind, usize), CliError> {
    let kind = parse_method_kind(&args.smoother)?;
    let kernel = parse_kernel(&args.kernel)?;
    if args.grid < 2 {
        return Err(usage("--grid: need at least 2 quadrature points"));
    }
    if args.bandwidth.is_some() || args.lambda.is_some() {
        return Err(usage("cv tunes the parameter; use --param-grid instead of --bandwidth/--lambda"));
    }
    Ok((kind, kernel, args.grid))
}

fn method_to_cv(kind: MethodKind, kernel: KernelKind) -> kboost_core::CvSmoother {
    use kboost_core::CvSmoother;
    match kind {
        MethodKind::Lc => CvSmoother::Projection {
            order: PolyOrder::Constant,
            kernel,
        },
        MethodKind::Ll => CvSmoother::Projection {
            order: PolyOrder::Linear,
            kernel,
        },
        MethodKind::Nw => CvSmoother::NadarayaWatson { kernel },
        MethodKind::Spline => CvSmoother::CubicSpline,
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let model = parse_model(&args.model)?;
    let errors = parse_errors(&args.errors)?;
    if args.n < 2 {
        return Err(usage(format!("--n: need at least 2 observations, got {}", args.n)));
    }
    let mut rng = CounterRng::new(args.seed);
    let sim = simulate(model, errors, args.n, &mut rng);
    emit_csv(
        args.out.as_ref(),
        &["x", "y", "truth"],
        &[sim.data.x(), sim.data.y(), &sim.truth],
    )
}

fn cmd_eigen(args: EigenArgs) -> Result<(), CliError> {
    let req = resolve_smoother(&args.smoother)?;
    let data = load_data(&args.data)?;
    let smoother = build_smoother(&req, &data)?;
    if smoother.is_symmetric() {
        let dec = eigendecompose(&smoother).map_err(runtime)?;
        let k: Vec<f64> = (1..=dec.n()).map(|i| i as f64).collect();
        emit_csv(args.out.as_ref(), &["k", "lambda"], &[&k, dec.eigenvalues()])
    } else {
        let spectrum = nonsymmetric_spectrum(&smoother).map_err(runtime)?;
        let k: Vec<f64> = (1..=spectrum.len()).map(|i| i as f64).collect();
        let re: Vec<f64> = spectrum.iter().map(|v| v.re).collect();
        let im: Vec<f64> = spectrum.iter().map(|v| v.im).collect();
        emit_csv(args.out.as_ref(), &["k", "re", "im"], &[&k, &re, &im])
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let kernel = parse_kernel(&args.kernel)?;
    let mut opts = if args.paper_scale {
        StudyOptions::paper(args.seed)
    } else {
        StudyOptions::desk(args.seed)
    };
    opts.jobs = args.jobs;
    if let Some(r) = args.replicates {
        opts.replicates = r;
    }
    if let Some(r) = args.repeats {
        opts.repeats = r;
    }
    if let Some(b) = args.b_max {
        opts.cv_b_max = b;
    }
    if let Some(c) = args.param_count {
        opts.bandwidth_count = c;
        opts.lambda_count = c;
    }

    let model = parse_model(&args.model)?;
    let methods: Vec<Method> = parse_methods(&args.methods, kernel)?;

    let created = match args.study.as_str() {
        "tables" => {
            let errors = parse_errors(&args.errors)?;
            let n_list = match &args.n_list {
                Some(s) => parse_usize_list(s, "--n-list")?,
                None => vec![100, 200],
            };
            let report = experiments::run_benchmark(model, errors, &methods, &n_list, &opts)
                .map_err(runtime)?;
            report::write_benchmark_report(&report, &args.out_dir).map_err(runtime)?
        }
        "lowrank" => {
            let n_list = match &args.n_list {
                Some(s) => parse_usize_list(s, "--n-list")?,
                None => vec![100, 200],
            };
            let ranks = parse_usize_list(&args.ranks, "--ranks")?;
            let n_specs: Vec<(usize, usize)> =
                n_list.iter().map(|&n| (n, opts.replicates)).collect();
            let report = experiments::run_lowrank_study(
                model,
                ErrorLaw::Normal,
                kernel,
                &n_specs,
                &ranks,
                &opts,
            )
            .map_err(runtime)?;
            report::write_benchmark_report(&report, &args.out_dir).map_err(runtime)?
        }
        "robust" => {
            let n_list = match &args.n_list {
                Some(s) => parse_usize_list(s, "--n-list")?,
                None => vec![100, 200],
            };
            let c_list = parse_f64_list(&args.c_list, "--c-list")?;
            for &c in &c_list {
                if !(c > 0.0) {
                    return Err(usage(format!("--c-list: cutoffs must be positive, got {c}")));
                }
            }
            let report = experiments::run_robust_study(model, &methods, &n_list, &c_list, &opts)
                .map_err(runtime)?;
            report::write_benchmark_report(&report, &args.out_dir).map_err(runtime)?
        }
        "real" => {
            let path = args
                .data
                .as_ref()
                .ok_or_else(|| usage("--data: the real study needs a dataset CSV"))?;
            let (xc, yc) = parse_cols(&args.cols)?;
            let data = io::load_dataset(path, Some((&xc, &yc)), None).map_err(runtime)?;
            let mut ropts = if args.paper_scale {
                RealOptions::paper(args.seed)
            } else {
                RealOptions::desk(args.seed)
            };
            ropts.jobs = args.jobs;
            ropts.kernel = experiments::KernelKindSer(kernel);
            ropts.scale = args
                .scale
                .parse()
                .map_err(|e: String| usage(format!("--scale: {e}")))?;
            if let Some(b) = args.b_max {
                ropts.cv_b_max = b;
            }
            if let Some(c) = args.param_count {
                ropts.bandwidth_count = c;
                ropts.lambda_count = c;
            }
            let report = experiments::run_real_data(&data, &ropts).map_err(runtime)?;
            println!("pilot sigma_hat = {}", fmt_g17(report.sigma_hat));
            report::write_real_report(&report, &args.out_dir).map_err(runtime)?
        }
        other => {
            return Err(usage(format!(
                "--study: unknown study '{other}' (expected tables, lowrank, robust or real)"
            )))
        }
    };

    for path in created {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_methods(s: &str, kernel: KernelKind) -> Result<Vec<Method>, CliError> {
    s.split(',')
        .map(|p| {
            let kind = MethodKind::from_str(p.trim())
                .map_err(|e| usage(format!("--methods: {e}")))?;
            Ok(Method::new(kind, kernel))
        })
        .collect()
}
