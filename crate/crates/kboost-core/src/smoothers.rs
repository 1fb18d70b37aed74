//! Construction of the `n x n` linear smoothers and their test-point rows.
//!
//! Four smoother families are supported:
//!
//! * projection-based local constant / local linear (`H*`), built by
//!   integrating local least-squares projections over the covariate support
//!   with a boundary-corrected kernel -- symmetric with spectrum in `[0, 1]`;
//! * Nadaraya-Watson, the row-normalized kernel matrix -- not symmetric;
//! * natural cubic smoothing spline hat matrix `(I + lambda K)^{-1}`.
//!
//! The projection entries are quadrature sums over the grid: at each grid
//! point `x` the corrected kernel weights define a weighted least-squares
//! projection, and entry `(i, j)` accumulates
//! `w_i(x) [1, u_i] G(x)^{-1} [1, u_j]^T w_j(x)` (second components dropped
//! for the local constant case). Because the corrected kernel is normalized
//! on the same grid, every row and column sums to one up to floating point.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath;
use crate::kernels::{scaled_kernel, KernelError, KernelSpec, QuadratureGrid};
use crate::matrix::Mat;
use crate::spline;

/// Relative condition-number threshold past which a local 2x2 Gram matrix is
/// treated as degenerate and ridged.
const GRAM_COND_LIMIT: f64 = 1e12;
/// Ridge added to degenerate local Gram matrices, as a fraction of the trace.
const GRAM_RIDGE: f64 = 1e-10;
/// Tie jitter for spline knots, as a fraction of the support width. Kept
/// large enough that the Reinsch system stays positive definite in f64 for
/// smoothing parameters up to ~1e4 times the support scale.
const TIE_JITTER: f64 = 1e-6;

/// Paired covariate/response sample with a declared covariate support.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    support: (f64, f64),
}

impl Dataset {
    /// Dataset with support defaulting to `[min x, max x]`.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, SmootherError> {
        if x.is_empty() {
            return Err(SmootherError::InvalidData(String::from("empty sample")));
        }
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self::with_support(x, y, lo, hi)
    }

    pub fn with_support(x: Vec<f64>, y: Vec<f64>, lo: f64, hi: f64) -> Result<Self, SmootherError> {
        if x.len() != y.len() {
            return Err(SmootherError::InvalidData(String::from(
                "x and y lengths differ",
            )));
        }
        if x.len() < 2 {
            return Err(SmootherError::InvalidData(String::from(
                "need at least 2 observations",
            )));
        }
        if !x.iter().chain(y.iter()).all(|v| v.is_finite()) {
            return Err(SmootherError::InvalidData(String::from(
                "non-finite value in sample",
            )));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(SmootherError::InvalidData(String::from(
                "support must be finite with lo < hi",
            )));
        }
        if x.iter().any(|&v| v < lo || v > hi) {
            return Err(SmootherError::InvalidData(String::from(
                "covariate outside declared support",
            )));
        }
        Ok(Dataset {
            x,
            y,
            support: (lo, hi),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn support_width(&self) -> f64 {
        self.support.1 - self.support.0
    }

    /// Uniform trapezoid grid over the declared support.
    pub fn grid(&self, size: usize) -> Result<QuadratureGrid, KernelError> {
        QuadratureGrid::uniform(self.support.0, self.support.1, size)
    }

    /// Subset by index, keeping the declared support.
    pub fn subset(&self, idx: &[usize]) -> Result<Dataset, SmootherError> {
        let x: Vec<f64> = idx.iter().map(|&i| self.x[i]).collect();
        let y: Vec<f64> = idx.iter().map(|&i| self.y[i]).collect();
        Dataset::with_support(x, y, self.support.0, self.support.1)
    }

    /// Number of tied covariate values (spline knots get jittered by these).
    pub fn tie_count(&self) -> usize {
        let mut sorted = self.x.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.windows(2).filter(|w| w[0] == w[1]).count()
    }
}

/// Local polynomial order for the projection smoothers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOrder {
    /// local constant (p = 0)
    Constant,
    /// local linear (p = 1)
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmootherKind {
    ProjectionLc,
    ProjectionLl,
    NadarayaWatson,
    CubicSpline,
}

impl fmt::Display for SmootherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SmootherKind::ProjectionLc => "lc",
            SmootherKind::ProjectionLl => "ll",
            SmootherKind::NadarayaWatson => "nw",
            SmootherKind::CubicSpline => "spline",
        };
        f.write_str(s)
    }
}

/// Smoothing parameters carried by a built smoother.
#[derive(Debug, Clone, PartialEq)]
pub enum SmootherParams {
    Kernel(KernelSpec),
    Spline(SplineConfig),
}

/// Smoothing-spline configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineConfig {
    pub lambda: f64,
}

impl SplineConfig {
    pub fn new(lambda: f64) -> Result<Self, SmootherError> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(SmootherError::InvalidData(String::from(
                "lambda must be finite and nonnegative",
            )));
        }
        Ok(SplineConfig { lambda })
    }
}

/// A built `n x n` linear smoother.
#[derive(Debug, Clone)]
pub struct SmootherMatrix {
    weights: Mat,
    kind: SmootherKind,
    params: SmootherParams,
    symmetric: bool,
}

impl SmootherMatrix {
    #[inline]
    pub fn n(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn weights(&self) -> &Mat {
        &self.weights
    }

    #[inline]
    pub fn kind(&self) -> SmootherKind {
        self.kind
    }

    #[inline]
    pub fn params(&self) -> &SmootherParams {
        &self.params
    }

    #[inline]
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Anything that maps a response vector to fitted values linearly.
///
/// Boosting and the pseudo-data fitter are generic over this, so low-rank
/// spectral operators plug in wherever a dense smoother would.
pub trait Smoother {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn smooth_into(&self, v: &[f64], out: &mut [f64]);

    fn smooth(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.smooth_into(v, &mut out);
        out
    }
}

impl Smoother for SmootherMatrix {
    fn len(&self) -> usize {
        self.n()
    }

    fn smooth_into(&self, v: &[f64], out: &mut [f64]) {
        self.weights.matvec_into(v, out);
    }
}

/// Errors from smoother construction and application.
#[derive(Debug, Clone, PartialEq)]
pub enum SmootherError {
    InvalidData(String),
    /// Every quadrature point had a degenerate local design.
    BandwidthTooSmall,
    /// A point has no kernel mass over the grid or training sample.
    PointOutsideSupport { point: f64 },
    LengthMismatch { expected: usize, got: usize },
    /// Spline knots still tied after jitter.
    NonDistinctX,
    Kernel(KernelError),
}

impl fmt::Display for SmootherError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmootherError::InvalidData(msg) => write!(f, "invalid data: {msg}"),
            SmootherError::BandwidthTooSmall => write!(f, "bandwidth too small for design"),
            SmootherError::PointOutsideSupport { point } => {
                write!(f, "point {point} outside smoothing support")
            }
            SmootherError::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            SmootherError::NonDistinctX => {
                write!(f, "covariate values not distinct even after tie jitter")
            }
            SmootherError::Kernel(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SmootherError {}

impl From<KernelError> for SmootherError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::PointOutsideSupport { point } => {
                SmootherError::PointOutsideSupport { point }
            }
            other => SmootherError::Kernel(other),
        }
    }
}

/// Shared machinery for one quadrature point of the projection construction.
struct LocalFit {
    /// indices (into the data) with positive kernel weight, ascending by x
    active: Vec<usize>,
    /// corrected kernel weight per active index
    w: Vec<f64>,
    /// `X_j - x` per active index
    u: Vec<f64>,
    /// inverse Gram entries; local constant uses `inv00` only
    inv00: f64,
    inv01: f64,
    inv11: f64,
    degenerate: bool,
}

struct ProjectionContext<'a> {
    data: &'a Dataset,
    spec: &'a KernelSpec,
    order: PolyOrder,
    grid: &'a QuadratureGrid,
    /// data indices sorted ascending by covariate
    order_by_x: Vec<usize>,
    sorted_x: Vec<f64>,
    /// corrected-kernel denominator per data index
    denom: Vec<f64>,
}

impl<'a> ProjectionContext<'a> {
    fn new(
        data: &'a Dataset,
        spec: &'a KernelSpec,
        order: PolyOrder,
        grid: &'a QuadratureGrid,
    ) -> Result<Self, SmootherError> {
        let n = data.n();
        let mut order_by_x: Vec<usize> = (0..n).collect();
        order_by_x.sort_by(|&i, &j| data.x[i].partial_cmp(&data.x[j]).unwrap());
        let sorted_x: Vec<f64> = order_by_x.iter().map(|&i| data.x[i]).collect();
        let mut denom = vec![0.0; n];
        for i in 0..n {
            let d = grid.kernel_mass(spec, data.x[i]);
            if d <= 0.0 {
                // a training point the grid cannot reach at this bandwidth
                return Err(SmootherError::BandwidthTooSmall);
            }
            denom[i] = d;
        }
        Ok(ProjectionContext {
            data,
            spec,
            order,
            grid,
            order_by_x,
            sorted_x,
            denom,
        })
    }

    /// Corrected kernel weights of all data points near grid point `x`,
    /// plus the inverse local Gram. Returns `None` when no point has mass.
    fn local_fit(&self, x: f64, buf: &mut LocalFit) -> bool {
        buf.active.clear();
        buf.w.clear();
        buf.u.clear();
        buf.degenerate = false;

        let reach = self.spec.reach();
        let lo = self.sorted_x.partition_point(|&v| v < x - reach);
        let hi = self.sorted_x.partition_point(|&v| v <= x + reach);
        for pos in lo..hi {
            let idx = self.order_by_x[pos];
            let k = scaled_kernel(self.spec, x - self.data.x[idx]);
            if k > 0.0 {
                buf.active.push(idx);
                buf.w.push(k / self.denom[idx]);
                buf.u.push(self.data.x[idx] - x);
            }
        }
        if buf.active.is_empty() {
            buf.degenerate = true;
            return false;
        }

        match self.order {
            PolyOrder::Constant => {
                let s: f64 = buf.w.iter().sum();
                buf.inv00 = 1.0 / s;
                buf.inv01 = 0.0;
                buf.inv11 = 0.0;
            }
            PolyOrder::Linear => {
                let mut g00 = 0.0;
                let mut g01 = 0.0;
                let mut g11 = 0.0;
                for (w, u) in buf.w.iter().zip(buf.u.iter()) {
                    g00 += w;
                    g01 += w * u;
                    g11 += w * u * u;
                }
                let trace = g00 + g11;
                let det = g00 * g11 - g01 * g01;
                let disc = fmath::sqrt((trace * trace - 4.0 * det).max(0.0));
                let eig_max = 0.5 * (trace + disc);
                let eig_min = 0.5 * (trace - disc);
                let (mut a00, mut a11) = (g00, g11);
                if !(eig_min > eig_max / GRAM_COND_LIMIT) {
                    // near-singular local design: ridge the Gram matrix
                    buf.degenerate = true;
                    let ridge = GRAM_RIDGE * trace;
                    a00 += ridge;
                    a11 += ridge;
                }
                let det = a00 * a11 - g01 * g01;
                buf.inv00 = a11 / det;
                buf.inv01 = -g01 / det;
                buf.inv11 = a00 / det;
            }
        }
        true
    }

    /// Quadratic form `[1, u_a] G^{-1} [1, u_b]^T` (the `u` terms drop out
    /// for the local constant case where `G^{-1}` is scalar).
    #[inline]
    fn pair_form(&self, buf: &LocalFit, ua: f64, ub: f64) -> f64 {
        match self.order {
            PolyOrder::Constant => buf.inv00,
            PolyOrder::Linear => buf.inv00 + buf.inv01 * (ua + ub) + buf.inv11 * (ua * ub),
        }
    }
}

/// Projection-based smoother `H*` of local polynomial order 0 or 1.
pub fn build_projection_smoother(
    data: &Dataset,
    spec: &KernelSpec,
    order: PolyOrder,
    grid: &QuadratureGrid,
) -> Result<SmootherMatrix, SmootherError> {
    let n = data.n();
    let ctx = ProjectionContext::new(data, spec, order, grid)?;
    let mut m = Mat::zeros(n, n);
    let mut buf = LocalFit {
        active: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        inv00: 0.0,
        inv01: 0.0,
        inv11: 0.0,
        degenerate: false,
    };
    let mut usable_points = 0usize;

    for (&x, &qw) in grid.points().iter().zip(grid.weights().iter()) {
        if !ctx.local_fit(x, &mut buf) {
            continue;
        }
        if !buf.degenerate {
            usable_points += 1;
        }
        for a in 0..buf.active.len() {
            let i = buf.active[a];
            let base = qw * buf.w[a];
            for b in a..buf.active.len() {
                let j = buf.active[b];
                let t = base * buf.w[b] * ctx.pair_form(&buf, buf.u[a], buf.u[b]);
                m.add_at(i, j, t);
                if i != j {
                    m.add_at(j, i, t);
                }
            }
        }
    }

    if usable_points == 0 {
        return Err(SmootherError::BandwidthTooSmall);
    }
    // exact by construction; guards the symmetric-eigensolver precondition
    m.symmetrize();

    Ok(SmootherMatrix {
        weights: m,
        kind: match order {
            PolyOrder::Constant => SmootherKind::ProjectionLc,
            PolyOrder::Linear => SmootherKind::ProjectionLl,
        },
        params: SmootherParams::Kernel(*spec),
        symmetric: true,
    })
}

/// Projection-smoother weight row for an arbitrary test point. When `x_test`
/// equals a training point this reproduces that training row.
pub fn test_row(
    data: &Dataset,
    spec: &KernelSpec,
    order: PolyOrder,
    grid: &QuadratureGrid,
    x_test: f64,
) -> Result<Vec<f64>, SmootherError> {
    let ctx = ProjectionContext::new(data, spec, order, grid)?;
    test_row_with(&ctx, x_test)
}

/// Several test rows sharing one context build.
pub fn test_rows(
    data: &Dataset,
    spec: &KernelSpec,
    order: PolyOrder,
    grid: &QuadratureGrid,
    x_test: &[f64],
) -> Result<Mat, SmootherError> {
    let ctx = ProjectionContext::new(data, spec, order, grid)?;
    let mut rows = Mat::zeros(x_test.len(), data.n());
    for (r, &x) in x_test.iter().enumerate() {
        let row = test_row_with(&ctx, x)?;
        rows.row_mut(r).copy_from_slice(&row);
    }
    Ok(rows)
}

fn test_row_with(ctx: &ProjectionContext<'_>, x_test: f64) -> Result<Vec<f64>, SmootherError> {
    let n = ctx.data.n();
    let denom_t = ctx.grid.kernel_mass(ctx.spec, x_test);
    if denom_t <= 0.0 {
        return Err(SmootherError::PointOutsideSupport { point: x_test });
    }
    // Gaussian tails never reach exact zero; apply the effective reach.
    let (lo, hi) = ctx.data.support();
    let reach = ctx.spec.reach();
    if x_test < lo - reach || x_test > hi + reach {
        return Err(SmootherError::PointOutsideSupport { point: x_test });
    }

    let mut row = vec![0.0; n];
    let mut buf = LocalFit {
        active: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        inv00: 0.0,
        inv01: 0.0,
        inv11: 0.0,
        degenerate: false,
    };
    for (&x, &qw) in ctx.grid.points().iter().zip(ctx.grid.weights().iter()) {
        let kt = scaled_kernel(ctx.spec, x - x_test);
        if kt <= 0.0 {
            continue;
        }
        if !ctx.local_fit(x, &mut buf) {
            continue;
        }
        let wt = kt / denom_t;
        let ut = x_test - x;
        let base = qw * wt;
        for b in 0..buf.active.len() {
            let j = buf.active[b];
            row[j] += base * buf.w[b] * ctx.pair_form(&buf, ut, buf.u[b]);
        }
    }
    Ok(row)
}

/// Nadaraya-Watson smoother: row-normalized (uncorrected) kernel matrix.
pub fn build_nw_smoother(data: &Dataset, spec: &KernelSpec) -> Result<SmootherMatrix, SmootherError> {
    let n = data.n();
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        let row = m.row_mut(i);
        let mut s = 0.0;
        for j in 0..n {
            let k = scaled_kernel(spec, data.x[i] - data.x[j]);
            row[j] = k;
            s += k;
        }
        if s <= 0.0 {
            // unreachable: the diagonal term K(0)/h is positive for all kinds
            return Err(SmootherError::BandwidthTooSmall);
        }
        row.iter_mut().for_each(|v| *v /= s);
    }
    Ok(SmootherMatrix {
        weights: m,
        kind: SmootherKind::NadarayaWatson,
        params: SmootherParams::Kernel(*spec),
        symmetric: false,
    })
}

/// Nadaraya-Watson weight row at an arbitrary point.
pub fn nw_test_row(
    data: &Dataset,
    spec: &KernelSpec,
    x_test: f64,
) -> Result<Vec<f64>, SmootherError> {
    let mut row: Vec<f64> = data
        .x
        .iter()
        .map(|&xj| scaled_kernel(spec, x_test - xj))
        .collect();
    let s: f64 = row.iter().sum();
    if s <= 0.0 {
        return Err(SmootherError::PointOutsideSupport { point: x_test });
    }
    row.iter_mut().for_each(|v| *v /= s);
    Ok(row)
}

/// Sorted distinct knots with the permutation mapping sorted position to the
/// original data index. Ties are jittered deterministically.
fn spline_knots(data: &Dataset) -> Result<(Vec<f64>, Vec<usize>), SmootherError> {
    let n = data.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| data.x[i].partial_cmp(&data.x[j]).unwrap());
    let mut knots: Vec<f64> = order.iter().map(|&i| data.x[i]).collect();
    let jitter = TIE_JITTER * data.support_width();
    for i in 1..n {
        if knots[i] <= knots[i - 1] {
            knots[i] = knots[i - 1] + jitter;
        }
    }
    for w in knots.windows(2) {
        if w[0] >= w[1] {
            return Err(SmootherError::NonDistinctX);
        }
    }
    Ok((knots, order))
}

/// Natural cubic smoothing-spline hat matrix in the data's own order.
pub fn build_spline_smoother(
    data: &Dataset,
    config: &SplineConfig,
) -> Result<SmootherMatrix, SmootherError> {
    let n = data.n();
    let (knots, order) = spline_knots(data)?;
    let hat_sorted = spline::hat_matrix(&knots, config.lambda);
    // permute back: entry (i, j) in data order
    let mut m = Mat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            m.set(order[a], order[b], hat_sorted.at(a, b));
        }
    }
    Ok(SmootherMatrix {
        weights: m,
        kind: SmootherKind::CubicSpline,
        params: SmootherParams::Spline(*config),
        symmetric: true,
    })
}

/// Smoothing-spline weight rows at arbitrary points, in the data's own
/// column order. Points outside the knot range use the spline's natural
/// linear extension.
pub fn spline_test_rows(
    data: &Dataset,
    config: &SplineConfig,
    x_test: &[f64],
) -> Result<Mat, SmootherError> {
    let n = data.n();
    let (knots, order) = spline_knots(data)?;
    let rows_sorted = spline::eval_rows(&knots, config.lambda, x_test);
    let mut rows = Mat::zeros(x_test.len(), n);
    for r in 0..x_test.len() {
        for a in 0..n {
            rows.set(r, order[a], rows_sorted.at(r, a));
        }
    }
    Ok(rows)
}

/// Fitted values `S v`.
pub fn apply(s: &SmootherMatrix, v: &[f64]) -> Result<Vec<f64>, SmootherError> {
    if v.len() != s.n() {
        return Err(SmootherError::LengthMismatch {
            expected: s.n(),
            got: v.len(),
        });
    }
    Ok(s.weights.matvec(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelKind;
    use crate::rng::CounterRng;

    fn toy_data(n: usize, seed: u64) -> Dataset {
        let mut rng = CounterRng::new(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let y: Vec<f64> = x.iter().map(|&v| v * v + 0.1 * rng.normal()).collect();
        Dataset::with_support(x, y, -0.5, 0.5).unwrap()
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![0.0], vec![1.0]).is_err());
        assert!(Dataset::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Dataset::new(vec![0.0, f64::NAN], vec![1.0, 2.0]).is_err());
        assert!(Dataset::with_support(vec![0.0, 2.0], vec![1.0, 1.0], 0.0, 1.0).is_err());
        let d = Dataset::new(vec![3.0, 1.0, 2.0], vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(d.support(), (1.0, 3.0));
    }

    #[test]
    fn projection_rows_and_columns_sum_to_one() {
        let data = toy_data(30, 5);
        let grid = data.grid(200).unwrap();
        for order in [PolyOrder::Constant, PolyOrder::Linear] {
            let spec = KernelSpec::new(KernelKind::Epanechnikov, 0.3).unwrap();
            let s = build_projection_smoother(&data, &spec, order, &grid).unwrap();
            for i in 0..data.n() {
                let rs: f64 = s.weights().row(i).iter().sum();
                assert!((rs - 1.0).abs() < 1e-8, "row {i} sums to {rs}");
            }
            for j in 0..data.n() {
                let cs: f64 = (0..data.n()).map(|i| s.weights().at(i, j)).sum();
                assert!((cs - 1.0).abs() < 1e-8, "col {j} sums to {cs}");
            }
            assert_eq!(s.weights().max_asymmetry(), 0.0);
        }
    }

    #[test]
    fn projection_matches_direct_entry_formula() {
        // independent oracle: evaluate the quadrature sum entrywise from the
        // boundary-corrected weights, without the shared context machinery
        use crate::kernels::boundary_corrected_weight;
        let data = toy_data(8, 77);
        let grid = data.grid(64).unwrap();
        let spec = KernelSpec::new(KernelKind::Gaussian, 0.25).unwrap();
        let s = build_projection_smoother(&data, &spec, PolyOrder::Linear, &grid).unwrap();
        let n = data.n();
        for i in 0..n {
            for j in 0..n {
                let mut want = 0.0;
                for (&x, &qw) in grid.points().iter().zip(grid.weights().iter()) {
                    let w: Vec<f64> = (0..n)
                        .map(|k| boundary_corrected_weight(&spec, x, data.x()[k], &grid).unwrap())
                        .collect();
                    let (mut g00, mut g01, mut g11) = (0.0, 0.0, 0.0);
                    for k in 0..n {
                        let u = data.x()[k] - x;
                        g00 += w[k];
                        g01 += w[k] * u;
                        g11 += w[k] * u * u;
                    }
                    let det = g00 * g11 - g01 * g01;
                    let (ui, uj) = (data.x()[i] - x, data.x()[j] - x);
                    let form = (g11 - g01 * (ui + uj) + g00 * ui * uj) / det;
                    want += qw * w[i] * w[j] * form;
                }
                let got = s.weights().at(i, j);
                assert!(
                    (got - want).abs() < 1e-10,
                    "entry ({i},{j}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn test_row_reproduces_training_rows() {
        let data = toy_data(25, 9);
        let grid = data.grid(200).unwrap();
        for order in [PolyOrder::Constant, PolyOrder::Linear] {
            let spec = KernelSpec::new(KernelKind::Epanechnikov, 0.25).unwrap();
            let s = build_projection_smoother(&data, &spec, order, &grid).unwrap();
            for i in [0usize, 7, 24] {
                let row = test_row(&data, &spec, order, &grid, data.x()[i]).unwrap();
                for j in 0..data.n() {
                    assert!(
                        (row[j] - s.weights().at(i, j)).abs() < 1e-10,
                        "row {i} entry {j}"
                    );
                }
            }
            // arbitrary point still sums to one
            let row = test_row(&data, &spec, order, &grid, 0.123).unwrap();
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn test_row_outside_support_errors() {
        let data = toy_data(25, 9);
        let grid = data.grid(100).unwrap();
        let spec = KernelSpec::new(KernelKind::Epanechnikov, 0.2).unwrap();
        let err = test_row(&data, &spec, PolyOrder::Constant, &grid, 0.9).unwrap_err();
        assert!(matches!(err, SmootherError::PointOutsideSupport { .. }));
        // within one bandwidth of the support edge is fine
        assert!(test_row(&data, &spec, PolyOrder::Constant, &grid, 0.62).is_ok());
    }

    #[test]
    fn nw_rows_sum_to_one() {
        let data = toy_data(40, 2);
        let spec = KernelSpec::new(KernelKind::Epanechnikov, 0.2).unwrap();
        let s = build_nw_smoother(&data, &spec).unwrap();
        assert!(!s.is_symmetric());
        for i in 0..data.n() {
            let rs: f64 = s.weights().row(i).iter().sum();
            assert!((rs - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spline_lambda_zero_is_identity() {
        let data = toy_data(10, 4);
        let s = build_spline_smoother(&data, &SplineConfig::new(0.0).unwrap()).unwrap();
        assert_eq!(s.weights(), &Mat::identity(10));
    }

    #[test]
    fn spline_rows_sum_to_one() {
        let data = toy_data(15, 8);
        let s = build_spline_smoother(&data, &SplineConfig::new(0.37).unwrap()).unwrap();
        for i in 0..15 {
            let rs: f64 = s.weights().row(i).iter().sum();
            assert!((rs - 1.0).abs() < 1e-8);
        }
        assert!(s.weights().max_asymmetry() < 1e-12);
    }

    #[test]
    fn spline_large_lambda_approaches_least_squares_line() {
        let data = toy_data(10, 6);
        let s = build_spline_smoother(&data, &SplineConfig::new(1e8).unwrap()).unwrap();
        let fit = apply(&s, data.y()).unwrap();
        // ordinary least-squares line
        let n = data.n() as f64;
        let sx: f64 = data.x().iter().sum();
        let sy: f64 = data.y().iter().sum();
        let sxx: f64 = data.x().iter().map(|v| v * v).sum();
        let sxy: f64 = data.x().iter().zip(data.y()).map(|(a, b)| a * b).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        for (f, &x) in fit.iter().zip(data.x()) {
            assert!((f - (intercept + slope * x)).abs() < 1e-4);
        }
    }

    #[test]
    fn spline_jitters_ties() {
        let x = vec![0.0, 0.5, 0.5, 1.0];
        let y = vec![1.0, 2.0, 2.5, 3.0];
        let data = Dataset::new(x, y).unwrap();
        assert_eq!(data.tie_count(), 1);
        let s = build_spline_smoother(&data, &SplineConfig::new(0.1).unwrap()).unwrap();
        for i in 0..4 {
            let rs: f64 = s.weights().row(i).iter().sum();
            assert!((rs - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn apply_checks_length() {
        let data = toy_data(10, 4);
        let s = build_spline_smoother(&data, &SplineConfig::new(0.0).unwrap()).unwrap();
        assert!(matches!(
            apply(&s, &[1.0]).unwrap_err(),
            SmootherError::LengthMismatch { .. }
        ));
        // identity smoother reproduces the response
        assert_eq!(apply(&s, data.y()).unwrap(), data.y().to_vec());
    }

    #[test]
    fn smoothers_preserve_constants() {
        let data = toy_data(20, 12);
        let grid = data.grid(200).unwrap();
        let ones = vec![1.0; 20];
        let spec = KernelSpec::new(KernelKind::Gaussian, 0.3).unwrap();
        let builders: Vec<SmootherMatrix> = vec![
            build_projection_smoother(&data, &spec, PolyOrder::Constant, &grid).unwrap(),
            build_projection_smoother(&data, &spec, PolyOrder::Linear, &grid).unwrap(),
            build_nw_smoother(&data, &spec).unwrap(),
            build_spline_smoother(&data, &SplineConfig::new(2.0).unwrap()).unwrap(),
        ];
        for s in builders {
            let out = apply(&s, &ones).unwrap();
            for v in out {
                assert!((v - 1.0).abs() < 1e-8, "{:?}", s.kind());
            }
        }
    }
}
