//! Kernel-regression L2 boosting with symmetric projection smoothers.
//!
//! The crate builds `n x n` linear smoother matrices for a univariate
//! regression sample -- projection-based local constant/linear smoothers,
//! Nadaraya-Watson, and natural cubic smoothing splines -- and runs L2
//! boosting on top of them. Because the projection smoothers are symmetric
//! with spectrum in `[0, 1]`, boosting admits a spectral closed form, which
//! in turn supports low-rank truncation and bias/variance diagnostics.
//! A pseudo-data fixed-point fitter robustifies the whole pipeline under
//! the Huber loss.
//!
//! The crate is `no_std`-compatible (requires `alloc`); all floating-point
//! transcendentals go through `libm` so results are bit-reproducible across
//! platforms.
//!
//! Modules map onto the major moving parts:
//!
//! * [`kernels`] -- kernel densities, scaled kernels, boundary correction,
//!   and the trapezoid quadrature grid.
//! * [`smoothers`] -- smoother-matrix construction and test-point rows.
//! * [`spectral`] -- symmetric eigendecomposition, the boosting operator in
//!   spectral form, low-rank truncation, approximation error, bias/variance.
//! * [`boosting`] -- the iterative boosting engine and out-of-sample
//!   prediction.
//! * [`robust`] -- Huber loss, the pseudo-data fixed point, robustified
//!   boosting, and robust scale estimation.
//! * [`tuning`] -- loss criteria and k-fold cross-validation over
//!   `(bandwidth, iterations)` grids.
//! * [`sim`] -- the simulation models used by the benchmark harness.
//! * [`rng`] -- a counter-based RNG with explicit stream splitting.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// validators use `!(x > 0.0)` so NaN is rejected along with nonpositives
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// dense index arithmetic mirrors the classical algorithm statements
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod boosting;
pub mod eigen;
mod fmath;
pub mod kernels;
pub mod matrix;
pub mod rng;
pub mod robust;
pub mod sim;
pub mod smoothers;
mod spline;
pub mod spectral;
pub mod tuning;

pub use boosting::{boost_predict, l2_boost, BoostTrajectory};
pub use kernels::{
    boundary_corrected_weight, kernel_eval, scaled_kernel, KernelKind, KernelSpec, QuadratureGrid,
};
pub use matrix::Mat;
pub use rng::CounterRng;
pub use robust::{
    huber_constant, huber_psi, huber_rho, mad_scale, pseudo_data_fit, robust_boost, robust_scale,
    PseudoFit, RobustSpec,
};
pub use sim::{simulate, ErrorLaw, SimulatedData, SimulationModel};
pub use smoothers::{
    apply, build_nw_smoother, build_projection_smoother, build_spline_smoother, nw_test_row,
    spline_test_rows, test_row, Dataset, PolyOrder, Smoother, SmootherKind, SmootherMatrix,
    SplineConfig,
};
pub use spectral::{
    approximation_error, bias_variance_profile, boosting_operator, default_rank, eigendecompose,
    nonsymmetric_spectrum, ComplexEigenvalue, LowRankOperator, SpectralDecomposition,
};
pub use tuning::{kfold_cv, mse, mse_rho, mse_t, CvConfig, CvResult, CvSmoother};
