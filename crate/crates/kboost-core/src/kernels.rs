//! Kernel densities, scaled kernels, the boundary-corrected kernel, and the
//! trapezoid quadrature grid used to discretize the smoother integrals.
//!
//! The boundary-corrected kernel renormalizes `K_h(u - v)` so that its
//! quadrature sum over the grid equals one for every data point `v`. The
//! normalizing denominator is computed with the *same* grid as any outer
//! integral, which is what makes the smoother rows sum to one up to floating
//! point instead of up to quadrature error.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::fmath;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Supported kernel densities. All are symmetric probability densities; the
/// compact ones live on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Epanechnikov,
    Gaussian,
    Triangular,
    Uniform,
    Biweight,
}

impl KernelKind {
    pub const ALL: [KernelKind; 5] = [
        KernelKind::Epanechnikov,
        KernelKind::Gaussian,
        KernelKind::Triangular,
        KernelKind::Uniform,
        KernelKind::Biweight,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Epanechnikov => "epanechnikov",
            KernelKind::Gaussian => "gaussian",
            KernelKind::Triangular => "triangular",
            KernelKind::Uniform => "uniform",
            KernelKind::Biweight => "biweight",
        }
    }

    /// Half-width of the support in bandwidth units. The Gaussian has
    /// unbounded support; six bandwidth units carry all but ~2e-9 of its
    /// mass and serve as its effective reach for support checks.
    pub fn effective_support(&self) -> f64 {
        match self {
            KernelKind::Gaussian => 6.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "epanechnikov" => Ok(KernelKind::Epanechnikov),
            "gaussian" => Ok(KernelKind::Gaussian),
            "triangular" => Ok(KernelKind::Triangular),
            "uniform" => Ok(KernelKind::Uniform),
            "biweight" => Ok(KernelKind::Biweight),
            other => Err(KernelError::UnknownKernel(String::from(other))),
        }
    }
}

/// Kernel kind plus bandwidth, in covariate units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, bandwidth: f64) -> Result<Self, KernelError> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(KernelError::InvalidBandwidth(bandwidth));
        }
        Ok(KernelSpec { kind, bandwidth })
    }

    /// Distance beyond which the kernel mass is treated as zero.
    pub fn reach(&self) -> f64 {
        self.kind.effective_support() * self.bandwidth
    }
}

/// Errors from kernel and grid construction or evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    InvalidBandwidth(f64),
    UnknownKernel(String),
    /// The grid must have at least two strictly ascending points.
    InvalidGrid(String),
    /// The point has no kernel mass on the quadrature grid.
    PointOutsideSupport { point: f64 },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::InvalidBandwidth(h) => {
                write!(f, "bandwidth must be positive and finite, got {h}")
            }
            KernelError::UnknownKernel(name) => write!(
                f,
                "unknown kernel '{name}' (expected epanechnikov, gaussian, triangular, uniform or biweight)"
            ),
            KernelError::InvalidGrid(msg) => write!(f, "invalid quadrature grid: {msg}"),
            KernelError::PointOutsideSupport { point } => {
                write!(f, "point {point} outside smoothing support")
            }
        }
    }
}

impl core::error::Error for KernelError {}

/// Base kernel density `K(u)`.
pub fn kernel_eval(kind: KernelKind, u: f64) -> f64 {
    match kind {
        KernelKind::Epanechnikov => {
            if fmath::abs(u) >= 1.0 {
                0.0
            } else {
                0.75 * (1.0 - u * u)
            }
        }
        KernelKind::Gaussian => FRAC_1_SQRT_2PI * fmath::exp(-0.5 * u * u),
        KernelKind::Triangular => {
            let a = fmath::abs(u);
            if a >= 1.0 {
                0.0
            } else {
                1.0 - a
            }
        }
        KernelKind::Uniform => {
            if fmath::abs(u) > 1.0 {
                0.0
            } else {
                0.5
            }
        }
        KernelKind::Biweight => {
            if fmath::abs(u) >= 1.0 {
                0.0
            } else {
                let t = 1.0 - u * u;
                0.9375 * t * t
            }
        }
    }
}

/// Scaled kernel `K_h(u) = K(u / h) / h`.
pub fn scaled_kernel(spec: &KernelSpec, u: f64) -> f64 {
    kernel_eval(spec.kind, u / spec.bandwidth) / spec.bandwidth
}

/// Uniform quadrature grid with trapezoid weights over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl QuadratureGrid {
    /// Default grid length used throughout the crate.
    pub const DEFAULT_SIZE: usize = 200;

    pub fn uniform(lo: f64, hi: f64, size: usize) -> Result<Self, KernelError> {
        if size < 2 {
            return Err(KernelError::InvalidGrid(String::from(
                "grid needs at least 2 points",
            )));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(KernelError::InvalidGrid(String::from(
                "grid bounds must be finite with lo < hi",
            )));
        }
        let step = (hi - lo) / (size - 1) as f64;
        let mut points = Vec::with_capacity(size);
        let mut weights = Vec::with_capacity(size);
        for i in 0..size {
            let x = if i == size - 1 {
                hi
            } else {
                lo + step * i as f64
            };
            points.push(x);
            let w = if i == 0 || i == size - 1 {
                0.5 * step
            } else {
                step
            };
            weights.push(w);
        }
        Ok(QuadratureGrid {
            points,
            weights,
            lo,
            hi,
        })
    }

    #[inline]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Trapezoid integral of `f` over the grid.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(self.weights.iter())
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Normalizing mass `sum_g w_g K_h(x_g - v)` of the corrected kernel at `v`.
    pub fn kernel_mass(&self, spec: &KernelSpec, v: f64) -> f64 {
        self.integrate(|x| scaled_kernel(spec, x - v))
    }
}

/// Boundary-corrected kernel weight `K_h(u, v) = K_h(u - v) / sum_g w_g K_h(x_g - v)`.
///
/// `u` is the evaluation (grid) point and `v` the data point being corrected
/// for. Errors when `v` has no kernel mass anywhere on the grid.
pub fn boundary_corrected_weight(
    spec: &KernelSpec,
    u: f64,
    v: f64,
    grid: &QuadratureGrid,
) -> Result<f64, KernelError> {
    let denom = grid.kernel_mass(spec, v);
    if denom <= 0.0 {
        return Err(KernelError::PointOutsideSupport { point: v });
    }
    Ok(scaled_kernel(spec, u - v) / denom)
}
