//! Simulation designs for the benchmark harness: two regression truths on
//! `U(-0.5, 0.5)` covariates, with Gaussian (variance 2) or t(3) errors.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::fmath;
use crate::rng::CounterRng;
use crate::smoothers::Dataset;

const SUPPORT: (f64, f64) = (-0.5, 0.5);

/// Regression truth used to generate data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulationModel {
    /// `m(x) = 0.8 x + sin(6 x)`
    M1,
    /// `m(x) = 0.4 (3 sin(4 pi x) + 2 sin(3 pi x))`
    M2,
}

impl SimulationModel {
    pub fn truth(&self, x: f64) -> f64 {
        match self {
            SimulationModel::M1 => 0.8 * x + fmath::sin(6.0 * x),
            SimulationModel::M2 => 0.4 * (3.0 * fmath::sin(4.0 * PI * x) + 2.0 * fmath::sin(3.0 * PI * x)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SimulationModel::M1 => "m1",
            SimulationModel::M2 => "m2",
        }
    }
}

impl FromStr for SimulationModel {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "m1" => Ok(SimulationModel::M1),
            "m2" => Ok(SimulationModel::M2),
            other => Err(alloc::format!("unknown model '{other}' (expected m1 or m2)")),
        }
    }
}

impl fmt::Display for SimulationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Error distribution of the simulated noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorLaw {
    /// `N(0, 2)` -- variance 2
    Normal,
    /// Student t with 3 degrees of freedom
    StudentT3,
}

impl ErrorLaw {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorLaw::Normal => "normal",
            ErrorLaw::StudentT3 => "t3",
        }
    }
}

impl FromStr for ErrorLaw {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(ErrorLaw::Normal),
            "t3" => Ok(ErrorLaw::StudentT3),
            other => Err(alloc::format!("unknown error law '{other}' (expected normal or t3)")),
        }
    }
}

impl fmt::Display for ErrorLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A simulated sample plus the truth evaluated at its covariates.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub data: Dataset,
    pub truth: Vec<f64>,
}

/// Draw a sample of size `n` from the model. Covariates are drawn before
/// errors, so two runs on identically seeded streams share the design even
/// across different error laws.
pub fn simulate(
    model: SimulationModel,
    errors: ErrorLaw,
    n: usize,
    rng: &mut CounterRng,
) -> SimulatedData {
    let x: Vec<f64> = (0..n).map(|_| rng.uniform(SUPPORT.0, SUPPORT.1)).collect();
    let truth: Vec<f64> = x.iter().map(|&v| model.truth(v)).collect();
    let noise_sd = fmath::sqrt(2.0);
    let y: Vec<f64> = truth
        .iter()
        .map(|&m| {
            m + match errors {
                ErrorLaw::Normal => noise_sd * rng.normal(),
                ErrorLaw::StudentT3 => rng.student_t3(),
            }
        })
        .collect();
    let data = Dataset::with_support(x, y, SUPPORT.0, SUPPORT.1)
        .expect("simulated sample is always valid");
    SimulatedData { data, truth }
}
