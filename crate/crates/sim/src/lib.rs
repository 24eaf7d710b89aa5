//! Monte Carlo checks of three continuous-time enlargement examples
//! against closed-form values.
//!
//! * [`sim_exp_time`]: an exponential clock `ζ`, the random time `τ = ζ/2`
//!   and the asset `S_t = e^{λt} 𝟙{t < ζ}`.
//! * [`sim_discrete_time`]: an integer clock with geometric law and
//!   `τ = ζ − 1`.
//! * [`sim_poisson_insider`]: a Poisson process on `[0, T]` with the insider
//!   who knows `N_T` from the start.
//!
//! Trial `i` draws from the ChaCha8 stream `i` of the seed, so a report is
//! a pure function of the configuration regardless of thread scheduling.

mod engine;
mod examples;
mod report;

use serde::{Deserialize, Serialize};

pub use examples::{sim_discrete_time, sim_exp_time, sim_poisson_insider};
pub use report::{MCReport, PathCheck, Requirement, Statistic};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("clock law is not summable: {0}")]
    NonSummable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example {
    ExpTime,
    DiscreteTime,
    PoissonInsider,
}

impl std::str::FromStr for Example {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "exp_time" => Ok(Self::ExpTime),
            "discrete_time" => Ok(Self::DiscreteTime),
            "poisson_insider" => Ok(Self::PoissonInsider),
            _ => Err(SimError::InvalidConfig(format!(
                "unknown example {s:?} (expected exp_time, discrete_time or poisson_insider)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub example: Example,
    /// Rate of the exponential clock or of the Poisson process. Unused by
    /// the discrete example.
    pub lambda: f64,
    /// Horizon `T` of the reporting grid.
    pub horizon: f64,
    /// Spacing of the reporting grid.
    pub grid_step: f64,
    /// Ratio `r` of the geometric clock law `p_k = (1 − r) r^{k−1}`; only
    /// read by the discrete example (`r = ½` gives `p_k = 2^{−k}`).
    pub ratio: f64,
    pub paths: u64,
    pub seed: u64,
}

impl SimConfig {
    /// Defaults for an example: grid step `T/4` (1 for the discrete clock)
    /// and `r = ½`.
    pub fn new(example: Example, lambda: f64, horizon: f64, paths: u64, seed: u64) -> Self {
        let grid_step = match example {
            Example::DiscreteTime => 1.0,
            _ => horizon / 4.0,
        };
        Self {
            example,
            lambda,
            horizon,
            grid_step,
            ratio: 0.5,
            paths,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if self.paths == 0 {
            return bad("paths must be at least 1");
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("horizon must be a positive finite number");
        }
        if !(self.grid_step.is_finite() && self.grid_step > 0.0) {
            return bad("grid step must be positive");
        }
        if self.example != Example::DiscreteTime && !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad("lambda must be a positive finite number");
        }
        if self.example == Example::DiscreteTime && !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(SimError::NonSummable(format!(
                "geometric ratio {} must lie in (0, 1)",
                self.ratio
            )));
        }
        Ok(())
    }

    /// Grid points `step, 2·step, …` up to and including `T` (within
    /// rounding).
    pub fn grid(&self) -> Vec<f64> {
        let n = (self.horizon / self.grid_step + 1e-9).floor() as usize;
        (1..=n).map(|i| i as f64 * self.grid_step).collect()
    }
}

/// Runs the configured example.
pub fn simulate(cfg: &SimConfig) -> Result<MCReport, SimError> {
    match cfg.example {
        Example::ExpTime => sim_exp_time(cfg),
        Example::DiscreteTime => sim_discrete_time(cfg),
        Example::PoissonInsider => sim_poisson_insider(cfg),
    }
}
