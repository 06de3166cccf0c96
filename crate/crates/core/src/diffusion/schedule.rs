use serde::{Deserialize, Serialize};

use super::DiffusionError;

pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_BETA_START: f64 = 1e-4;
pub const DEFAULT_BETA_END: f64 = 0.02;

/// Per-step forward variances `beta_t` and their cumulative signal
/// retention `alphabar_t = prod_{s<=t} (1 - beta_s)`, for `t = 1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alphabars: Vec<f64>,
}

impl NoiseSchedule {
    /// Builds a schedule from explicit variances.
    pub fn from_betas(betas: Vec<f64>) -> Result<Self, DiffusionError> {
        if betas.is_empty() {
            return Err(DiffusionError::InvalidRange("at least one step is required".into()));
        }
        if let Some((i, b)) = betas.iter().enumerate().find(|(_, b)| !(**b > 0.0 && **b < 1.0)) {
            return Err(DiffusionError::InvalidRange(format!("beta_{} = {b} not in (0, 1)", i + 1)));
        }
        if betas.windows(2).any(|w| w[1] < w[0]) {
            return Err(DiffusionError::InvalidRange("betas must be non-decreasing".into()));
        }
        let mut product = 1.0;
        let alphabars = betas
            .iter()
            .map(|b| {
                product *= 1.0 - b;
                product
            })
            .collect();
        Ok(Self { betas, alphabars })
    }

    /// Number of steps `T`.
    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    /// `beta_t` for `t` in `1..=T`.
    pub fn beta(&self, t: usize) -> f64 {
        self.betas[t - 1]
    }

    /// `alphabar_t` for `t` in `0..=T`, with `alphabar_0 = 1`.
    pub fn alphabar(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alphabars[t - 1]
        }
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphabars(&self) -> &[f64] {
        &self.alphabars
    }

    pub(crate) fn check_step(&self, t: usize) -> Result<(), DiffusionError> {
        if t > self.steps() {
            return Err(DiffusionError::StepOutOfRange {
                step: t,
                steps: self.steps(),
            });
        }
        Ok(())
    }
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        make_linear_schedule(DEFAULT_STEPS, DEFAULT_BETA_START, DEFAULT_BETA_END)
            .expect("default schedule is valid")
    }
}

/// `steps` variances spaced linearly from `beta_start` to `beta_end`
/// inclusive.
pub fn make_linear_schedule(
    steps: usize,
    beta_start: f64,
    beta_end: f64,
) -> Result<NoiseSchedule, DiffusionError> {
    if steps == 0 {
        return Err(DiffusionError::InvalidRange("T must be at least 1".into()));
    }
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(DiffusionError::InvalidRange(format!(
            "need 0 < beta_start <= beta_end < 1, got [{beta_start}, {beta_end}]"
        )));
    }
    let betas = if steps == 1 {
        vec![beta_start]
    } else {
        let span = beta_end - beta_start;
        let last = (steps - 1) as f64;
        (0..steps)
            .map(|i| if i == steps - 1 { beta_end } else { beta_start + span * i as f64 / last })
            .collect()
    };
    NoiseSchedule::from_betas(betas)
}
