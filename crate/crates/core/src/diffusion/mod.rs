//! DDPM noise schedules, forward noising, the reverse step, and the
//! mask-blended sampling loop, generic over the noise predictor and the
//! latent codec.

mod codec;
mod latent;
pub mod noise;
mod sampler;
mod schedule;
mod toy;

pub use codec::{IdentityCodec, LatentCodec, PooledCodec};
pub use latent::Latent;
pub use sampler::{
    ddpm_step, masked_sample, q_sample, start_step, Conditioning, NoisePredictor, SamplerConfig,
};
pub use schedule::{make_linear_schedule, NoiseSchedule, DEFAULT_BETA_END, DEFAULT_BETA_START, DEFAULT_STEPS};
pub use toy::{prompt_color, toy_target, ToyPredictor};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiffusionError {
    #[error("invalid schedule: {0}")]
    InvalidRange(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("step {step} outside 0..={steps}")]
    StepOutOfRange { step: usize, steps: usize },
    #[error("strength must lie in (0, 1], got {0}")]
    InvalidStrength(f64),
    #[error("noise predictor failed: {0}")]
    PredictorFailure(String),
}
