use rayon::prelude::*;

use super::noise::{branch, gaussian, step_key};
use super::{DiffusionError, Latent, NoiseSchedule};
use crate::raster::{DepthMap, ViewImage};
use crate::texstate::{GenerationMask, Label};

/// Everything a noise predictor is conditioned on besides the noisy latent.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioning {
    pub prompt: String,
    pub depth: DepthMap,
    /// The current rendering of the view, used for regions that are kept.
    pub init_view: ViewImage,
}

/// Predicts the noise contained in `z_t`.
pub trait NoisePredictor: Sync {
    fn predict(&self, z_t: &Latent, t: usize, cond: &Conditioning) -> Result<Latent, DiffusionError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Fraction of the schedule run for `Update` regions, in `(0, 1]`.
    pub strength: f64,
    pub seed: u64,
    pub schedule: NoiseSchedule,
}

impl SamplerConfig {
    pub fn new(strength: f64, seed: u64, schedule: NoiseSchedule) -> Result<Self, DiffusionError> {
        if !(strength > 0.0 && strength <= 1.0) {
            return Err(DiffusionError::InvalidStrength(strength));
        }
        Ok(Self {
            strength,
            seed,
            schedule,
        })
    }
}

/// First step (counting down from `T`) at which `Update` regions are
/// denoised: `round(strength · T)`.
pub fn start_step(strength: f64, steps: usize) -> usize {
    (strength * steps as f64).round() as usize
}

#[inline]
fn q_sample_value(z0: f64, noise: f64, alphabar: f64) -> f64 {
    alphabar.sqrt() * z0 + (1.0 - alphabar).sqrt() * noise
}

/// Coefficients of the reverse step at `t`.
#[derive(Clone, Copy)]
struct StepCoeffs {
    inv_sqrt_alpha: f64,
    eps_scale: f64,
    sigma: f64,
}

impl StepCoeffs {
    fn at(schedule: &NoiseSchedule, t: usize) -> Self {
        let beta = schedule.beta(t);
        Self {
            inv_sqrt_alpha: 1.0 / (1.0 - beta).sqrt(),
            eps_scale: beta / (1.0 - schedule.alphabar(t)).sqrt(),
            sigma: if t > 1 { beta.sqrt() } else { 0.0 },
        }
    }

    #[inline]
    fn apply(&self, z: f64, eps: f64, noise: f64) -> f64 {
        self.inv_sqrt_alpha * (z - self.eps_scale * eps) + self.sigma * noise
    }
}

/// Forward-noises `z0` to step `t`: `sqrt(ab_t)·z0 + sqrt(1-ab_t)·noise`.
/// At `t = 0` this returns `z0` unchanged.
pub fn q_sample(
    z0: &Latent,
    t: usize,
    noise: &Latent,
    schedule: &NoiseSchedule,
) -> Result<Latent, DiffusionError> {
    z0.check_same_shape(noise, "q_sample noise")?;
    schedule.check_step(t)?;
    if t == 0 {
        return Ok(z0.clone());
    }
    let ab = schedule.alphabar(t);
    Ok(Latent {
        values: z0
            .values
            .iter()
            .zip(&noise.values)
            .map(|(&z, &n)| q_sample_value(z, n, ab))
            .collect(),
        ..*z0
    })
}

/// One ancestral DDPM step from `t` to `t-1` with epsilon prediction and
/// variance `beta_t` (zero at `t = 1`).
pub fn ddpm_step(
    z_t: &Latent,
    eps_hat: &Latent,
    t: usize,
    noise: &Latent,
    schedule: &NoiseSchedule,
) -> Result<Latent, DiffusionError> {
    z_t.check_same_shape(eps_hat, "ddpm_step prediction")?;
    z_t.check_same_shape(noise, "ddpm_step noise")?;
    if t == 0 {
        return Err(DiffusionError::StepOutOfRange {
            step: 0,
            steps: schedule.steps(),
        });
    }
    schedule.check_step(t)?;
    let c = StepCoeffs::at(schedule, t);
    Ok(Latent {
        values: z_t
            .values
            .iter()
            .zip(&eps_hat.values)
            .zip(&noise.values)
            .map(|((&z, &e), &n)| c.apply(z, e, n))
            .collect(),
        ..*z_t
    })
}

/// Mask-guided sampling.
///
/// Starts from pure noise at `T` and runs the reverse chain to 0. At each
/// step `t` the generated set is every `New` pixel, plus every `Update`
/// pixel once `t <= round(strength·T)`. Generated pixels take the reverse
/// step; all others are replaced by `init` forward-noised to `t-1` with
/// fresh noise, which is `init` itself at the last step. Pixels that are
/// never generated therefore come back bit-identical to `init`.
pub fn masked_sample(
    init: &Latent,
    mask: &GenerationMask,
    config: &SamplerConfig,
    predictor: &dyn NoisePredictor,
    cond: &Conditioning,
) -> Result<Latent, DiffusionError> {
    if init.width != mask.resolution || init.height != mask.resolution {
        return Err(DiffusionError::ShapeMismatch(format!(
            "mask is {0}x{0}, latent is {1}x{2}",
            mask.resolution, init.width, init.height
        )));
    }
    if !(config.strength > 0.0 && config.strength <= 1.0) {
        return Err(DiffusionError::InvalidStrength(config.strength));
    }
    let schedule = &config.schedule;
    let steps = schedule.steps();
    let t_start = start_step(config.strength, steps);
    let ch = init.channels;

    let key = step_key(config.seed, steps, branch::INIT);
    let mut z = Latent {
        values: (0..init.len() as u64).into_par_iter().map(|i| gaussian(key, i)).collect(),
        ..*init
    };

    for t in (1..=steps).rev() {
        let eps = predictor.predict(&z, t, cond)?;
        z.check_same_shape(&eps, "predicted noise")?;
        let coeffs = StepCoeffs::at(schedule, t);
        let reverse_key = step_key(config.seed, t, branch::REVERSE);
        let clamp_key = step_key(config.seed, t, branch::CLAMP);
        let ab_prev = schedule.alphabar(t - 1);
        let update_active = t <= t_start;
        let is_generated = |pixel: usize| match mask.labels[pixel] {
            Label::New => true,
            Label::Update => update_active,
            Label::Keep | Label::Ignore => false,
        };
        z.values
            .par_chunks_mut(ch)
            .zip(eps.values.par_chunks(ch))
            .zip(init.values.par_chunks(ch))
            .enumerate()
            .for_each(|(p, ((zp, ep), ip))| {
                let generate = is_generated(p);
                for c in 0..zp.len() {
                    let i = (p * ch + c) as u64;
                    zp[c] = if generate {
                        let n = if coeffs.sigma > 0.0 { gaussian(reverse_key, i) } else { 0.0 };
                        coeffs.apply(zp[c], ep[c], n)
                    } else if t == 1 {
                        ip[c]
                    } else {
                        q_sample_value(ip[c], gaussian(clamp_key, i), ab_prev)
                    };
                }
            });
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::make_linear_schedule;

    #[test]
    fn q_sample_boundaries() {
        let s = NoiseSchedule::default();
        let z0 = Latent::from_fn(3, 2, 3, |i| i as f64 * 0.1 - 0.4);
        let noise = Latent::from_fn(3, 2, 3, |i| (i as f64).sin());
        assert_eq!(q_sample(&z0, 0, &noise, &s).unwrap(), z0);
        let zero = Latent::zeros(3, 2, 3);
        let scaled = q_sample(&z0, 400, &zero, &s).unwrap();
        for (a, b) in scaled.values.iter().zip(&z0.values) {
            assert_eq!(*a, s.alphabar(400).sqrt() * b);
        }
        assert!(matches!(
            q_sample(&z0, 1001, &noise, &s),
            Err(DiffusionError::StepOutOfRange { step: 1001, .. })
        ));
        assert!(matches!(
            q_sample(&z0, 1, &Latent::zeros(2, 2, 3), &s),
            Err(DiffusionError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn ddpm_step_inverts_at_t1() {
        let s = NoiseSchedule::default();
        let z0 = Latent::from_fn(4, 4, 3, |i| (i as f64 * 0.37).cos());
        let eps = Latent::from_fn(4, 4, 3, |i| (i as f64 * 1.3).sin());
        let z1 = q_sample(&z0, 1, &eps, &s).unwrap();
        let noise = Latent::from_fn(4, 4, 3, |_| 5.0);
        let back = ddpm_step(&z1, &eps, 1, &noise, &s).unwrap();
        assert!(back.max_abs_diff(&z0) < 1e-10);
    }

    #[test]
    fn vanishing_beta_is_identity_step() {
        let s = make_linear_schedule(3, 1e-14, 1e-14).unwrap();
        let z = Latent::from_fn(2, 2, 1, |i| i as f64);
        let zero = Latent::zeros(2, 2, 1);
        let out = ddpm_step(&z, &zero, 2, &zero, &s).unwrap();
        assert!(out.max_abs_diff(&z) < 1e-12);
        assert!(ddpm_step(&z, &zero, 0, &zero, &s).is_err());
    }

    #[test]
    fn start_step_rounds() {
        assert_eq!(start_step(0.5, 1000), 500);
        assert_eq!(start_step(0.3, 1000), 300);
        assert_eq!(start_step(1.0, 7), 7);
        assert_eq!(start_step(0.0004, 1000), 0);
    }

    #[test]
    fn strength_is_validated() {
        assert!(SamplerConfig::new(0.0, 1, NoiseSchedule::default()).is_err());
        assert!(SamplerConfig::new(1.2, 1, NoiseSchedule::default()).is_err());
        assert!(SamplerConfig::new(1.0, 1, NoiseSchedule::default()).is_ok());
    }
}
