//! A deterministic, closed-form noise predictor.
//!
//! Given `z_t` it returns exactly the noise that would have produced `z_t`
//! from a fixed target image, so the reverse chain lands on that target.
//! The target is a prompt-derived color shaded by depth on the object and
//! the conditioning view on the background.

use super::{Conditioning, DiffusionError, IdentityCodec, Latent, LatentCodec, NoisePredictor, NoiseSchedule};
use crate::raster::ViewImage;

const NAMED_COLORS: &[(&str, [f64; 3])] = &[
    ("red", [0.80, 0.15, 0.12]),
    ("green", [0.20, 0.62, 0.22]),
    ("blue", [0.16, 0.30, 0.78]),
    ("yellow", [0.85, 0.78, 0.20]),
    ("orange", [0.88, 0.50, 0.14]),
    ("purple", [0.50, 0.24, 0.64]),
    ("pink", [0.90, 0.55, 0.68]),
    ("brown", [0.48, 0.32, 0.18]),
    ("cyan", [0.20, 0.72, 0.76]),
    ("white", [0.80, 0.80, 0.80]),
    ("black", [0.12, 0.12, 0.12]),
    ("gray", [0.50, 0.50, 0.50]),
    ("grey", [0.50, 0.50, 0.50]),
];

/// Base color for a prompt: the first recognized color word, otherwise a
/// stable hash of the whole prompt mapped into `[0.2, 0.8]³`.
pub fn prompt_color(prompt: &str) -> [f64; 3] {
    let lower = prompt.to_lowercase();
    for word in lower.split(|c: char| !c.is_alphanumeric()) {
        if let Some((_, c)) = NAMED_COLORS.iter().find(|(name, _)| *name == word) {
            return *c;
        }
    }
    // FNV-1a
    let h = lower.trim().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    });
    [0, 1, 2].map(|k| 0.2 + 0.6 * ((h >> (8 * k)) & 0xff) as f64 / 255.0)
}

/// The image the toy predictor steers toward.
pub fn toy_target(cond: &Conditioning) -> Result<ViewImage, DiffusionError> {
    if cond.depth.resolution != cond.init_view.resolution
        || cond.depth.values.len() != cond.init_view.rgb.len()
    {
        return Err(DiffusionError::ShapeMismatch(format!(
            "depth is {0}x{0}, init view is {1}x{1}",
            cond.depth.resolution, cond.init_view.resolution
        )));
    }
    let base = prompt_color(&cond.prompt);
    let rgb = cond
        .depth
        .values
        .iter()
        .zip(&cond.init_view.rgb)
        .map(|(&d, &init)| {
            if d < 1.0 {
                let shade = 1.25 - 0.5 * d;
                base.map(|c| (c * shade).clamp(0.0, 1.0))
            } else {
                init
            }
        })
        .collect();
    Ok(ViewImage {
        resolution: cond.init_view.resolution,
        rgb,
    })
}

/// Closed-form predictor `ε̂ = (z_t - sqrt(ab_t)·E(target)) / sqrt(1 - ab_t)`.
#[derive(Debug, Clone)]
pub struct ToyPredictor<C = IdentityCodec> {
    schedule: NoiseSchedule,
    codec: C,
}

impl ToyPredictor<IdentityCodec> {
    pub fn new(schedule: NoiseSchedule) -> Self {
        Self::with_codec(schedule, IdentityCodec)
    }
}

impl<C: LatentCodec> ToyPredictor<C> {
    pub fn with_codec(schedule: NoiseSchedule, codec: C) -> Self {
        Self { schedule, codec }
    }

    pub fn schedule(&self) -> &NoiseSchedule {
        &self.schedule
    }

    /// The encoded target for `cond`.
    pub fn target_latent(&self, cond: &Conditioning) -> Result<Latent, DiffusionError> {
        Ok(self.codec.encode(&toy_target(cond)?))
    }
}

impl<C: LatentCodec> NoisePredictor for ToyPredictor<C> {
    fn predict(&self, z_t: &Latent, t: usize, cond: &Conditioning) -> Result<Latent, DiffusionError> {
        if t == 0 || t > self.schedule.steps() {
            return Err(DiffusionError::StepOutOfRange {
                step: t,
                steps: self.schedule.steps(),
            });
        }
        let target = self.target_latent(cond)?;
        z_t.check_same_shape(&target, "toy target")?;
        let ab = self.schedule.alphabar(t);
        let (signal, inv_noise) = (ab.sqrt(), 1.0 / (1.0 - ab).sqrt());
        Ok(Latent {
            values: z_t
                .values
                .iter()
                .zip(&target.values)
                .map(|(&z, &x)| (z - signal * x) * inv_noise)
                .collect(),
            ..*z_t
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::q_sample;
    use crate::raster::DepthMap;

    fn cond(prompt: &str, res: usize, depth: f64) -> Conditioning {
        Conditioning {
            prompt: prompt.into(),
            depth: DepthMap {
                resolution: res,
                values: vec![depth; res * res],
            },
            init_view: ViewImage::filled(res, [0.5; 3]),
        }
    }

    #[test]
    fn color_words_win_over_hash() {
        assert_eq!(prompt_color("a Red brick wall"), [0.80, 0.15, 0.12]);
        let c = prompt_color("weathered bronze statue");
        assert_eq!(c, prompt_color("weathered bronze statue"));
        assert!(c.iter().all(|v| (0.2..=0.8).contains(v)));
    }

    #[test]
    fn flat_depth_gives_uniform_scaled_color() {
        let t = toy_target(&cond("red", 4, 0.5)).unwrap();
        let expect = [0.80, 0.15, 0.12].map(|c: f64| c * 1.0);
        assert!(t.rgb.iter().all(|p| *p == expect));
        let bg = toy_target(&cond("red", 4, 1.0)).unwrap();
        assert!(bg.rgb.iter().all(|p| *p == [0.5; 3]));
    }

    #[test]
    fn prediction_recovers_the_injected_noise() {
        let s = NoiseSchedule::default();
        let p = ToyPredictor::new(s.clone());
        let c = cond("blue", 3, 0.2);
        let x0 = p.target_latent(&c).unwrap();
        let eps = Latent::from_fn(3, 3, 3, |i| (i as f64 * 0.9).sin());
        let zt = q_sample(&x0, 321, &eps, &s).unwrap();
        let got = p.predict(&zt, 321, &c).unwrap();
        assert!(got.max_abs_diff(&eps) < 1e-9);
        assert_eq!(got, p.predict(&zt, 321, &c).unwrap());
        assert!(p.predict(&zt, 0, &c).is_err());
    }
}
