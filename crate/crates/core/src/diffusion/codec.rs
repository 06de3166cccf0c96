use super::{DiffusionError, Latent};
use crate::raster::ViewImage;

/// Maps view images to the latent grid the sampler runs on and back.
pub trait LatentCodec: Send + Sync {
    fn encode(&self, image: &ViewImage) -> Latent;

    /// Decodes to a view image, clamping channels to `[0,1]`.
    fn decode(&self, latent: &Latent) -> Result<ViewImage, DiffusionError>;

    /// Pixels per latent cell along each axis.
    fn factor(&self) -> usize;
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn check_rgb(latent: &Latent) -> Result<(), DiffusionError> {
    if latent.channels != 3 || latent.width != latent.height {
        return Err(DiffusionError::ShapeMismatch(format!(
            "expected a square 3-channel latent, got {}x{}x{}",
            latent.width, latent.height, latent.channels
        )));
    }
    Ok(())
}

/// RGB at full resolution, unchanged. `decode(encode(x)) == x` exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IdentityCodec;

impl LatentCodec for IdentityCodec {
    fn encode(&self, image: &ViewImage) -> Latent {
        Latent {
            width: image.resolution,
            height: image.resolution,
            channels: 3,
            values: image.rgb.iter().flatten().copied().collect(),
        }
    }

    fn decode(&self, latent: &Latent) -> Result<ViewImage, DiffusionError> {
        check_rgb(latent)?;
        Ok(ViewImage {
            resolution: latent.width,
            rgb: latent
                .values
                .chunks_exact(3)
                .map(|c| [clamp_unit(c[0]), clamp_unit(c[1]), clamp_unit(c[2])])
                .collect(),
        })
    }

    fn factor(&self) -> usize {
        1
    }
}

/// RGB box-averaged over `factor × factor` blocks; decoding repeats each
/// cell. Lossy unless the image is constant on every block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PooledCodec {
    factor: usize,
}

impl PooledCodec {
    pub fn new(factor: usize) -> Result<Self, DiffusionError> {
        if factor == 0 {
            return Err(DiffusionError::InvalidRange("pooling factor must be positive".into()));
        }
        Ok(Self { factor })
    }
}

impl LatentCodec for PooledCodec {
    /// Image resolution must be a multiple of the factor; trailing pixels
    /// are otherwise dropped.
    fn encode(&self, image: &ViewImage) -> Latent {
        let f = self.factor;
        let res = image.resolution / f;
        let norm = 1.0 / (f * f) as f64;
        let mut values = vec![0.0; res * res * 3];
        for (cell, out) in values.chunks_exact_mut(3).enumerate() {
            let (cx, cy) = (cell % res, cell / res);
            for y in cy * f..(cy + 1) * f {
                for x in cx * f..(cx + 1) * f {
                    let px = image.rgb[y * image.resolution + x];
                    for c in 0..3 {
                        out[c] += px[c];
                    }
                }
            }
            out.iter_mut().for_each(|v| *v *= norm);
        }
        Latent {
            width: res,
            height: res,
            channels: 3,
            values,
        }
    }

    fn decode(&self, latent: &Latent) -> Result<ViewImage, DiffusionError> {
        check_rgb(latent)?;
        let f = self.factor;
        let res = latent.width * f;
        let rgb = (0..res * res)
            .map(|i| {
                let cell = (i / res / f) * latent.width + (i % res) / f;
                let c = &latent.values[cell * 3..cell * 3 + 3];
                [clamp_unit(c[0]), clamp_unit(c[1]), clamp_unit(c[2])]
            })
            .collect();
        Ok(ViewImage { resolution: res, rgb })
    }

    fn factor(&self) -> usize {
        self.factor
    }
}
