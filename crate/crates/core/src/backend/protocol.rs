use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::BackendError;
use crate::imageio;
use crate::raster::{DepthMap, ViewImage};
use crate::texstate::GenerationMask;

pub const PROTOCOL_VERSION: u32 = 1;

/// Largest per-channel deviation a backend may introduce on pixels it was
/// asked to keep. Lossy latent codecs need this slack.
pub const KEEP_TOLERANCE: f64 = 16.0 / 255.0;

/// Body of `POST /v1/generate`. Images are base64-encoded PNGs: depth as
/// 16-bit grayscale, the init image as 8-bit RGB, the mask as 8-bit indexed
/// color with the label palette.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateRequest {
    pub version: u32,
    pub prompt: String,
    pub depth: String,
    pub init_image: String,
    pub mask: String,
    pub strength_update: f64,
    pub seed: u64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateResponse {
    pub version: u32,
    pub image: String,
    pub backend_id: String,
    pub elapsed_ms: u64,
}

/// A request with its images decoded and validated.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedRequest {
    pub prompt: String,
    pub depth: DepthMap,
    pub init_image: ViewImage,
    pub mask: GenerationMask,
    pub strength_update: f64,
    pub seed: u64,
    pub steps: usize,
}

impl DecodedRequest {
    pub fn resolution(&self) -> usize {
        self.init_image.resolution
    }
}

fn b64_decode(field: &str, data: &str) -> Result<Vec<u8>, BackendError> {
    STANDARD
        .decode(data)
        .map_err(|e| BackendError::Protocol(format!("{field}: bad base64: {e}")))
}

fn check_version(found: u32) -> Result<(), BackendError> {
    if found != PROTOCOL_VERSION {
        return Err(BackendError::UnsupportedVersion {
            found,
            expected: PROTOCOL_VERSION,
        });
    }
    Ok(())
}

fn check_strength(strength: f64) -> Result<(), BackendError> {
    if !(strength > 0.0 && strength <= 1.0) {
        return Err(BackendError::InvalidRequest(format!(
            "strength_update must lie in (0, 1], got {strength}"
        )));
    }
    Ok(())
}

impl GenerateRequest {
    /// Encodes a view into a request. The init image is sent as 8-bit RGB,
    /// so callers that compare against it should quantize first.
    pub fn encode(
        prompt: &str,
        depth: &DepthMap,
        init_image: &ViewImage,
        mask: &GenerationMask,
        strength_update: f64,
        seed: u64,
        steps: usize,
    ) -> Result<Self, BackendError> {
        check_strength(strength_update)?;
        let res = init_image.resolution;
        if depth.resolution != res || mask.resolution != res {
            return Err(BackendError::InvalidRequest(format!(
                "image resolutions differ: depth {}, init {res}, mask {}",
                depth.resolution, mask.resolution
            )));
        }
        let r = res as u32;
        Ok(Self {
            version: PROTOCOL_VERSION,
            prompt: prompt.to_string(),
            depth: STANDARD.encode(imageio::encode_gray16(r, r, &depth.to_u16())?),
            init_image: STANDARD.encode(init_image.to_png()?),
            mask: STANDARD.encode(mask.to_png()?),
            strength_update,
            seed,
            steps,
        })
    }

    pub fn decode(&self) -> Result<DecodedRequest, BackendError> {
        check_version(self.version)?;
        check_strength(self.strength_update)?;
        if self.steps == 0 {
            return Err(BackendError::InvalidRequest("steps must be at least 1".into()));
        }
        let raw_depth = imageio::decode_gray16(&b64_decode("depth", &self.depth)?)?;
        let depth_res = raw_depth.square_side()?;
        let depth = DepthMap::from_u16(depth_res, &raw_depth.samples);
        let init_image = ViewImage::from_png(&b64_decode("init_image", &self.init_image)?)?;
        let mask = GenerationMask::from_png(&b64_decode("mask", &self.mask)?)?;
        let res = init_image.resolution;
        if depth_res != res || mask.resolution != res {
            return Err(BackendError::InvalidRequest(format!(
                "image resolutions differ: depth {depth_res}, init {res}, mask {}",
                mask.resolution
            )));
        }
        Ok(DecodedRequest {
            prompt: self.prompt.clone(),
            depth,
            init_image,
            mask,
            strength_update: self.strength_update,
            seed: self.seed,
            steps: self.steps,
        })
    }
}

impl GenerateResponse {
    pub fn encode(image: &ViewImage, backend_id: &str, elapsed_ms: u64) -> Result<Self, BackendError> {
        Ok(Self {
            version: PROTOCOL_VERSION,
            image: STANDARD.encode(image.to_png()?),
            backend_id: backend_id.to_string(),
            elapsed_ms,
        })
    }

    /// Decodes the image, checking the version and that it has the
    /// requested resolution.
    pub fn decode_image(&self, expected_resolution: usize) -> Result<ViewImage, BackendError> {
        check_version(self.version)?;
        let img = ViewImage::from_png(&b64_decode("image", &self.image)?)?;
        if img.resolution != expected_resolution {
            return Err(BackendError::Protocol(format!(
                "response image is {0}x{0}, requested {1}x{1}",
                img.resolution, expected_resolution
            )));
        }
        Ok(img)
    }
}

/// Checks that `image` matches `init` within `tolerance` per channel on
/// every pixel the mask does not generate.
pub fn check_keep_contract(
    init: &ViewImage,
    mask: &GenerationMask,
    image: &ViewImage,
    tolerance: f64,
) -> Result<(), BackendError> {
    let mut pixels = 0;
    let mut max_deviation: f64 = 0.0;
    for ((a, b), label) in init.rgb.iter().zip(&image.rgb).zip(&mask.labels) {
        if label.is_generated() {
            continue;
        }
        let dev = (0..3).map(|c| (a[c] - b[c]).abs()).fold(0.0, f64::max);
        if dev > tolerance {
            pixels += 1;
            max_deviation = max_deviation.max(dev);
        }
    }
    if pixels > 0 {
        return Err(BackendError::ContractViolation {
            pixels,
            max_deviation,
        });
    }
    Ok(())
}
