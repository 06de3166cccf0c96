use std::time::Instant;

use super::{Backend, BackendError, DecodedRequest, GenerateRequest, GenerateResponse};
use crate::diffusion::{
    make_linear_schedule, masked_sample, Conditioning, IdentityCodec, LatentCodec, SamplerConfig,
    ToyPredictor, DEFAULT_BETA_END, DEFAULT_BETA_START,
};
use crate::raster::ViewImage;

pub const LOCAL_BACKEND_ID: &str = "toy-local";

/// Runs the toy predictor through the masked sampler with the identity
/// codec, on the default linear schedule stretched to `steps`.
fn synthesize(req: &DecodedRequest) -> Result<ViewImage, BackendError> {
    // Nothing to generate: the sampler would return the init image exactly.
    if !req.mask.has_generated() {
        return Ok(req.init_image.clone());
    }
    let schedule = make_linear_schedule(req.steps, DEFAULT_BETA_START, DEFAULT_BETA_END)?;
    let config = SamplerConfig::new(req.strength_update, req.seed, schedule.clone())?;
    let cond = Conditioning {
        prompt: req.prompt.clone(),
        depth: req.depth.clone(),
        init_view: req.init_image.clone(),
    };
    let init = IdentityCodec.encode(&req.init_image);
    let z0 = masked_sample(&init, &req.mask, &config, &ToyPredictor::new(schedule), &cond)?;
    Ok(IdentityCodec.decode(&z0)?)
}

/// Serves a request in-process with the toy backend.
pub fn local_generate(request: &GenerateRequest) -> Result<GenerateResponse, BackendError> {
    let start = Instant::now();
    let decoded = request.decode()?;
    let image = synthesize(&decoded)?;
    GenerateResponse::encode(&image, LOCAL_BACKEND_ID, start.elapsed().as_millis() as u64)
}

/// The in-process toy backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct LocalBackend;

impl Backend for LocalBackend {
    fn id(&self) -> String {
        LOCAL_BACKEND_ID.to_string()
    }

    fn generate(&self, request: &GenerateRequest) -> Result<GenerateResponse, BackendError> {
        local_generate(request)
    }
}
