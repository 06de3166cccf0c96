//! Starts the toy HTTP backend on an ephemeral port, sends one view through
//! it and checks that the answer matches the in-process backend.

use std::time::Duration;

use meshpaint::backend::{local_generate, Backend, GenerateRequest, RemoteBackend, ToyServer};
use meshpaint::raster::{DepthMap, ViewImage};
use meshpaint::texstate::{GenerationMask, Label};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = ToyServer::start("127.0.0.1:0")?;
    println!("toy backend at {}", server.url());

    let res = 32;
    let depth = DepthMap { resolution: res, values: vec![0.5; res * res] };
    let init = ViewImage::filled(res, [0.5, 0.5, 0.5]);
    let mut mask = GenerationMask::uniform(res, Label::Keep);
    for l in mask.labels.iter_mut().step_by(3) {
        *l = Label::New;
    }
    let request = GenerateRequest::encode("crimson", &depth, &init, &mask, 0.5, 99, 200)?;

    let remote = RemoteBackend::new(server.url(), Duration::from_secs(30));
    let answer = remote.generate(&request)?;
    let local = local_generate(&request)?;
    println!(
        "remote backend '{}' answered in {} ms; identical to in-process: {}",
        answer.backend_id,
        answer.elapsed_ms,
        answer.image == local.image
    );
    Ok(())
}
