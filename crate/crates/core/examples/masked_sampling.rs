//! Runs the masked sampler on a synthetic view: the left third is kept,
//! the middle third is regenerated at strength 0.5 and the right third is
//! generated from scratch.
//!
//! `cargo run --release --example masked_sampling [out_dir]`

use std::path::PathBuf;

use meshpaint::diffusion::{
    masked_sample, toy_target, Conditioning, IdentityCodec, LatentCodec, NoiseSchedule, SamplerConfig, ToyPredictor,
};
use meshpaint::raster::{DepthMap, ViewImage};
use meshpaint::texstate::{GenerationMask, Label};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "masked_sampling_out".into()));
    std::fs::create_dir_all(&out)?;
    let res = 96;

    let checker = |i: usize| ((i % res) / 12 + (i / res) / 12) % 2 == 0;
    let init_view = ViewImage {
        resolution: res,
        rgb: (0..res * res).map(|i| if checker(i) { [0.9, 0.9, 0.85] } else { [0.2, 0.25, 0.3] }).collect(),
    };
    let depth = DepthMap {
        resolution: res,
        values: (0..res * res).map(|i| 0.3 + 0.4 * (i / res) as f64 / res as f64).collect(),
    };
    let labels = (0..res * res)
        .map(|i| match 3 * (i % res) / res {
            0 => Label::Keep,
            1 => Label::Update,
            _ => Label::New,
        })
        .collect();
    let mask = GenerationMask { resolution: res, labels };
    let cond = Conditioning { prompt: "a sunflower yellow tile".into(), depth, init_view };

    let schedule = NoiseSchedule::default();
    let config = SamplerConfig::new(0.5, 7, schedule.clone())?;
    let z = masked_sample(&IdentityCodec.encode(&cond.init_view), &mask, &config, &ToyPredictor::new(schedule), &cond)?;
    let image = IdentityCodec.decode(&z)?;

    cond.init_view.save_png(out.join("init.png"))?;
    toy_target(&cond)?.save_png(out.join("target.png"))?;
    mask.save_png(out.join("mask.png"))?;
    image.save_png(out.join("result.png"))?;
    println!("wrote init, target, mask and result to {}", out.display());
    Ok(())
}
