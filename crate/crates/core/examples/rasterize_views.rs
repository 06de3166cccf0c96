//! Rasterizes an icosphere from the six generation views and writes the
//! depth and view-similarity buffers of each.
//!
//! `cargo run --release --example rasterize_views [out_dir]`

use std::path::PathBuf;

use meshpaint::camera::{preset_generation_views, viewpoint_to_camera};
use meshpaint::geometry::{normalize_mesh, shapes};
use meshpaint::raster::rasterize;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "rasterize_out".into()));
    std::fs::create_dir_all(&out)?;
    let mesh = normalize_mesh(&shapes::icosphere(3, 1.0))?;
    for (i, v) in preset_generation_views(1.8).iter().enumerate() {
        let g = rasterize(&mesh, &viewpoint_to_camera(v, 256, 50.0)?);
        std::fs::write(out.join(format!("view{i}_depth.png")), g.depth_png()?)?;
        std::fs::write(out.join(format!("view{i}_similarity.png")), g.similarity_png()?)?;
        let mean = g.similarity().iter().sum::<f64>() / g.covered_count().max(1) as f64;
        println!("view {i} ({:>5.1}, {:>5.1}): {} covered pixels, mean similarity {mean:.3}", v.theta, v.phi, g.covered_count());
    }
    Ok(())
}
