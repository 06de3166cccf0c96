//! Textures a mesh end to end with the in-process toy backend and exports
//! an OBJ, MTL and texture. Without a mesh argument a built-in icosphere is
//! used.
//!
//! `cargo run --release --example texture_mesh [mesh.obj] [out_dir]`

use std::path::PathBuf;

use meshpaint::backend::LocalBackend;
use meshpaint::geometry::obj::{write_mtl, write_obj};
use meshpaint::geometry::{load_mesh, shapes};
use meshpaint::pipeline::{run_mesh, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mesh = match args.next() {
        Some(path) => load_mesh(path)?,
        None => shapes::icosphere(3, 1.0),
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "texture_mesh_out".into()));
    std::fs::create_dir_all(&out)?;

    let config = PipelineConfig {
        prompt: "a glazed ceramic orange".into(),
        seed: Some(7),
        image_resolution: 128,
        texture_resolution: 256,
        ..Default::default()
    };
    let run = run_mesh(mesh, &config, &LocalBackend).map_err(|f| f.error)?;
    run.atlas.save_png(out.join("texture.png"))?;
    write_obj(&run.mesh, out.join("model.obj"), Some(("model.mtl", "painted")))?;
    write_mtl(out.join("model.mtl"), "painted", "texture.png")?;
    run.report.write_json(out.join("report.json"))?;
    println!(
        "{} views, coverage {:.4}, mean best similarity {:.4}, {:.1}s",
        run.report.total_views,
        run.report.final_coverage,
        run.report.mean_best_similarity,
        run.report.wall_ms / 1e3
    );
    Ok(())
}
