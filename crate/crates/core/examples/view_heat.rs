//! Runs the generation stage on an icosphere, then shows the heat of every
//! refinement candidate at each greedy selection.
//!
//! `cargo run --release --example view_heat`

use meshpaint::backend::LocalBackend;
use meshpaint::geometry::{bake_texel_geometry, normalize_mesh, shapes};
use meshpaint::pipeline::{generate_stage, refine_stage_observed, PipelineConfig, RunReport};
use meshpaint::texstate::TextureAtlas;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = PipelineConfig {
        prompt: "a weathered stone".into(),
        seed: Some(1),
        image_resolution: 128,
        texture_resolution: 256,
        steps: 100,
        n_refine_select: 8,
        ..Default::default()
    };
    let mesh = normalize_mesh(&shapes::icosphere(2, 1.0))?;
    let geo = bake_texel_geometry(&mesh, config.texture_resolution)?;
    let mut atlas = TextureAtlas::new(config.texture_resolution);
    let mut report = RunReport::new(&config, 1, "toy-local".into());
    generate_stage(&mesh, &geo, &mut atlas, &config, &LocalBackend, &mut report)?;
    println!("after generation: mean best similarity {:.4}", atlas.mean_best_similarity(&geo));

    refine_stage_observed(&mesh, &geo, &mut atlas, &config, &LocalBackend, &mut report, &mut |s| {
        let mut ranked: Vec<(usize, f64)> = s.pool.iter().copied().zip(s.heats.iter().copied()).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let top: Vec<String> = ranked.iter().take(4).map(|(c, h)| format!("#{c} {h:.4}")).collect();
        println!("step {}: chose #{} from {} candidates; top {}", s.step, s.chosen, s.pool.len(), top.join(", "));
    })?;
    println!("after refinement: mean best similarity {:.4}", atlas.mean_best_similarity(&geo));
    Ok(())
}
