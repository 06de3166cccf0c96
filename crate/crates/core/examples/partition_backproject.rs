//! Paints a cube from three overlapping views with flat colors, showing how
//! the partition shrinks what each later view is allowed to generate.
//!
//! `cargo run --release --example partition_backproject [out_dir]`

use std::path::PathBuf;

use meshpaint::camera::{viewpoint_to_camera, Viewpoint};
use meshpaint::geometry::{bake_texel_geometry, normalize_mesh, shapes};
use meshpaint::raster::{rasterize, ViewImage};
use meshpaint::texstate::{back_project, partition_view, BackProjectParams, TextureAtlas};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "partition_out".into()));
    std::fs::create_dir_all(&out)?;
    let mesh = normalize_mesh(&shapes::unit_cube())?;
    let geo = bake_texel_geometry(&mesh, 256)?;
    let mut atlas = TextureAtlas::new(256);

    let views = [(60.0, 0.0, [0.85, 0.2, 0.2]), (0.0, 0.0, [0.2, 0.7, 0.3]), (30.0, 35.0, [0.2, 0.3, 0.85])];
    for (i, (theta, phi, color)) in views.into_iter().enumerate() {
        let cam = viewpoint_to_camera(&Viewpoint::new(theta, phi, 1.8)?, 128, 50.0)?;
        let g = rasterize(&mesh, &cam);
        let mask = partition_view(&g, &mesh, &atlas);
        mask.save_png(out.join(format!("mask{i}.png")))?;
        let c = mask.counts();
        let bp = back_project(&ViewImage::filled(128, color), &mask, &cam, &g, &mesh, &geo, &mut atlas, &BackProjectParams::default())?;
        println!(
            "view {i} ({theta}, {phi}): new {} update {} keep {} -> wrote {} texels, coverage {:.3}",
            c.new, c.update, c.keep, bp.count(), atlas.coverage(&geo)
        );
    }
    atlas.save_png(out.join("atlas.png"))?;
    Ok(())
}
