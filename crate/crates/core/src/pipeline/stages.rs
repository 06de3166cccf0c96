use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use super::{compute_view_heat, PipelineConfig, PipelineError, RunReport, Stage, ViewRecord};
use crate::backend::{check_keep_contract, Backend, BackendError, GenerateRequest, KEEP_TOLERANCE};
use crate::camera::{candidate_refinement_views, preset_generation_views, viewpoint_to_camera, Camera, Viewpoint};
use crate::diffusion::noise::derive_key;
use crate::geometry::{Mesh, TexelGeometry};
use crate::raster::{rasterize, render_view, GBuffer, ViewImage};
use crate::texstate::{
    back_project, partition_view_with, BackProjectParams, GenerationMask, TextureAtlas, UNPAINTED_COLOR,
};

/// Seed of one view, derived from the run seed, the stage and the view's
/// position in it. Views never share noise, and a run with fewer
/// refinement views is a prefix of one with more.
pub fn view_seed(seed: u64, stage: Stage, index: usize) -> u64 {
    derive_key(seed, &[stage.id(), index as u64])
}

/// Everything one view needs besides the atlas.
struct ViewSetup {
    camera: Camera,
    gbuffer: GBuffer,
    mask: GenerationMask,
}

fn setup_view(
    mesh: &Mesh,
    atlas: &TextureAtlas,
    config: &PipelineConfig,
    viewpoint: &Viewpoint,
) -> Result<ViewSetup, PipelineError> {
    let camera = viewpoint_to_camera(viewpoint, config.image_resolution, config.fov_deg)?;
    let gbuffer = rasterize(mesh, &camera);
    let mask = partition_view_with(&gbuffer, mesh, atlas, config.partition_options());
    Ok(ViewSetup { camera, gbuffer, mask })
}

fn dump_view(dir: &Path, stem: &str, setup: &ViewSetup, init: &ViewImage, image: &ViewImage) {
    let write = |kind: &str, bytes: Result<Vec<u8>, String>| {
        let path = dir.join(format!("{stem}_{kind}.png"));
        if let Err(e) = bytes.and_then(|b| std::fs::write(&path, b).map_err(|e| e.to_string())) {
            warn!("debug dump {} failed: {e}", path.display());
        }
    };
    if let Err(e) = std::fs::create_dir_all(dir) {
        warn!("cannot create {}: {e}", dir.display());
        return;
    }
    write("depth", setup.gbuffer.depth_png().map_err(|e| e.to_string()));
    write("similarity", setup.gbuffer.similarity_png().map_err(|e| e.to_string()));
    write("mask", setup.mask.to_png().map_err(|e| e.to_string()));
    write("init", init.to_png().map_err(|e| e.to_string()));
    write("image", image.to_png().map_err(|e| e.to_string()));
}

/// Synthesizes one prepared view and writes it back into the atlas.
#[allow(clippy::too_many_arguments)]
fn run_view(
    mesh: &Mesh,
    texgeo: &TexelGeometry,
    atlas: &mut TextureAtlas,
    config: &PipelineConfig,
    backend: &dyn Backend,
    setup: ViewSetup,
    record: &mut ViewRecord,
    strength: f64,
) -> Result<(), PipelineError> {
    let init = render_view(mesh, atlas, &setup.gbuffer, UNPAINTED_COLOR).quantized();
    let image = if setup.mask.has_generated() {
        let request = GenerateRequest::encode(
            &config.prompt,
            &setup.gbuffer.depth_map(),
            &init,
            &setup.mask,
            strength,
            record.seed,
            config.steps,
        )
        .map_err(|e| view_error(record, e))?;
        let response = backend.generate(&request).map_err(|e| view_error(record, e))?;
        let image = response
            .decode_image(config.image_resolution)
            .map_err(|e| view_error(record, e))?;
        if let Err(BackendError::ContractViolation { pixels, max_deviation }) =
            check_keep_contract(&init, &setup.mask, &image, KEEP_TOLERANCE)
        {
            warn!(
                "{} view {}: {pixels} keep pixels deviate by up to {max_deviation:.4}",
                record.stage.name(),
                record.index
            );
            record.keep_violations = pixels;
        }
        record.backend_called = true;
        image
    } else {
        init.clone()
    };
    if let Some(dir) = &config.debug_dir {
        dump_view(dir, &format!("{}_{:02}", record.stage.name(), record.index), &setup, &init, &image);
    }
    let params = BackProjectParams {
        depth_tolerance: config.depth_tolerance,
        overwrite_all: config.disable_partition,
    };
    let written = back_project(&image, &setup.mask, &setup.camera, &setup.gbuffer, mesh, texgeo, atlas, &params)?;
    record.texels_written = written.count();
    record.painted_texels = atlas.painted_count();
    record.coverage = atlas.coverage(texgeo);
    Ok(())
}

fn view_error(record: &ViewRecord, source: BackendError) -> PipelineError {
    PipelineError::Backend {
        stage: record.stage,
        index: record.index,
        source,
    }
}

fn new_record(stage: Stage, index: usize, viewpoint: Viewpoint, seed: u64) -> ViewRecord {
    ViewRecord {
        stage,
        index,
        candidate: None,
        viewpoint,
        seed: view_seed(seed, stage, index),
        counts: Default::default(),
        heat: 0.0,
        backend_called: false,
        keep_violations: 0,
        texels_written: 0,
        painted_texels: 0,
        coverage: 0.0,
        wall_ms: 0.0,
    }
}

/// Views used by the generation stage: the configured list, or the six
/// axis-aligned presets at the configured distance.
pub fn generation_views(config: &PipelineConfig) -> Vec<Viewpoint> {
    config
        .generation_views
        .clone()
        .unwrap_or_else(|| preset_generation_views(config.camera_distance))
}

/// Progressive generation: each preset view in turn is partitioned against
/// the current atlas, synthesized (`Update` regions at strength `gamma_g`,
/// `New` regions from pure noise) and back-projected. Records are appended
/// to `report` as views complete; on a backend failure the stage stops and
/// the atlas keeps everything written so far.
pub fn generate_stage(
    mesh: &Mesh,
    texgeo: &TexelGeometry,
    atlas: &mut TextureAtlas,
    config: &PipelineConfig,
    backend: &dyn Backend,
    report: &mut RunReport,
) -> Result<(), PipelineError> {
    for (index, viewpoint) in generation_views(config).into_iter().enumerate() {
        let start = Instant::now();
        let mut record = new_record(Stage::Generate, index, viewpoint, report.seed);
        let setup = setup_view(mesh, atlas, config, &viewpoint)?;
        record.counts = setup.mask.counts();
        record.heat = compute_view_heat(&setup.mask, &config.weights);
        let outcome = run_view(mesh, texgeo, atlas, config, backend, setup, &mut record, config.gamma_g);
        record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        info!(
            "generate {index}: theta {} phi {} wrote {} texels, coverage {:.4}",
            viewpoint.theta, viewpoint.phi, record.texels_written, record.coverage
        );
        report.views.push(record);
        outcome?;
    }
    Ok(())
}

/// State seen by a refinement observer just before a view is synthesized.
pub struct SelectionStep<'a> {
    /// Position of this selection within the stage.
    pub step: usize,
    pub atlas: &'a TextureAtlas,
    /// Remaining candidate indices, ascending.
    pub pool: &'a [usize],
    /// Heat of each pool entry.
    pub heats: &'a [f64],
    pub chosen: usize,
}

/// Position of the largest heat; ties go to the earliest entry.
fn argmax(heats: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &h) in heats.iter().enumerate() {
        if best.map_or(true, |b| h > heats[b]) {
            best = Some(i);
        }
    }
    best
}

/// Refinement with automatic view selection: repeatedly scores every
/// remaining hemisphere candidate by view heat, synthesizes the hottest one
/// at strength `gamma_r` and removes it from the pool. Stops after
/// `n_refine_select` views or once the best heat drops below
/// `heat_stop_threshold`.
pub fn refine_stage(
    mesh: &Mesh,
    texgeo: &TexelGeometry,
    atlas: &mut TextureAtlas,
    config: &PipelineConfig,
    backend: &dyn Backend,
    report: &mut RunReport,
) -> Result<(), PipelineError> {
    refine_stage_observed(mesh, texgeo, atlas, config, backend, report, &mut |_| {})
}

/// [`refine_stage`] with a callback invoked at every selection.
#[allow(clippy::too_many_arguments)]
pub fn refine_stage_observed(
    mesh: &Mesh,
    texgeo: &TexelGeometry,
    atlas: &mut TextureAtlas,
    config: &PipelineConfig,
    backend: &dyn Backend,
    report: &mut RunReport,
    observer: &mut dyn FnMut(&SelectionStep),
) -> Result<(), PipelineError> {
    let candidates = candidate_refinement_views(config.camera_distance);
    let mut pool: Vec<usize> = (0..candidates.len()).collect();
    for step in 0..config.n_refine_select {
        if pool.is_empty() {
            report.refine_stop = Some(format!("candidate pool exhausted after {step} views"));
            break;
        }
        let start = Instant::now();
        let frozen: &TextureAtlas = atlas;
        let setups = pool
            .par_iter()
            .map(|&c| setup_view(mesh, frozen, config, &candidates[c]))
            .collect::<Result<Vec<_>, _>>()?;
        let heats: Vec<f64> = setups.iter().map(|s| compute_view_heat(&s.mask, &config.weights)).collect();
        let best = argmax(&heats).expect("pool is not empty");
        if heats[best] < config.heat_stop_threshold {
            report.refine_stop = Some(format!(
                "best heat {:.6} below threshold {} after {step} views",
                heats[best], config.heat_stop_threshold
            ));
            break;
        }
        let chosen = pool[best];
        observer(&SelectionStep {
            step,
            atlas,
            pool: &pool,
            heats: &heats,
            chosen,
        });
        let setup = setups.into_iter().nth(best).expect("index in range");
        pool.remove(best);

        let mut record = new_record(Stage::Refine, step, candidates[chosen], report.seed);
        record.candidate = Some(chosen);
        record.counts = setup.mask.counts();
        record.heat = heats[best];
        let outcome = run_view(mesh, texgeo, atlas, config, backend, setup, &mut record, config.gamma_r);
        record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        info!(
            "refine {step}: candidate {chosen} heat {:.4} wrote {} texels",
            record.heat, record.texels_written
        );
        report.views.push(record);
        outcome?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_earliest_tie() {
        assert_eq!(argmax(&[0.1, 0.5, 0.5, 0.2]), Some(1));
        assert_eq!(argmax(&[0.0, 0.0]), Some(0));
        assert_eq!(argmax(&[]), None);
    }

    #[test]
    fn view_seeds_differ_by_stage_and_index() {
        let a = view_seed(5, Stage::Generate, 0);
        assert_ne!(a, view_seed(5, Stage::Refine, 0));
        assert_ne!(a, view_seed(5, Stage::Generate, 1));
        assert_eq!(a, view_seed(5, Stage::Generate, 0));
    }
}
