//! The generate-then-refine texturing pipeline.
//!
//! Generation walks six axis-aligned views, synthesizing what is new and
//! regenerating what is now seen better. Refinement then greedily picks
//! hemisphere views with the most regenerable area ("view heat") and
//! re-synthesizes them at a mild strength.

mod config;
mod heat;
mod report;
mod stages;

pub use config::{BackendSelector, HeatWeights, PipelineConfig, CANDIDATE_COUNT};
pub use heat::compute_view_heat;
pub use report::{MeshSummary, RunReport, Stage, ViewRecord};
pub use stages::{
    generate_stage, generation_views, refine_stage, refine_stage_observed, view_seed, SelectionStep,
};

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::error;
use thiserror::Error;

use crate::backend::{Backend, BackendError};
use crate::camera::CameraError;
use crate::diffusion::noise::mix64;
use crate::geometry::{bake_texel_geometry, load_mesh, normalize_mesh, GeometryError, Mesh, TexelGeometry};
use crate::texstate::{TexStateError, TextureAtlas};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    TexState(#[from] TexStateError),
    #[error("{} view {index}: {source}", stage.name())]
    Backend {
        stage: Stage,
        index: usize,
        #[source]
        source: BackendError,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A finished run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// The normalized mesh the texture belongs to.
    pub mesh: Mesh,
    pub texgeo: TexelGeometry,
    pub atlas: TextureAtlas,
    pub report: RunReport,
}

/// A failed run. The report is always present; mesh and atlas are present
/// once they were built, and the atlas holds every view completed before
/// the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: PipelineError,
    pub report: RunReport,
    pub mesh: Option<Mesh>,
    pub atlas: Option<TextureAtlas>,
}

/// Draws a seed from the clock for runs that did not fix one.
fn fresh_seed() -> u64 {
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    mix64(nanos ^ std::process::id() as u64)
}

fn finalize(report: &mut RunReport, texgeo: Option<&TexelGeometry>, atlas: Option<&TextureAtlas>, start: Instant) {
    if let (Some(geo), Some(atlas)) = (texgeo, atlas) {
        report.final_coverage = atlas.coverage(geo);
        report.mean_best_similarity = atlas.mean_best_similarity(geo);
    }
    report.total_views = report.views.len();
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
}

/// Loads the mesh at `path` and runs [`run_mesh`] with the configured
/// backend.
pub fn run_full(path: impl AsRef<Path>, config: &PipelineConfig) -> Result<RunOutput, Box<RunFailure>> {
    let backend = config.make_backend();
    match load_mesh(path) {
        Ok(mesh) => run_mesh(mesh, config, backend.as_ref()),
        Err(e) => {
            let mut report = RunReport::new(config, config.seed.unwrap_or(0), backend.id());
            report.errors.push(e.to_string());
            Err(Box::new(RunFailure {
                error: e.into(),
                report,
                mesh: None,
                atlas: None,
            }))
        }
    }
}

/// Normalizes and bakes `mesh`, then runs generation and refinement on a
/// fresh atlas.
pub fn run_mesh(mesh: Mesh, config: &PipelineConfig, backend: &dyn Backend) -> Result<RunOutput, Box<RunFailure>> {
    let start = Instant::now();
    let seed = config.seed.unwrap_or_else(fresh_seed);
    let mut config = config.clone();
    config.seed = Some(seed);
    let mut report = RunReport::new(&config, seed, backend.id());
    let fail = |error: PipelineError, mut report: RunReport, mesh, atlas| {
        error!("{error}");
        report.errors.push(error.to_string());
        Box::new(RunFailure {
            error,
            report,
            mesh,
            atlas,
        })
    };

    if let Err(e) = config.validate() {
        return Err(fail(e, report, None, None));
    }
    let mesh = match normalize_mesh(&mesh) {
        Ok(m) => m,
        Err(e) => return Err(fail(e.into(), report, None, None)),
    };
    let texgeo = match bake_texel_geometry(&mesh, config.texture_resolution) {
        Ok(g) => g,
        Err(e) => return Err(fail(e.into(), report, Some(mesh), None)),
    };
    report.mesh = Some(MeshSummary {
        faces: mesh.face_count(),
        vertices: mesh.vertex_count(),
        valid_texels: texgeo.valid_count(),
        overlapping_texels: texgeo.overlap_count(),
    });

    let mut atlas = TextureAtlas::new(config.texture_resolution);
    let outcome = generate_stage(&mesh, &texgeo, &mut atlas, &config, backend, &mut report)
        .and_then(|()| refine_stage(&mesh, &texgeo, &mut atlas, &config, backend, &mut report));
    finalize(&mut report, Some(&texgeo), Some(&atlas), start);
    match outcome {
        Ok(()) => Ok(RunOutput {
            mesh,
            texgeo,
            atlas,
            report,
        }),
        Err(e) => Err(fail(e, report, Some(mesh), Some(atlas))),
    }
}
