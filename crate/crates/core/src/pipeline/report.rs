use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError};
use crate::camera::Viewpoint;
use crate::texstate::LabelCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Generate,
    Refine,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Refine => "refine",
        }
    }

    pub(crate) fn id(self) -> u64 {
        match self {
            Stage::Generate => 0,
            Stage::Refine => 1,
        }
    }
}

/// What happened at one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewRecord {
    pub stage: Stage,
    /// Position of the view within its stage.
    pub index: usize,
    /// Index into the refinement candidates, for refinement views.
    pub candidate: Option<usize>,
    pub viewpoint: Viewpoint,
    pub seed: u64,
    pub counts: LabelCounts,
    pub heat: f64,
    /// False when the mask had nothing to generate.
    pub backend_called: bool,
    /// Keep pixels on which the backend deviated beyond tolerance.
    pub keep_violations: usize,
    pub texels_written: usize,
    pub painted_texels: usize,
    /// Painted share of valid texels after this view.
    pub coverage: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub faces: usize,
    pub vertices: usize,
    pub valid_texels: usize,
    pub overlapping_texels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub backend_id: String,
    pub config: PipelineConfig,
    pub mesh: Option<MeshSummary>,
    pub views: Vec<ViewRecord>,
    /// Why refinement ended before using its full budget, if it did.
    pub refine_stop: Option<String>,
    pub final_coverage: f64,
    pub mean_best_similarity: f64,
    pub total_views: usize,
    pub errors: Vec<String>,
    pub wall_ms: f64,
}

impl RunReport {
    pub fn new(config: &PipelineConfig, seed: u64, backend_id: String) -> Self {
        Self {
            seed,
            backend_id,
            config: config.clone(),
            mesh: None,
            views: Vec::new(),
            refine_stop: None,
            final_coverage: 0.0,
            mean_best_similarity: 0.0,
            total_views: 0,
            errors: Vec::new(),
            wall_ms: 0.0,
        }
    }

    pub fn stage_views(&self, stage: Stage) -> impl Iterator<Item = &ViewRecord> {
        self.views.iter().filter(move |v| v.stage == stage)
    }

    pub fn total_texels_written(&self) -> usize {
        self.views.iter().map(|v| v.texels_written).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
