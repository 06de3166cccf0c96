use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::backend::{Backend, LocalBackend, RemoteBackend};
use crate::camera::{Viewpoint, DEFAULT_DISTANCE, DEFAULT_FOV_DEG};
use crate::diffusion::DEFAULT_STEPS;
use crate::texstate::{PartitionOptions, DEFAULT_DEPTH_TOLERANCE};

/// Number of hemisphere candidates the refinement stage chooses from.
pub const CANDIDATE_COUNT: usize = 36;

/// Per-label contribution to view heat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatWeights {
    pub new: f64,
    pub update: f64,
    pub keep: f64,
}

impl Default for HeatWeights {
    fn default() -> Self {
        Self {
            new: 1.0,
            update: 0.8,
            keep: 0.0,
        }
    }
}

/// Where views are synthesized: in-process, or at an HTTP endpoint.
/// Serialized as `"local"` or the endpoint URL.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BackendSelector {
    #[default]
    Local,
    Remote(String),
}

impl TryFrom<String> for BackendSelector {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<BackendSelector> for String {
    fn from(b: BackendSelector) -> String {
        b.to_string()
    }
}

impl std::str::FromStr for BackendSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "local" {
            Ok(Self::Local)
        } else if s.starts_with("http://") || s.starts_with("https://") {
            Ok(Self::Remote(s.to_string()))
        } else {
            Err(format!("backend must be `local` or an http(s) URL, got `{s}`"))
        }
    }
}

impl fmt::Display for BackendSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Local => f.write_str("local"),
            Self::Remote(url) => f.write_str(url),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub prompt: String,
    /// Denoising strength of `Update` regions during generation.
    pub gamma_g: f64,
    /// Denoising strength of `Update` regions during refinement.
    pub gamma_r: f64,
    pub image_resolution: usize,
    pub texture_resolution: usize,
    /// Maximum refinement views, at most [`CANDIDATE_COUNT`].
    pub n_refine_select: usize,
    pub weights: HeatWeights,
    /// Refinement stops once the best remaining heat falls below this.
    pub heat_stop_threshold: f64,
    /// Unset means "draw one"; the drawn seed is recorded in the report.
    pub seed: Option<u64>,
    pub steps: usize,
    pub camera_distance: f64,
    pub fov_deg: f64,
    pub depth_tolerance: f64,
    pub disable_partition: bool,
    pub disable_update: bool,
    /// Overrides the six axis-aligned generation views.
    pub generation_views: Option<Vec<Viewpoint>>,
    pub backend: BackendSelector,
    pub backend_timeout_secs: u64,
    /// Directory for per-view PNG dumps.
    pub debug_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            prompt: String::new(),
            gamma_g: 0.5,
            gamma_r: 0.3,
            image_resolution: 512,
            texture_resolution: 1024,
            n_refine_select: 20,
            weights: HeatWeights::default(),
            heat_stop_threshold: 0.01,
            seed: None,
            steps: DEFAULT_STEPS,
            camera_distance: DEFAULT_DISTANCE,
            fov_deg: DEFAULT_FOV_DEG,
            depth_tolerance: DEFAULT_DEPTH_TOLERANCE,
            disable_partition: false,
            disable_update: false,
            generation_views: None,
            backend: BackendSelector::Local,
            backend_timeout_secs: 600,
            debug_dir: None,
        }
    }
}

fn strength_ok(g: f64) -> bool {
    g > 0.0 && g <= 1.0
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::Config(msg));
        if !strength_ok(self.gamma_g) || !strength_ok(self.gamma_r) {
            return fail(format!(
                "gamma_g and gamma_r must lie in (0, 1], got {} and {}",
                self.gamma_g, self.gamma_r
            ));
        }
        if self.n_refine_select > CANDIDATE_COUNT {
            return fail(format!(
                "n_refine_select must be at most {CANDIDATE_COUNT}, got {}",
                self.n_refine_select
            ));
        }
        let w = self.weights;
        if !(w.update > w.keep) {
            return fail(format!("heat weight of update ({}) must exceed keep ({})", w.update, w.keep));
        }
        if [w.new, w.update, w.keep].iter().any(|v| !v.is_finite() || *v < 0.0) {
            return fail("heat weights must be finite and non-negative".into());
        }
        if self.image_resolution == 0 || self.texture_resolution == 0 {
            return fail("resolutions must be positive".into());
        }
        if self.steps == 0 {
            return fail("steps must be at least 1".into());
        }
        if !(self.heat_stop_threshold >= 0.0) {
            return fail("heat_stop_threshold must be non-negative".into());
        }
        if !(self.depth_tolerance > 0.0) {
            return fail("depth_tolerance must be positive".into());
        }
        Ok(())
    }

    pub fn partition_options(&self) -> PartitionOptions {
        PartitionOptions {
            disable_partition: self.disable_partition,
            disable_update: self.disable_update,
        }
    }

    /// Instantiates the selected backend.
    pub fn make_backend(&self) -> Box<dyn Backend> {
        match &self.backend {
            BackendSelector::Local => Box::new(LocalBackend),
            BackendSelector::Remote(url) => Box::new(RemoteBackend::new(
                url.clone(),
                Duration::from_secs(self.backend_timeout_secs),
            )),
        }
    }
}
