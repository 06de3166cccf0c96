//! Texture atlas state, per-view generation masks, and back-projection of
//! synthesized views into the atlas.

mod atlas;
mod backproject;
mod mask;

pub use atlas::TextureAtlas;
pub use backproject::{back_project, BackProjectParams, BackProjection, DEFAULT_DEPTH_TOLERANCE};
pub use mask::{
    downsample_mask, partition_view, partition_view_with, GenerationMask, Label, LabelCounts,
    PartitionOptions,
};

use thiserror::Error;

/// Neutral color for texels that have not been painted yet.
pub const UNPAINTED_COLOR: [f64; 3] = [0.5, 0.5, 0.5];

#[derive(Debug, Error)]
pub enum TexStateError {
    #[error("resolution mismatch: {what} is {found}, expected {expected}")]
    ResolutionMismatch {
        what: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("factor {factor} does not divide mask resolution {resolution}")]
    IndivisibleFactor { factor: usize, resolution: usize },
    #[error("mask png uses palette index {0}, only 0..4 are labels")]
    UnknownLabel(u8),
    #[error(transparent)]
    Image(#[from] crate::imageio::ImageError),
}

pub(crate) fn check_resolution(
    what: &'static str,
    found: usize,
    expected: usize,
) -> Result<(), TexStateError> {
    if found != expected {
        return Err(TexStateError::ResolutionMismatch {
            what,
            found,
            expected,
        });
    }
    Ok(())
}
