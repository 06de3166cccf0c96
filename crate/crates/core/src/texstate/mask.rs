use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{TexStateError, TextureAtlas};
use crate::geometry::{texel_index, Mesh};
use crate::imageio;
use crate::raster::GBuffer;

/// Generation objective of one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    /// Background; never generated, never written back.
    Ignore,
    /// Already painted from an equal or better angle; kept fixed.
    Keep,
    /// Painted, but seen better now; regenerated at partial strength.
    Update,
    /// Not painted yet; generated from pure noise.
    New,
}

/// Palette of the indexed mask PNG, by palette index.
pub const MASK_PALETTE: [[u8; 3]; 4] = [[0, 0, 0], [255, 255, 255], [255, 140, 0], [0, 80, 255]];

impl Label {
    pub const ALL: [Label; 4] = [Label::New, Label::Update, Label::Keep, Label::Ignore];

    /// Index into [`MASK_PALETTE`].
    pub fn palette_index(self) -> u8 {
        match self {
            Label::Ignore => 0,
            Label::New => 1,
            Label::Update => 2,
            Label::Keep => 3,
        }
    }

    pub fn from_palette_index(i: u8) -> Result<Self, TexStateError> {
        Ok(match i {
            0 => Label::Ignore,
            1 => Label::New,
            2 => Label::Update,
            3 => Label::Keep,
            other => return Err(TexStateError::UnknownLabel(other)),
        })
    }

    /// Whether pixels with this label are synthesized and written back.
    pub fn is_generated(self) -> bool {
        matches!(self, Label::New | Label::Update)
    }
}

/// Pixel counts per label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub new: usize,
    pub update: usize,
    pub keep: usize,
    pub ignore: usize,
}

impl LabelCounts {
    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::New => self.new,
            Label::Update => self.update,
            Label::Keep => self.keep,
            Label::Ignore => self.ignore,
        }
    }

    pub fn foreground(&self) -> usize {
        self.new + self.update + self.keep
    }
}

/// Per-pixel labels of one view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationMask {
    pub resolution: usize,
    pub labels: Vec<Label>,
}

impl GenerationMask {
    pub fn uniform(resolution: usize, label: Label) -> Self {
        Self {
            resolution,
            labels: vec![label; resolution * resolution],
        }
    }

    pub fn counts(&self) -> LabelCounts {
        let mut c = LabelCounts::default();
        for l in &self.labels {
            match l {
                Label::New => c.new += 1,
                Label::Update => c.update += 1,
                Label::Keep => c.keep += 1,
                Label::Ignore => c.ignore += 1,
            }
        }
        c
    }

    /// Whether any pixel is synthesized.
    pub fn has_generated(&self) -> bool {
        self.labels.iter().any(|l| l.is_generated())
    }

    /// Indexed-color PNG using [`MASK_PALETTE`].
    pub fn to_png(&self) -> Result<Vec<u8>, TexStateError> {
        let idx: Vec<u8> = self.labels.iter().map(|l| l.palette_index()).collect();
        let r = self.resolution as u32;
        Ok(imageio::encode_indexed8(r, r, &idx, &MASK_PALETTE)?)
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self, TexStateError> {
        let (raw, _) = imageio::decode_indexed8(bytes)?;
        let side = raw.square_side()?;
        let labels = raw
            .samples
            .iter()
            .map(|&i| Label::from_palette_index(i))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            resolution: side,
            labels,
        })
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), TexStateError> {
        Ok(imageio::write_file(path, &self.to_png()?)?)
    }
}

/// Ablation switches for partitioning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionOptions {
    /// Label every covered pixel `New`, as if nothing had been painted.
    pub disable_partition: bool,
    /// Never emit `Update`; painted pixels are always `Keep`.
    pub disable_update: bool,
}

/// Labels each pixel of a view from the atlas state: background is
/// `Ignore`; a covered pixel whose texel is unpainted is `New`; a painted
/// texel seen now with strictly higher similarity than its best is `Update`,
/// otherwise `Keep`.
pub fn partition_view(gbuffer: &GBuffer, mesh: &Mesh, atlas: &TextureAtlas) -> GenerationMask {
    partition_view_with(gbuffer, mesh, atlas, PartitionOptions::default())
}

pub fn partition_view_with(
    gbuffer: &GBuffer,
    mesh: &Mesh,
    atlas: &TextureAtlas,
    options: PartitionOptions,
) -> GenerationMask {
    let labels = (0..gbuffer.len())
        .map(|i| {
            let Some(face) = gbuffer.face_id(i) else {
                return Label::Ignore;
            };
            if options.disable_partition {
                return Label::New;
            }
            let uv = mesh.uv_at(face, gbuffer.barycentrics(i));
            let texel = texel_index(uv, atlas.resolution());
            if !atlas.is_painted(texel) {
                Label::New
            } else if !options.disable_update
                && gbuffer.similarity()[i] > atlas.best_similarity(texel)
            {
                Label::Update
            } else {
                Label::Keep
            }
        })
        .collect();
    GenerationMask {
        resolution: gbuffer.resolution(),
        labels,
    }
}

fn priority(l: Label) -> u8 {
    match l {
        Label::New => 3,
        Label::Update => 2,
        Label::Keep => 1,
        Label::Ignore => 0,
    }
}

/// Shrinks `mask` by `factor`; each output cell takes the highest-priority
/// label of its block (New > Update > Keep > Ignore).
pub fn downsample_mask(mask: &GenerationMask, factor: usize) -> Result<GenerationMask, TexStateError> {
    if factor == 0 || mask.resolution % factor != 0 {
        return Err(TexStateError::IndivisibleFactor {
            factor,
            resolution: mask.resolution,
        });
    }
    let out_res = mask.resolution / factor;
    let mut labels = vec![Label::Ignore; out_res * out_res];
    for y in 0..mask.resolution {
        for x in 0..mask.resolution {
            let l = mask.labels[y * mask.resolution + x];
            let cell = &mut labels[(y / factor) * out_res + x / factor];
            if priority(l) > priority(*cell) {
                *cell = l;
            }
        }
    }
    Ok(GenerationMask {
        resolution: out_res,
        labels,
    })
}
