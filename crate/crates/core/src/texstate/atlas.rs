use std::path::Path;

use nalgebra::Point2;

use super::TexStateError;
use crate::geometry::{texel_index, TexelGeometry};
use crate::imageio::{self, u8_to_unit, unit_to_u8};

/// The texture being synthesized.
///
/// Colors are stored at 8 bits per channel so the in-memory texture and the
/// exported PNG are the same bits. Each texel also tracks whether it has been
/// painted and the best similarity it has been painted from.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureAtlas {
    resolution: usize,
    rgb: Vec<[u8; 3]>,
    painted: Vec<bool>,
    best_similarity: Vec<f64>,
}

impl TextureAtlas {
    pub fn new(resolution: usize) -> Self {
        let n = resolution * resolution;
        Self {
            resolution,
            rgb: vec![[0; 3]; n],
            painted: vec![false; n],
            best_similarity: vec![0.0; n],
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.rgb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rgb.is_empty()
    }

    pub fn is_painted(&self, texel: usize) -> bool {
        self.painted[texel]
    }

    pub fn best_similarity(&self, texel: usize) -> f64 {
        self.best_similarity[texel]
    }

    pub fn color(&self, texel: usize) -> [f64; 3] {
        self.rgb[texel].map(u8_to_unit)
    }

    pub fn color_u8(&self, texel: usize) -> [u8; 3] {
        self.rgb[texel]
    }

    /// Marks `texel` painted with `color`, raising its best similarity to
    /// `similarity` if that is higher.
    pub fn paint(&mut self, texel: usize, color: [f64; 3], similarity: f64) {
        self.rgb[texel] = color.map(unit_to_u8);
        self.painted[texel] = true;
        self.best_similarity[texel] = self.best_similarity[texel].max(similarity);
    }

    /// Color of the painted texel under `uv`, if any.
    pub fn sample_nearest(&self, uv: Point2<f64>) -> Option<[f64; 3]> {
        let t = texel_index(uv, self.resolution);
        self.painted[t].then(|| self.color(t))
    }

    pub fn painted_count(&self) -> usize {
        self.painted.iter().filter(|p| **p).count()
    }

    /// Fraction of `geo`'s valid texels that are painted.
    pub fn coverage(&self, geo: &TexelGeometry) -> f64 {
        let valid = geo.valid_count();
        if valid == 0 {
            return 0.0;
        }
        let painted = geo.valid_texels().filter(|&t| self.painted[t]).count();
        painted as f64 / valid as f64
    }

    /// Mean best similarity over `geo`'s valid texels.
    pub fn mean_best_similarity(&self, geo: &TexelGeometry) -> f64 {
        let valid = geo.valid_count();
        if valid == 0 {
            return 0.0;
        }
        geo.valid_texels().map(|t| self.best_similarity[t]).sum::<f64>() / valid as f64
    }

    /// RGBA PNG; alpha is 255 on painted texels and 0 elsewhere.
    pub fn to_png(&self) -> Result<Vec<u8>, TexStateError> {
        let rgba: Vec<u8> = self
            .rgb
            .iter()
            .zip(&self.painted)
            .flat_map(|(c, &p)| [c[0], c[1], c[2], if p { 255 } else { 0 }])
            .collect();
        let r = self.resolution as u32;
        Ok(imageio::encode_rgba8(r, r, &rgba)?)
    }

    /// Inverse of [`to_png`](Self::to_png). Best similarities are not
    /// stored in the file and come back as 0.
    pub fn from_png(bytes: &[u8]) -> Result<Self, TexStateError> {
        let raw = imageio::decode_rgba8(bytes)?;
        let side = raw.square_side()?;
        let mut atlas = Self::new(side);
        for (t, px) in raw.samples.chunks_exact(4).enumerate() {
            atlas.rgb[t] = [px[0], px[1], px[2]];
            atlas.painted[t] = px[3] >= 128;
        }
        Ok(atlas)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), TexStateError> {
        Ok(imageio::write_file(path, &self.to_png()?)?)
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self, TexStateError> {
        Self::from_png(&imageio::read_file(path)?)
    }
}
