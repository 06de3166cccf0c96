//! Software rasterization of a mesh into per-view geometry buffers, and
//! rendering of the current texture into a view.

pub(crate) mod edge;

use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::camera::Camera;
use crate::geometry::Mesh;
use crate::imageio::{self, ImageError};
use crate::texstate::TextureAtlas;

/// How frontally a surface point is seen: `max(0, -n·d)` with `d` the unit
/// direction from the eye to the point. 1 when facing the camera head-on,
/// 0 at grazing angles and for back faces.
pub fn similarity_at(normal: &Vector3<f64>, eye: &Point3<f64>, point: &Point3<f64>) -> f64 {
    let d = (point - eye).normalize();
    (-normal.dot(&d)).max(0.0)
}

/// Normalized depth image, 1.0 on background.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub resolution: usize,
    pub values: Vec<f64>,
}

impl DepthMap {
    pub fn is_foreground(&self, pixel: usize) -> bool {
        self.values[pixel] < 1.0
    }

    pub fn to_u16(&self) -> Vec<u16> {
        self.values.iter().map(|&d| imageio::unit_to_u16(d)).collect()
    }

    pub fn from_u16(resolution: usize, values: &[u16]) -> Self {
        Self {
            resolution,
            values: values.iter().map(|&v| imageio::u16_to_unit(v)).collect(),
        }
    }
}

/// Per-pixel geometry of one view.
#[derive(Debug, Clone, PartialEq)]
pub struct GBuffer {
    resolution: usize,
    depth: Vec<f64>,
    face_id: Vec<Option<u32>>,
    barycentrics: Vec<[f64; 3]>,
    similarity: Vec<f64>,
}

impl GBuffer {
    pub fn empty(resolution: usize) -> Self {
        let n = resolution * resolution;
        Self {
            resolution,
            depth: vec![1.0; n],
            face_id: vec![None; n],
            barycentrics: vec![[0.0; 3]; n],
            similarity: vec![0.0; n],
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn face_id(&self, pixel: usize) -> Option<usize> {
        self.face_id[pixel].map(|f| f as usize)
    }

    pub fn barycentrics(&self, pixel: usize) -> [f64; 3] {
        self.barycentrics[pixel]
    }

    pub fn similarity(&self) -> &[f64] {
        &self.similarity
    }

    pub fn is_covered(&self, pixel: usize) -> bool {
        self.face_id[pixel].is_some()
    }

    pub fn covered_count(&self) -> usize {
        self.face_id.iter().filter(|f| f.is_some()).count()
    }

    pub fn depth_map(&self) -> DepthMap {
        DepthMap {
            resolution: self.resolution,
            values: self.depth.clone(),
        }
    }

    /// Depth as a 16-bit grayscale PNG.
    pub fn depth_png(&self) -> Result<Vec<u8>, ImageError> {
        let r = self.resolution as u32;
        imageio::encode_gray16(r, r, &self.depth_map().to_u16())
    }

    /// Similarity as a 16-bit grayscale PNG.
    pub fn similarity_png(&self) -> Result<Vec<u8>, ImageError> {
        let r = self.resolution as u32;
        let v: Vec<u16> = self.similarity.iter().map(|&s| imageio::unit_to_u16(s)).collect();
        imageio::encode_gray16(r, r, &v)
    }
}

/// Rasterizes `mesh` from `camera`: nearest surface wins, back faces are
/// culled, and covered pixels record depth, face, perspective-correct
/// barycentrics and [`similarity_at`] the interpolated surface point.
pub fn rasterize(mesh: &Mesh, camera: &Camera) -> GBuffer {
    let res = camera.resolution();
    let mut g = GBuffer::empty(res);
    let eye = camera.eye();
    for face in 0..mesh.face_count() {
        let corners = mesh.face_positions(face);
        let normal = mesh.face_normals()[face];
        // n·(p - eye) is constant over a planar face.
        if normal.dot(&(corners[0] - eye)) >= 0.0 {
            continue;
        }
        let projected = corners.map(|p| camera.project(&p));
        if projected
            .iter()
            .any(|p| p.map_or(true, |p| p.view_depth < crate::camera::DEPTH_NEAR))
        {
            log::debug!("face {face} crosses the near plane; skipped");
            continue;
        }
        let projected = projected.map(|p| p.unwrap());
        let screen = projected.map(|p| [p.x, p.y]);
        let inv_w = projected.map(|p| 1.0 / p.view_depth);
        edge::for_each_covered(screen, res, res, |x, y, l| {
            let pc = [l[0] * inv_w[0], l[1] * inv_w[1], l[2] * inv_w[2]];
            let sum = pc[0] + pc[1] + pc[2];
            let bary = pc.map(|c| c / sum);
            let point = mesh.point_at(face, bary);
            let depth = camera.depth_of(&point);
            let i = y * res + x;
            if depth < g.depth[i] {
                g.depth[i] = depth;
                g.face_id[i] = Some(face as u32);
                g.barycentrics[i] = bary;
                g.similarity[i] = similarity_at(&normal, &eye, &point);
            }
        });
    }
    g
}

/// An RGB view image with channels in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewImage {
    pub resolution: usize,
    pub rgb: Vec<[f64; 3]>,
}

impl ViewImage {
    pub fn filled(resolution: usize, color: [f64; 3]) -> Self {
        Self {
            resolution,
            rgb: vec![color; resolution * resolution],
        }
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        self.rgb
            .iter()
            .flat_map(|c| c.map(imageio::unit_to_u8))
            .collect()
    }

    pub fn from_rgb8(resolution: usize, bytes: &[u8]) -> Self {
        Self {
            resolution,
            rgb: bytes
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]].map(imageio::u8_to_unit))
                .collect(),
        }
    }

    /// Rounds every channel to the nearest 8-bit level.
    pub fn quantized(&self) -> Self {
        Self::from_rgb8(self.resolution, &self.to_rgb8())
    }

    pub fn to_png(&self) -> Result<Vec<u8>, ImageError> {
        let r = self.resolution as u32;
        imageio::encode_rgb8(r, r, &self.to_rgb8())
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self, ImageError> {
        let raw = imageio::decode_rgb8(bytes)?;
        let side = raw.square_side()?;
        Ok(Self::from_rgb8(side, &raw.samples))
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        imageio::write_file(path, &self.to_png()?)
    }
}

/// Renders the atlas into the view described by `gbuffer`, sampling the
/// texel under each covered pixel's interpolated UV. Unpainted texels and
/// background pixels take `unpainted_color`.
pub fn render_view(
    mesh: &Mesh,
    atlas: &TextureAtlas,
    gbuffer: &GBuffer,
    unpainted_color: [f64; 3],
) -> ViewImage {
    let mut img = ViewImage::filled(gbuffer.resolution(), unpainted_color);
    for (i, px) in img.rgb.iter_mut().enumerate() {
        if let Some(face) = gbuffer.face_id(i) {
            let uv = mesh.uv_at(face, gbuffer.barycentrics(i));
            if let Some(c) = atlas.sample_nearest(uv) {
                *px = c;
            }
        }
    }
    img
}
