use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::{check_resolution, GenerationMask, TexStateError, TextureAtlas};
use crate::camera::Camera;
use crate::geometry::{texel_index, Mesh, TexelGeometry};
use crate::raster::{similarity_at, GBuffer, ViewImage};

/// Occlusion tolerance in normalized depth units.
pub const DEFAULT_DEPTH_TOLERANCE: f64 = 0.01;

/// Pixels searched around a texel that projects onto background, so that
/// texels on a silhouette still find the surface pixel they belong to.
const SILHOUETTE_SEARCH_RADIUS: i64 = 2;

/// Pixels around a texel's projection whose faces are ray-tested as
/// potential occluders.
const OCCLUDER_SEARCH_RADIUS: i64 = 2;

/// Whether the segment from `eye` to `target` crosses triangle `tri`
/// before reaching `target` (Moller-Trumbore).
fn segment_hits(eye: &Point3<f64>, target: &Point3<f64>, tri: [Point3<f64>; 3]) -> bool {
    let to = target - eye;
    let dist = to.norm();
    let dir = to / dist;
    let (e1, e2) = (tri[1] - tri[0], tri[2] - tri[0]);
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return false;
    }
    let s = eye - tri[0];
    let u = s.dot(&p) / det;
    let q = s.cross(&e1);
    let v = dir.dot(&q) / det;
    let t = e2.dot(&q) / det;
    u >= 0.0 && v >= 0.0 && u + v <= 1.0 && t > 0.0 && t < dist * (1.0 - 1e-9) - 1e-9
}

/// Faces incident to each vertex, in CSR form.
struct VertexFaces {
    offsets: Vec<usize>,
    faces: Vec<usize>,
}

impl VertexFaces {
    fn new(mesh: &Mesh) -> Self {
        let mut offsets = vec![0; mesh.vertex_count() + 1];
        for f in mesh.faces() {
            for &v in f {
                offsets[v as usize + 1] += 1;
            }
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let mut fill = offsets.clone();
        let mut faces = vec![0; offsets[mesh.vertex_count()]];
        for (fi, f) in mesh.faces().iter().enumerate() {
            for &v in f {
                faces[fill[v as usize]] = fi;
                fill[v as usize] += 1;
            }
        }
        Self { offsets, faces }
    }

    fn around(&self, v: u32) -> &[usize] {
        &self.faces[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }
}

/// Depth tests at pixel centers miss occluders whose silhouette passes
/// between the texel's projection and the pixel center. Such an occluder
/// is either rasterized around the projection or, when seen edge-on, shares
/// a vertex with a face that is, so those are the faces ray-tested.
#[allow(clippy::too_many_arguments)]
fn occluded_nearby(
    mesh: &Mesh,
    adjacency: &VertexFaces,
    gbuffer: &GBuffer,
    eye: &Point3<f64>,
    pos: &Point3<f64>,
    own_face: Option<usize>,
    px: i64,
    py: i64,
) -> bool {
    let res = gbuffer.resolution() as i64;
    let mut seen: Vec<usize> = Vec::with_capacity(4);
    for ny in (py - OCCLUDER_SEARCH_RADIUS).max(0)..=(py + OCCLUDER_SEARCH_RADIUS).min(res - 1) {
        for nx in (px - OCCLUDER_SEARCH_RADIUS).max(0)..=(px + OCCLUDER_SEARCH_RADIUS).min(res - 1) {
            if let Some(f) = gbuffer.face_id((ny * res + nx) as usize) {
                if !seen.contains(&f) {
                    seen.push(f);
                }
            }
        }
    }
    let mut tested: Vec<usize> = Vec::with_capacity(16);
    for &f in &seen {
        for &v in &mesh.faces()[f] {
            for &g in adjacency.around(v) {
                if Some(g) == own_face || tested.contains(&g) {
                    continue;
                }
                if segment_hits(eye, pos, mesh.face_positions(g)) {
                    return true;
                }
                tested.push(g);
            }
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackProjectParams {
    pub depth_tolerance: f64,
    /// Write every visible texel under a generated pixel, ignoring whether
    /// this view improves on the texel's best similarity (the
    /// no-partitioning ablation).
    pub overwrite_all: bool,
}

impl Default for BackProjectParams {
    fn default() -> Self {
        Self {
            depth_tolerance: DEFAULT_DEPTH_TOLERANCE,
            overwrite_all: false,
        }
    }
}

/// Outcome of one back-projection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BackProjection {
    /// Texels written, in increasing index order.
    pub written: Vec<usize>,
    /// For each written texel, the pixel whose label allowed the write.
    pub covering_pixels: Vec<usize>,
}

impl BackProjection {
    pub fn count(&self) -> usize {
        self.written.len()
    }
}

/// Writes a synthesized view into the atlas, one texel at a time.
///
/// Every valid texel is projected into the camera. It is considered visible
/// when its depth matches the g-buffer depth of the pixel it lands on (or,
/// if it lands on background, of the nearest matching surface pixel within
/// two pixels). A visible texel is written when that pixel is `New` or
/// `Update` and the texel's own similarity exceeds its best so far; the
/// color is a bilinear sample of the image restricted to pixels of the same
/// surface.
///
/// A second pass walks the generated pixels and writes the texel each one
/// samples when rendered, if the first pass missed it. Near face boundaries
/// a texel center can land on a pixel owned by the neighbouring face, so
/// without this pass a pixel could keep reading an unpainted texel.
#[allow(clippy::too_many_arguments)]
pub fn back_project(
    image: &ViewImage,
    mask: &GenerationMask,
    camera: &Camera,
    gbuffer: &GBuffer,
    mesh: &Mesh,
    texgeo: &TexelGeometry,
    atlas: &mut TextureAtlas,
    params: &BackProjectParams,
) -> Result<BackProjection, TexStateError> {
    let res = gbuffer.resolution();
    check_resolution("image", image.resolution, res)?;
    check_resolution("mask", mask.resolution, res)?;
    check_resolution("camera", camera.resolution(), res)?;
    check_resolution("atlas", atlas.resolution(), texgeo.resolution())?;

    let eye = camera.eye();
    let depth = gbuffer.depth();
    let tol = params.depth_tolerance;
    let matches = |pixel: usize, d: f64| gbuffer.is_covered(pixel) && (depth[pixel] - d).abs() <= tol;
    let mut out = BackProjection::default();
    let adjacency = VertexFaces::new(mesh);

    for t in texgeo.valid_texels() {
        let (Some(pos), Some(normal)) = (texgeo.position(t), texgeo.normal(t)) else {
            continue;
        };
        let Some(p) = camera.project(&pos) else { continue };
        if !(p.x >= 0.0 && p.y >= 0.0 && p.x < res as f64 && p.y < res as f64) {
            continue;
        }
        let (px, py) = (p.x.floor() as i64, p.y.floor() as i64);
        let pixel = py as usize * res + px as usize;
        let covering = if gbuffer.is_covered(pixel) {
            // Covered by some surface: either this one, or an occluder.
            matches(pixel, p.depth).then_some(pixel)
        } else {
            let mut best: Option<(f64, usize)> = None;
            for dy in -SILHOUETTE_SEARCH_RADIUS..=SILHOUETTE_SEARCH_RADIUS {
                for dx in -SILHOUETTE_SEARCH_RADIUS..=SILHOUETTE_SEARCH_RADIUS {
                    let (nx, ny) = (px + dx, py + dy);
                    if nx < 0 || ny < 0 || nx >= res as i64 || ny >= res as i64 {
                        continue;
                    }
                    let q = ny as usize * res + nx as usize;
                    if !matches(q, p.depth) {
                        continue;
                    }
                    let d2 = (nx as f64 + 0.5 - p.x).powi(2) + (ny as f64 + 0.5 - p.y).powi(2);
                    if best.map_or(true, |(bd, _)| d2 < bd) {
                        best = Some((d2, q));
                    }
                }
            }
            best.map(|(_, q)| q)
        };
        let Some(covering) = covering else { continue };
        if !mask.labels[covering].is_generated() {
            continue;
        }
        let s = similarity_at(&normal, &eye, &pos);
        if !(s > 0.0) {
            continue;
        }
        if !params.overwrite_all && !(s > atlas.best_similarity(t)) {
            continue;
        }
        if occluded_nearby(mesh, &adjacency, gbuffer, &eye, &pos, texgeo.face(t), px, py) {
            continue;
        }
        let color = sample_surface_bilinear(image, res, p.x, p.y, covering, |q| matches(q, p.depth));
        atlas.paint(t, color, s);
        out.written.push(t);
        out.covering_pixels.push(covering);
    }

    let mut extra = Vec::new();
    for (i, label) in mask.labels.iter().enumerate() {
        let Some(face) = gbuffer.face_id(i) else { continue };
        if !label.is_generated() {
            continue;
        }
        let t = texel_index(mesh.uv_at(face, gbuffer.barycentrics(i)), atlas.resolution());
        if out.written.binary_search(&t).is_ok() {
            continue;
        }
        let (Some(pos), Some(normal)) = (texgeo.position(t), texgeo.normal(t)) else {
            continue;
        };
        if !matches(i, camera.depth_of(&pos)) {
            continue;
        }
        let s = similarity_at(&normal, &eye, &pos);
        if !(s > 0.0) || (!params.overwrite_all && !(s > atlas.best_similarity(t))) {
            continue;
        }
        let p = camera.project(&pos).expect("pixel surface is in front of the camera");
        if occluded_nearby(mesh, &adjacency, gbuffer, &eye, &pos, texgeo.face(t), p.x.floor() as i64, p.y.floor() as i64) {
            continue;
        }
        atlas.paint(t, image.rgb[i], s);
        extra.push((t, i));
    }
    if !extra.is_empty() {
        extra.extend(out.written.iter().copied().zip(out.covering_pixels.iter().copied()));
        extra.sort_unstable();
        extra.dedup_by_key(|e| e.0);
        (out.written, out.covering_pixels) = extra.into_iter().unzip();
    }
    Ok(out)
}

/// Bilinear sample at continuous pixel position `(x, y)` over the pixels
/// accepted by `on_surface`, renormalizing the weights. Falls back to the
/// `fallback` pixel when none of the four neighbours qualify.
fn sample_surface_bilinear(
    image: &ViewImage,
    res: usize,
    x: f64,
    y: f64,
    fallback: usize,
    on_surface: impl Fn(usize) -> bool,
) -> [f64; 3] {
    let (sx, sy) = (x - 0.5, y - 0.5);
    let (x0, y0) = (sx.floor(), sy.floor());
    let (fx, fy) = (sx - x0, sy - y0);
    let mut acc = [0.0; 3];
    let mut total = 0.0;
    for (dx, dy, w) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        let (cx, cy) = (x0 as i64 + dx, y0 as i64 + dy);
        if w <= 0.0 || cx < 0 || cy < 0 || cx >= res as i64 || cy >= res as i64 {
            continue;
        }
        let q = cy as usize * res + cx as usize;
        if !on_surface(q) {
            continue;
        }
        for c in 0..3 {
            acc[c] += w * image.rgb[q][c];
        }
        total += w;
    }
    if total > 0.0 {
        acc.map(|a| a / total)
    } else {
        image.rgb[fallback]
    }
}
