use nalgebra::{Point3, Vector3};

use super::{GeometryError, Mesh};
use crate::raster::edge::{closest_point_barycentric, for_each_covered};

/// How a texel received its surface sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TexelKind {
    /// No face touches the texel.
    Empty,
    /// The texel center lies inside a face's UV triangle.
    Interior,
    /// The texel center lies just outside a chart (within half a texel
    /// diagonal) and samples the nearest point on that chart's triangle.
    Gutter,
}

const NO_FACE: u32 = u32::MAX;

/// Per-texel surface samples of a mesh, in texture image order (row 0 is
/// the top of the texture, i.e. `v = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct TexelGeometry {
    resolution: usize,
    position: Vec<Point3<f64>>,
    normal: Vec<Vector3<f64>>,
    face: Vec<u32>,
    bary: Vec<[f64; 3]>,
    kind: Vec<TexelKind>,
    overlaps: usize,
}

impl TexelGeometry {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.kind.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kind.is_empty()
    }

    pub fn is_valid(&self, texel: usize) -> bool {
        self.kind[texel] != TexelKind::Empty
    }

    pub fn kind(&self, texel: usize) -> TexelKind {
        self.kind[texel]
    }

    pub fn position(&self, texel: usize) -> Option<Point3<f64>> {
        self.is_valid(texel).then(|| self.position[texel])
    }

    pub fn normal(&self, texel: usize) -> Option<Vector3<f64>> {
        self.is_valid(texel).then(|| self.normal[texel])
    }

    pub fn face(&self, texel: usize) -> Option<usize> {
        self.is_valid(texel).then(|| self.face[texel] as usize)
    }

    /// UV-space barycentric weights of the sample within its face.
    pub fn barycentrics(&self, texel: usize) -> Option<[f64; 3]> {
        self.is_valid(texel).then(|| self.bary[texel])
    }

    pub fn valid_count(&self) -> usize {
        self.kind.iter().filter(|k| **k != TexelKind::Empty).count()
    }

    pub fn interior_count(&self) -> usize {
        self.kind.iter().filter(|k| **k == TexelKind::Interior).count()
    }

    /// Fraction of the atlas holding a surface sample.
    pub fn coverage(&self) -> f64 {
        self.valid_count() as f64 / self.len() as f64
    }

    /// Number of texel centers claimed by more than one face.
    pub fn overlap_count(&self) -> usize {
        self.overlaps
    }

    /// Indices of all valid texels.
    pub fn valid_texels(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&t| self.is_valid(t))
    }
}

/// Continuous texel-grid coordinates of a UV (x right, y down).
pub(crate) fn uv_to_texel_space(uv: nalgebra::Point2<f64>, resolution: usize) -> [f64; 2] {
    let r = resolution as f64;
    [uv.x * r, (1.0 - uv.y) * r]
}

/// Index of the texel containing `uv`.
pub fn texel_index(uv: nalgebra::Point2<f64>, resolution: usize) -> usize {
    let [x, y] = uv_to_texel_space(uv, resolution);
    let clamp = |c: f64| (c.floor().max(0.0) as usize).min(resolution - 1);
    clamp(y) * resolution + clamp(x)
}

/// Rasterizes every face in UV space at `resolution`×`resolution` texels and
/// records, per covered texel, the interpolated surface point and the face
/// normal. Texel centers claimed by several faces keep the first face in
/// index order. A one-texel gutter around each chart is then filled with the
/// nearest point on the chart so that nearest-texel lookups at chart borders
/// always land on a sampled texel.
pub fn bake_texel_geometry(mesh: &Mesh, resolution: usize) -> Result<TexelGeometry, GeometryError> {
    assert!(resolution > 0, "texture resolution must be positive");
    let n = resolution * resolution;
    let mut geo = TexelGeometry {
        resolution,
        position: vec![Point3::origin(); n],
        normal: vec![Vector3::zeros(); n],
        face: vec![NO_FACE; n],
        bary: vec![[0.0; 3]; n],
        kind: vec![TexelKind::Empty; n],
        overlaps: 0,
    };

    let uv_tris: Vec<[[f64; 2]; 3]> = mesh
        .corner_uvs()
        .iter()
        .map(|t| t.map(|uv| uv_to_texel_space(uv, resolution)))
        .collect();
    let degenerate = |t: &[[f64; 2]; 3]| crate::raster::edge::orient(t[0], t[1], t[2]).abs() < 1e-12;

    for (f, tri) in uv_tris.iter().enumerate() {
        if degenerate(tri) {
            continue;
        }
        for_each_covered(*tri, resolution, resolution, |x, y, l| {
            let t = y * resolution + x;
            if geo.kind[t] != TexelKind::Empty {
                geo.overlaps += 1;
                return;
            }
            geo.set(t, mesh, f, l, TexelKind::Interior);
        });
    }

    // Texels touching the triangle only at a corner point stay empty.
    let reach = std::f64::consts::FRAC_1_SQRT_2 - 1e-9;
    for (f, tri) in uv_tris.iter().enumerate() {
        if degenerate(tri) {
            continue;
        }
        let lo = |i: usize| tri.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
        let hi = |i: usize| tri.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
        let span = |i: usize| {
            let a = (lo(i) - 1.5).floor().max(0.0) as usize;
            let b = ((hi(i) + 0.5).ceil().max(0.0) as usize).min(resolution - 1);
            a..=b
        };
        for y in span(1) {
            for x in span(0) {
                let t = y * resolution + x;
                if geo.kind[t] != TexelKind::Empty {
                    continue;
                }
                let (l, d) = closest_point_barycentric(*tri, [x as f64 + 0.5, y as f64 + 0.5]);
                if d < reach {
                    geo.set(t, mesh, f, l, TexelKind::Gutter);
                }
            }
        }
    }

    if geo.overlaps > 0 {
        log::warn!(
            "{} texel centers are covered by more than one face; the first face wins",
            geo.overlaps
        );
    }
    if geo.valid_count() == 0 {
        return Err(GeometryError::ZeroCoverage);
    }
    Ok(geo)
}

impl TexelGeometry {
    fn set(&mut self, t: usize, mesh: &Mesh, face: usize, bary: [f64; 3], kind: TexelKind) {
        self.position[t] = mesh.point_at(face, bary);
        self.normal[t] = mesh.face_normals()[face];
        self.face[t] = face as u32;
        self.bary[t] = bary;
        self.kind[t] = kind;
    }
}
