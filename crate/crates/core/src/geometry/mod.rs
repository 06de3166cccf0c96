//! Triangle meshes with per-corner UVs, normalization into the unit box, and
//! the texel-to-surface map used by back-projection.

mod bake;
pub mod obj;
pub mod shapes;

pub use bake::{bake_texel_geometry, texel_index, TexelGeometry, TexelKind};

use nalgebra::{Point2, Point3, Vector3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("line {line}: face {face} has no texture coordinates")]
    MissingUVs { face: usize, line: usize },
    #[error("line {line}: face {face} has {corners} corners, only triangles are supported")]
    NonTriangulated {
        face: usize,
        line: usize,
        corners: usize,
    },
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("face {face} references vertex {index}, but the mesh has {count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },
    #[error("face {face} has zero area")]
    DegenerateFace { face: usize },
    #[error("face {face} corner {corner} has uv ({u}, {v}) outside the unit square")]
    UvOutOfRange {
        face: usize,
        corner: usize,
        u: f64,
        v: f64,
    },
    #[error("mesh bounding box has zero extent")]
    DegenerateMesh,
    #[error("no texel is covered by any face; the UV atlas is broken")]
    ZeroCoverage,
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// UVs this far outside `[0,1]` are clamped instead of rejected.
const UV_SLACK: f64 = 1e-6;

/// A validated triangle mesh.
///
/// Positions are shared between faces; UVs are stored per face corner so
/// charts can be cut along seams without duplicating vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    positions: Vec<Point3<f64>>,
    faces: Vec<[u32; 3]>,
    corner_uvs: Vec<[Point2<f64>; 3]>,
    face_normals: Vec<Vector3<f64>>,
}

impl Mesh {
    /// Validates indices and UVs and derives unit face normals from the
    /// counter-clockwise winding.
    pub fn new(
        positions: Vec<Point3<f64>>,
        faces: Vec<[u32; 3]>,
        mut corner_uvs: Vec<[Point2<f64>; 3]>,
    ) -> Result<Self, GeometryError> {
        assert_eq!(
            faces.len(),
            corner_uvs.len(),
            "one uv triple is required per face"
        );
        for (fi, face) in faces.iter().enumerate() {
            for &index in face {
                if index as usize >= positions.len() {
                    return Err(GeometryError::IndexOutOfRange {
                        face: fi,
                        index: index as usize,
                        count: positions.len(),
                    });
                }
            }
        }
        for (fi, uvs) in corner_uvs.iter_mut().enumerate() {
            for (ci, uv) in uvs.iter_mut().enumerate() {
                let ok = |c: f64| c.is_finite() && (-UV_SLACK..=1.0 + UV_SLACK).contains(&c);
                if !ok(uv.x) || !ok(uv.y) {
                    return Err(GeometryError::UvOutOfRange {
                        face: fi,
                        corner: ci,
                        u: uv.x,
                        v: uv.y,
                    });
                }
                uv.x = uv.x.clamp(0.0, 1.0);
                uv.y = uv.y.clamp(0.0, 1.0);
            }
        }
        let face_normals = faces
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                let [a, b, c] = f.map(|i| positions[i as usize]);
                let n = (b - a).cross(&(c - a));
                let len = n.norm();
                let scale = (b - a).norm_squared().max((c - a).norm_squared());
                if !(len > 1e-12 * scale) || !len.is_finite() {
                    Err(GeometryError::DegenerateFace { face: fi })
                } else {
                    Ok(n / len)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            positions,
            faces,
            corner_uvs,
            face_normals,
        })
    }

    pub fn positions(&self) -> &[Point3<f64>] {
        &self.positions
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn corner_uvs(&self) -> &[[Point2<f64>; 3]] {
        &self.corner_uvs
    }

    pub fn face_normals(&self) -> &[Vector3<f64>] {
        &self.face_normals
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    /// The three corner positions of face `face`.
    pub fn face_positions(&self, face: usize) -> [Point3<f64>; 3] {
        self.faces[face].map(|i| self.positions[i as usize])
    }

    /// Surface point of `face` at the given barycentric weights.
    pub fn point_at(&self, face: usize, bary: [f64; 3]) -> Point3<f64> {
        let [a, b, c] = self.face_positions(face);
        Point3::from(a.coords * bary[0] + b.coords * bary[1] + c.coords * bary[2])
    }

    /// Texture coordinate of `face` at the given barycentric weights.
    pub fn uv_at(&self, face: usize, bary: [f64; 3]) -> Point2<f64> {
        let [a, b, c] = self.corner_uvs[face];
        Point2::from(a.coords * bary[0] + b.coords * bary[1] + c.coords * bary[2])
    }

    /// Axis-aligned bounds as `(min, max)`; `None` for a mesh without vertices.
    pub fn bounds(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let first = *self.positions.first()?;
        Some(self.positions.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }
}

/// Translates and uniformly scales `mesh` so its bounding box is centered at
/// the origin with a largest side of exactly 1.
pub fn normalize_mesh(mesh: &Mesh) -> Result<Mesh, GeometryError> {
    let (lo, hi) = mesh.bounds().ok_or(GeometryError::DegenerateMesh)?;
    let extent = (hi - lo).max();
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(GeometryError::DegenerateMesh);
    }
    let center = Point3::from((lo.coords + hi.coords) * 0.5);
    // Already normalized: return as-is so repeated normalization is exact.
    if center.coords.amax() <= 1e-12 && (extent - 1.0).abs() <= 1e-12 {
        return Ok(mesh.clone());
    }
    let scale = 1.0 / extent;
    let positions = mesh
        .positions
        .iter()
        .map(|p| Point3::from((p - center) * scale))
        .collect();
    Ok(Mesh {
        positions,
        faces: mesh.faces.clone(),
        corner_uvs: mesh.corner_uvs.clone(),
        face_normals: mesh.face_normals.clone(),
    })
}

/// Convenience wrapper for [`obj::load_obj`].
pub fn load_mesh(path: impl AsRef<std::path::Path>) -> Result<Mesh, GeometryError> {
    obj::load_obj(path)
}
