//! Procedural test meshes with non-overlapping UV atlases.
//!
//! Every polygon (triangle or quad) gets its own square chart cell, inset by
//! a margin so that neighbouring charts never share texels.

use std::collections::HashMap;

use nalgebra::{Point2, Point3};

use super::Mesh;

/// Chart inset as a fraction of the cell size.
const CELL_MARGIN: f64 = 0.06;

enum Poly {
    Tri([u32; 3]),
    Quad([u32; 4]),
}

/// Accumulates positions and polygons, then packs one chart per polygon.
#[derive(Default)]
pub struct ChartedMeshBuilder {
    positions: Vec<Point3<f64>>,
    polys: Vec<Poly>,
}

impl ChartedMeshBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, p: Point3<f64>) -> u32 {
        self.positions.push(p);
        (self.positions.len() - 1) as u32
    }

    /// Counter-clockwise (seen from outside) triangle.
    pub fn triangle(&mut self, idx: [u32; 3]) {
        self.polys.push(Poly::Tri(idx));
    }

    /// Counter-clockwise planar quad; split along its `0-2` diagonal.
    pub fn quad(&mut self, idx: [u32; 4]) {
        self.polys.push(Poly::Quad(idx));
    }

    /// Adds the six faces of an axis-aligned box.
    pub fn cuboid(&mut self, lo: Point3<f64>, hi: Point3<f64>) {
        let base = self.positions.len() as u32;
        for i in 0..8u32 {
            self.vertex(Point3::new(
                if i & 1 != 0 { hi.x } else { lo.x },
                if i & 2 != 0 { hi.y } else { lo.y },
                if i & 4 != 0 { hi.z } else { lo.z },
            ));
        }
        // +Z, -Z, +X, -X, +Y, -Y
        for q in [
            [4, 5, 7, 6],
            [1, 0, 2, 3],
            [5, 1, 3, 7],
            [0, 4, 6, 2],
            [6, 7, 3, 2],
            [0, 1, 5, 4],
        ] {
            self.quad(q.map(|k| base + k));
        }
    }

    pub fn build(self) -> Mesh {
        let n = self.polys.len().max(1);
        let cols = (n as f64).sqrt().ceil() as usize;
        let cell = 1.0 / cols as f64;
        let m = CELL_MARGIN;
        let mut faces = Vec::new();
        let mut uvs = Vec::new();
        for (k, poly) in self.polys.iter().enumerate() {
            let (cx, cy) = ((k % cols) as f64, (k / cols) as f64);
            let at = |s: f64, t: f64| Point2::new((cx + s) * cell, 1.0 - (cy + 1.0 - t) * cell);
            match *poly {
                Poly::Tri(t) => {
                    faces.push(t);
                    uvs.push([at(m, m), at(1.0 - m, m), at(0.5, 1.0 - m)]);
                }
                Poly::Quad(q) => {
                    let c = [at(m, m), at(1.0 - m, m), at(1.0 - m, 1.0 - m), at(m, 1.0 - m)];
                    faces.push([q[0], q[1], q[2]]);
                    uvs.push([c[0], c[1], c[2]]);
                    faces.push([q[0], q[2], q[3]]);
                    uvs.push([c[0], c[2], c[3]]);
                }
            }
        }
        Mesh::new(self.positions, faces, uvs).expect("procedural mesh is valid")
    }
}

/// Box-unwrapped cuboid spanning `lo..hi` (12 triangles).
pub fn cube_with_corners(lo: Point3<f64>, hi: Point3<f64>) -> Mesh {
    let mut b = ChartedMeshBuilder::new();
    b.cuboid(lo, hi);
    b.build()
}

/// The unit cube centered at the origin.
pub fn unit_cube() -> Mesh {
    cube_with_corners(Point3::new(-0.5, -0.5, -0.5), Point3::new(0.5, 0.5, 0.5))
}

/// A large box with a smaller box hidden behind it when seen from `+Z`.
/// Faces 0..12 belong to the front box, 12..24 to the hidden one.
pub fn occluded_boxes() -> Mesh {
    let mut b = ChartedMeshBuilder::new();
    b.cuboid(Point3::new(-0.5, -0.5, 0.1), Point3::new(0.5, 0.5, 0.5));
    b.cuboid(Point3::new(-0.25, -0.25, -0.5), Point3::new(0.25, 0.25, -0.2));
    b.build()
}

/// Axis-aligned square in the plane `z`, facing `+Z`.
pub fn square(center: Point2<f64>, half: f64, z: f64) -> ChartedMeshBuilder {
    let mut b = ChartedMeshBuilder::new();
    let v: Vec<u32> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .map(|(sx, sy)| b.vertex(Point3::new(center.x + sx * half, center.y + sy * half, z)))
        .collect();
    b.quad([v[0], v[1], v[2], v[3]]);
    b
}

/// Geodesic sphere: an icosahedron subdivided `subdivisions` times
/// (20·4ⁿ triangles) with one chart per triangle.
pub fn icosphere(subdivisions: u32, radius: f64) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point3<f64>> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point3::from(nalgebra::Vector3::new(x, y, z).normalize()))
    .collect();
    let mut tris: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Point3<f64>>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = (verts[a as usize].coords + verts[b as usize].coords).normalize();
                verts.push(Point3::from(m));
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    let mut b = ChartedMeshBuilder::new();
    for v in &verts {
        b.vertex(Point3::from(v.coords * radius));
    }
    for [i, j, k] in tris {
        let (p, q, r) = (verts[i as usize], verts[j as usize], verts[k as usize]);
        let outward = (q - p).cross(&(r - p)).dot(&(p.coords + q.coords + r.coords)) > 0.0;
        b.triangle(if outward { [i, j, k] } else { [i, k, j] });
    }
    b.build()
}
