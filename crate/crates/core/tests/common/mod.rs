//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use meshpaint::camera::{viewpoint_to_camera, Camera, Viewpoint};
use meshpaint::diffusion::Conditioning;
use meshpaint::geometry::{normalize_mesh, shapes, Mesh};
use meshpaint::pipeline::{HeatWeights, PipelineConfig};
use meshpaint::raster::{DepthMap, ViewImage};
use meshpaint::texstate::{GenerationMask, Label};
use nalgebra::{Point3, Vector3};

pub fn cube() -> Mesh {
    normalize_mesh(&shapes::unit_cube()).unwrap()
}

pub fn sphere(subdivisions: u32) -> Mesh {
    normalize_mesh(&shapes::icosphere(subdivisions, 0.5)).unwrap()
}

pub fn camera(theta: f64, phi: f64, res: usize) -> Camera {
    viewpoint_to_camera(&Viewpoint::new(theta, phi, 1.8).unwrap(), res, 50.0).unwrap()
}

/// Small, fast pipeline settings for mechanism tests.
pub fn desk_config(prompt: &str, seed: u64) -> PipelineConfig {
    PipelineConfig {
        prompt: prompt.into(),
        image_resolution: 64,
        texture_resolution: 128,
        steps: 60,
        seed: Some(seed),
        ..Default::default()
    }
}

/// Conditioning with a radial depth bump on a background border.
pub fn toy_conditioning(prompt: &str, res: usize) -> Conditioning {
    let c = (res as f64 - 1.0) / 2.0;
    let depth = (0..res * res)
        .map(|i| {
            let (x, y) = ((i % res) as f64 - c, (i / res) as f64 - c);
            let r = (x * x + y * y).sqrt() / c.max(1.0);
            if r > 0.9 {
                1.0
            } else {
                0.2 + 0.5 * r
            }
        })
        .collect();
    let init_view = ViewImage {
        resolution: res,
        rgb: (0..res * res)
            .map(|i| [((i * 37) % 256) as f64 / 255.0, ((i * 11) % 256) as f64 / 255.0, 0.5])
            .collect(),
    };
    Conditioning {
        prompt: prompt.into(),
        depth: DepthMap {
            resolution: res,
            values: depth,
        },
        init_view,
    }
}

/// Deterministic pseudo-random labels.
pub fn random_mask(res: usize, seed: u64) -> GenerationMask {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let labels = (0..res * res)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            Label::ALL[(s >> 62) as usize]
        })
        .collect();
    GenerationMask { resolution: res, labels }
}

/// Heat by walking the pixel grid row by row and summing weights.
pub fn brute_force_heat(mask: &GenerationMask, w: &HeatWeights) -> f64 {
    let res = mask.resolution;
    let mut sum = 0.0;
    let mut count = 0usize;
    for y in 0..res {
        for x in 0..res {
            let weight = match mask.labels[y * res + x] {
                Label::New => w.new,
                Label::Update => w.update,
                Label::Keep => w.keep,
                Label::Ignore => continue,
            };
            sum += weight;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Möller-Trumbore: distance along `dir` (unit) to the triangle, if hit.
pub fn ray_triangle(origin: &Point3<f64>, dir: &Vector3<f64>, tri: [Point3<f64>; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 0.0).then_some(t)
}

/// Whether some surface lies between `eye` and `point`, more than `slack`
/// (world units) in front of it.
pub fn is_occluded(mesh: &Mesh, eye: &Point3<f64>, point: &Point3<f64>, slack: f64) -> bool {
    let to = point - eye;
    let dist = to.norm();
    let dir = to / dist;
    (0..mesh.face_count()).any(|f| {
        ray_triangle(eye, &dir, mesh.face_positions(f)).is_some_and(|t| t < dist - slack)
    })
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
