//! Spherical viewpoints, look-at cameras, and the fixed viewpoint sets used
//! by the generation and refinement stages.

use nalgebra::{Isometry3, Matrix4, Perspective3, Point3, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Near plane of the normalized depth range.
pub const DEPTH_NEAR: f64 = 0.1;
/// Far plane of the normalized depth range.
pub const DEPTH_FAR: f64 = 4.0;
/// Default camera distance for a unit-extent object.
pub const DEFAULT_DISTANCE: f64 = 1.8;
/// Default vertical field of view in degrees.
pub const DEFAULT_FOV_DEG: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum CameraError {
    #[error("camera distance must be positive and finite, got {0}")]
    InvalidDistance(f64),
    #[error("elevation must lie in [-90, 90] degrees, got {0}")]
    InvalidElevation(f64),
    #[error("azimuth must be finite, got {0}")]
    InvalidAzimuth(f64),
    #[error("field of view must lie in (10, 120) degrees, got {0}")]
    InvalidFov(f64),
    #[error("image resolution must be positive")]
    InvalidResolution,
}

/// A camera position on a sphere around the origin.
///
/// `theta` is the azimuth in degrees measured from `+Z` towards `+X`, `phi`
/// the elevation above the XZ plane, and `r` the distance to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub theta: f64,
    pub phi: f64,
    pub r: f64,
}

impl Viewpoint {
    /// Validates the angles and wraps `theta` into `[0, 360)`.
    pub fn new(theta: f64, phi: f64, r: f64) -> Result<Self, CameraError> {
        if !theta.is_finite() {
            return Err(CameraError::InvalidAzimuth(theta));
        }
        if !(-90.0..=90.0).contains(&phi) {
            return Err(CameraError::InvalidElevation(phi));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(CameraError::InvalidDistance(r));
        }
        Ok(Self {
            theta: theta.rem_euclid(360.0),
            phi,
            r,
        })
    }

    pub fn eye(&self) -> Point3<f64> {
        let (st, ct) = sin_cos_deg(self.theta);
        let (sp, cp) = sin_cos_deg(self.phi);
        Point3::new(self.r * cp * st, self.r * sp, self.r * cp * ct)
    }
}

/// `sin`/`cos` of an angle in degrees, exact at multiples of 90°.
fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let q = deg / 90.0;
    if q == q.round() {
        match (q as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        deg.to_radians().sin_cos()
    }
}

/// A surface point mapped into a camera image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Continuous pixel column; pixel `i` spans `[i, i+1)`.
    pub x: f64,
    /// Continuous pixel row, top to bottom.
    pub y: f64,
    /// Distance along the viewing axis.
    pub view_depth: f64,
    /// Linear depth mapped from `[DEPTH_NEAR, DEPTH_FAR]` to `[0, 1]`.
    pub depth: f64,
}

/// A perspective camera looking at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    eye: Point3<f64>,
    forward: Vector3<f64>,
    view: Matrix4<f64>,
    projection: Matrix4<f64>,
    resolution: usize,
}

impl Camera {
    pub fn eye(&self) -> Point3<f64> {
        self.eye
    }

    /// Unit viewing direction (eye towards origin).
    pub fn forward(&self) -> Vector3<f64> {
        self.forward
    }

    pub fn view_transform(&self) -> &Matrix4<f64> {
        &self.view
    }

    pub fn projection(&self) -> &Matrix4<f64> {
        &self.projection
    }

    /// Image side length in pixels (images are square).
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Projects a world point. Returns `None` for points at or behind the eye.
    pub fn project(&self, p: &Point3<f64>) -> Option<Projection> {
        let clip = self.projection * self.view * Vector4::new(p.x, p.y, p.z, 1.0);
        if !(clip.w > 0.0) {
            return None;
        }
        let res = self.resolution as f64;
        let (nx, ny) = (clip.x / clip.w, clip.y / clip.w);
        let view_depth = (p - self.eye).dot(&self.forward);
        Some(Projection {
            x: (nx + 1.0) * 0.5 * res,
            y: (1.0 - ny) * 0.5 * res,
            view_depth,
            depth: linear_depth(view_depth),
        })
    }

    /// Normalized depth of a world point.
    pub fn depth_of(&self, p: &Point3<f64>) -> f64 {
        linear_depth((p - self.eye).dot(&self.forward))
    }
}

pub(crate) fn linear_depth(view_depth: f64) -> f64 {
    (view_depth - DEPTH_NEAR) / (DEPTH_FAR - DEPTH_NEAR)
}

/// Builds a camera at `v` looking at the origin with `+Y` up (`+Z` up at the
/// poles), square image of `resolution` pixels, vertical FOV `fov_deg`.
pub fn viewpoint_to_camera(v: &Viewpoint, resolution: usize, fov_deg: f64) -> Result<Camera, CameraError> {
    if !(fov_deg > 10.0 && fov_deg < 120.0) {
        return Err(CameraError::InvalidFov(fov_deg));
    }
    if resolution == 0 {
        return Err(CameraError::InvalidResolution);
    }
    let v = Viewpoint::new(v.theta, v.phi, v.r)?;
    let eye = v.eye();
    let up = if v.phi.abs() >= 90.0 - 1e-9 {
        Vector3::z()
    } else {
        Vector3::y()
    };
    let view = Isometry3::look_at_rh(&eye, &Point3::origin(), &up).to_homogeneous();
    let projection =
        Perspective3::new(1.0, fov_deg.to_radians(), DEPTH_NEAR, DEPTH_FAR).to_homogeneous();
    Ok(Camera {
        eye,
        forward: (-eye.coords).normalize(),
        view,
        projection,
        resolution,
    })
}

/// The six axis-aligned generation views: front, back, left, right, top,
/// bottom.
pub fn preset_generation_views(r: f64) -> Vec<Viewpoint> {
    [(0.0, 0.0), (180.0, 0.0), (90.0, 0.0), (270.0, 0.0), (0.0, 90.0), (0.0, -90.0)]
        .iter()
        .map(|&(theta, phi)| Viewpoint { theta, phi, r })
        .collect()
}

pub const REFINEMENT_ELEVATIONS: [f64; 3] = [10.0, 40.0, 70.0];
pub const REFINEMENT_AZIMUTH_STEP: f64 = 30.0;

/// 36 refinement candidates on the upper hemisphere: three elevation rings,
/// twelve azimuths each, ring-major.
pub fn candidate_refinement_views(r: f64) -> Vec<Viewpoint> {
    REFINEMENT_ELEVATIONS
        .iter()
        .flat_map(|&phi| {
            (0..12).map(move |k| Viewpoint {
                theta: k as f64 * REFINEMENT_AZIMUTH_STEP,
                phi,
                r,
            })
        })
        .collect()
}
