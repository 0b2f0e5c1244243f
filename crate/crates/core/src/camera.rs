//! Calibrated pinhole cameras: world→camera transform and projection to
//! pixel coordinates. No lens distortion.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{matrix_from_rows, matrix_to_rows, orthonormality_error, ROTATION_TOLERANCE};
use crate::trajvideo::{ArmId, PixelTrack};

/// Points with camera depth at or below this are treated as behind the camera.
pub const MIN_DEPTH: f64 = 1e-6;

/// Intrinsics plus camera-to-base extrinsics for one view.
///
/// The world→camera map is `p_c = Rᵀ(p_w − t)`, so `R` columns are the camera
/// axes expressed in the base frame and `t` is the camera center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CalibRepr", into = "CalibRepr")]
pub struct CameraCalib {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
    pub width: u32,
    pub height: u32,
}

#[derive(Serialize, Deserialize)]
struct CalibRepr {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    #[serde(rename = "R")]
    rotation: [[f64; 3]; 3],
    t: [f64; 3],
    width: u32,
    height: u32,
}

impl From<CalibRepr> for CameraCalib {
    fn from(r: CalibRepr) -> Self {
        CameraCalib {
            fx: r.fx,
            fy: r.fy,
            cx: r.cx,
            cy: r.cy,
            rotation: matrix_from_rows(&r.rotation),
            translation: Vector3::from(r.t),
            width: r.width,
            height: r.height,
        }
    }
}

impl From<CameraCalib> for CalibRepr {
    fn from(c: CameraCalib) -> Self {
        CalibRepr {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            rotation: matrix_to_rows(&c.rotation),
            t: c.translation.into(),
            width: c.width,
            height: c.height,
        }
    }
}

impl CameraCalib {
    /// Camera at `eye` looking at `target`, image `v` axis pointing as close to
    /// `-up` as possible.
    pub fn look_at(
        eye: Vector3<f64>,
        target: Vector3<f64>,
        up: Vector3<f64>,
        focal: f64,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        let z = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidParameter("eye and target coincide".into()))?;
        let x = z
            .cross(&up)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidParameter("up vector is parallel to viewing direction".into()))?;
        let y = z.cross(&x);
        let calib = CameraCalib {
            fx: focal,
            fy: focal,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            rotation: Matrix3::from_columns(&[x, y, z]),
            translation: eye,
            width,
            height,
        };
        Ok(calib)
    }

    /// Intrinsic matrix `K`.
    pub fn intrinsic_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        crate::error::read_json(path)
    }
}

/// Projected pixel location. `u`, `v` are `-1` when the point is behind the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
    pub visible: bool,
}

impl PixelPoint {
    pub const BEHIND: PixelPoint = PixelPoint {
        u: -1.0,
        v: -1.0,
        visible: false,
    };
}

/// `Rᵀ(p_w − t)`.
pub fn world_to_camera(calib: &CameraCalib, p_w: &Vector3<f64>) -> Result<Vector3<f64>> {
    if p_w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite world point".into()));
    }
    Ok(calib.rotation.transpose() * (p_w - calib.translation))
}

/// Pinhole projection of a camera-frame point. Points at depth ≤ [`MIN_DEPTH`]
/// (or non-finite) come back as [`PixelPoint::BEHIND`].
pub fn project(calib: &CameraCalib, p_c: &Vector3<f64>) -> PixelPoint {
    let (x, y, z) = (p_c[0], p_c[1], p_c[2]);
    if !(z > MIN_DEPTH) || !x.is_finite() || !y.is_finite() || !z.is_finite() {
        return PixelPoint::BEHIND;
    }
    let u = calib.fx * x / z + calib.cx;
    let v = calib.fy * y / z + calib.cy;
    let visible = (0.0..calib.width as f64).contains(&u) && (0.0..calib.height as f64).contains(&v);
    PixelPoint { u, v, visible }
}

pub fn project_world(calib: &CameraCalib, p_w: &Vector3<f64>) -> Result<PixelPoint> {
    Ok(project(calib, &world_to_camera(calib, p_w)?))
}

/// Projects a 3D end-effector path into one view. Non-finite points become
/// non-visible entries so the track keeps one entry per frame.
pub fn track_from_trajectory(calib: &CameraCalib, points: &[Vector3<f64>], arm: ArmId) -> PixelTrack {
    let points = points
        .iter()
        .map(|p| project_world(calib, p).unwrap_or(PixelPoint::BEHIND))
        .collect();
    PixelTrack { arm, points }
}

/// A violated calibration invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum CalibIssue {
    NonFinite(&'static str),
    NonPositiveFocal { axis: &'static str, value: f64 },
    NotOrthonormal { max_error: f64 },
    NotProperRotation { determinant: f64 },
    EmptyImage { width: u32, height: u32 },
}

impl fmt::Display for CalibIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalibIssue::NonFinite(field) => write!(f, "{field} is not finite"),
            CalibIssue::NonPositiveFocal { axis, value } => write!(f, "focal length {axis} = {value} must be positive"),
            CalibIssue::NotOrthonormal { max_error } => {
                write!(f, "R is not orthonormal (max |RᵀR − I| = {max_error:e})")
            }
            CalibIssue::NotProperRotation { determinant } => write!(f, "det(R) = {determinant}, expected +1"),
            CalibIssue::EmptyImage { width, height } => write!(f, "image size {width}x{height} must be at least 1x1"),
        }
    }
}

/// Lists every violated invariant; an empty list means the calibration is valid.
pub fn validate_calib(calib: &CameraCalib) -> Vec<CalibIssue> {
    let mut issues = Vec::new();
    for (name, value) in [("fx", calib.fx), ("fy", calib.fy), ("cx", calib.cx), ("cy", calib.cy)] {
        if !value.is_finite() {
            issues.push(CalibIssue::NonFinite(name));
        }
    }
    for (axis, value) in [("fx", calib.fx), ("fy", calib.fy)] {
        if value.is_finite() && value <= 0.0 {
            issues.push(CalibIssue::NonPositiveFocal { axis, value });
        }
    }
    if calib.rotation.iter().any(|v| !v.is_finite()) {
        issues.push(CalibIssue::NonFinite("R"));
    } else {
        let max_error = orthonormality_error(&calib.rotation);
        if max_error > ROTATION_TOLERANCE {
            issues.push(CalibIssue::NotOrthonormal { max_error });
        }
        let determinant = calib.rotation.determinant();
        if (determinant - 1.0).abs() > ROTATION_TOLERANCE {
            issues.push(CalibIssue::NotProperRotation { determinant });
        }
    }
    if calib.translation.iter().any(|v| !v.is_finite()) {
        issues.push(CalibIssue::NonFinite("t"));
    }
    if calib.width == 0 || calib.height == 0 {
        issues.push(CalibIssue::EmptyImage {
            width: calib.width,
            height: calib.height,
        });
    }
    issues
}
