//! Forward kinematics for serial arms described by classic (distal)
//! Denavit–Hartenberg parameters.
//!
//! Each link contributes `RotZ(theta + theta_offset) · TransZ(d) · TransX(a) · RotX(alpha)`.
//! Angles are radians and lengths meters throughout.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for rotation orthonormality and determinant checks.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// One row of a DH table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    #[serde(default)]
    pub theta_offset: f64,
}

impl DhRow {
    pub fn new(a: f64, alpha: f64, d: f64, theta_offset: f64) -> Self {
        Self {
            a,
            alpha,
            d,
            theta_offset,
        }
    }

    fn is_finite(&self) -> bool {
        self.a.is_finite() && self.alpha.is_finite() && self.d.is_finite() && self.theta_offset.is_finite()
    }
}

/// Rigid transform: `p' = rotation · p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRepr", into = "PoseRepr")]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

#[derive(Serialize, Deserialize)]
struct PoseRepr {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl TryFrom<PoseRepr> for Pose {
    type Error = Error;

    fn try_from(repr: PoseRepr) -> Result<Self> {
        Pose::new(matrix_from_rows(&repr.rotation), Vector3::from(repr.translation))
    }
}

impl From<Pose> for PoseRepr {
    fn from(pose: Pose) -> Self {
        PoseRepr {
            rotation: matrix_to_rows(&pose.rotation),
            translation: pose.translation.into(),
        }
    }
}

pub(crate) fn matrix_from_rows(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| rows[r][c])
}

pub(crate) fn matrix_to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut rows = [[0.0; 3]; 3];
    for (r, row) in rows.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = m[(r, c)];
        }
    }
    rows
}

/// Largest absolute entry of `RᵀR − I`.
pub fn orthonormality_error(rotation: &Matrix3<f64>) -> f64 {
    (rotation.transpose() * rotation - Matrix3::identity()).amax()
}

/// Checks that `rotation` is a proper rotation within [`ROTATION_TOLERANCE`].
pub(crate) fn check_rotation(rotation: &Matrix3<f64>) -> Result<()> {
    if rotation.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("rotation has non-finite entries".into()));
    }
    let err = orthonormality_error(rotation);
    if err > ROTATION_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "rotation is not orthonormal (max |RᵀR − I| = {err:e})"
        )));
    }
    let det = rotation.determinant();
    if (det - 1.0).abs() > ROTATION_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "rotation determinant is {det}, expected +1"
        )));
    }
    Ok(())
}

impl Pose {
    /// Builds a pose, rejecting non-finite values and improper rotations.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        check_rotation(&rotation)?;
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("translation has non-finite entries".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }
}

impl std::ops::Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

/// A serial chain of DH links mounted at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DhChain {
    #[serde(default = "Pose::identity")]
    pub base: Pose,
    pub rows: Vec<DhRow>,
}

impl DhChain {
    pub fn new(base: Pose, rows: Vec<DhRow>) -> Result<Self> {
        let chain = Self { base, rows };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::InvalidParameter("DH chain has no rows".into()));
        }
        if let Some(i) = self.rows.iter().position(|r| !r.is_finite()) {
            return Err(Error::InvalidParameter(format!("DH row {i} has non-finite fields")));
        }
        Ok(())
    }

    pub fn dof(&self) -> usize {
        self.rows.len()
    }

    /// Splits after the first `k` links. The tail chain has an identity base,
    /// so `head_fk ∘ tail_fk` reproduces the full chain.
    pub fn split_at(&self, k: usize) -> (DhChain, DhChain) {
        let (head, tail) = self.rows.split_at(k);
        (
            DhChain {
                base: self.base,
                rows: head.to_vec(),
            },
            DhChain {
                base: Pose::identity(),
                rows: tail.to_vec(),
            },
        )
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let chain: DhChain = crate::error::read_json(path)?;
        chain.validate()?;
        Ok(chain)
    }
}

/// Joint angles in radians, one per chain row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(pub Vec<f64>);

impl JointVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for JointVector {
    fn from(v: Vec<f64>) -> Self {
        JointVector(v)
    }
}

/// Transform of a single DH link at joint angle `theta`.
pub fn dh_link_transform(row: &DhRow, theta: f64) -> Result<Pose> {
    if !row.is_finite() || !theta.is_finite() {
        return Err(Error::InvalidParameter("non-finite DH parameter or joint angle".into()));
    }
    let (st, ct) = (theta + row.theta_offset).sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    let rotation = Matrix3::new(
        ct, -st * ca, st * sa, //
        st, ct * ca, -ct * sa, //
        0.0, sa, ca,
    );
    let translation = Vector3::new(row.a * ct, row.a * st, row.d);
    Ok(Pose {
        rotation,
        translation,
    })
}

/// End-effector pose: `base ∘ Π dh_link_transform(row_i, q_i)`.
pub fn forward_kinematics(chain: &DhChain, q: &JointVector) -> Result<Pose> {
    if q.len() != chain.rows.len() {
        return Err(Error::DimensionMismatch(format!(
            "chain has {} joints, joint vector has {}",
            chain.rows.len(),
            q.len()
        )));
    }
    chain
        .rows
        .iter()
        .zip(&q.0)
        .try_fold(chain.base, |acc, (row, &theta)| {
            Ok(acc.compose(&dh_link_transform(row, theta)?))
        })
}

/// End-effector positions for every frame of a joint trajectory.
pub fn ee_positions(chain: &DhChain, trajectory: &[JointVector]) -> Result<Vec<Vector3<f64>>> {
    trajectory
        .iter()
        .enumerate()
        .map(|(t, q)| match forward_kinematics(chain, q) {
            Ok(pose) => Ok(pose.translation),
            Err(Error::DimensionMismatch(msg)) => Err(Error::DimensionMismatch(format!("frame {t}: {msg}"))),
            Err(e) => Err(e),
        })
        .collect()
}
