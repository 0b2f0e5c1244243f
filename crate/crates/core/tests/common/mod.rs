//! Independent oracles and random fixtures shared by the integration tests.
//! Nothing here calls into the code paths it is used to check.
#![allow(dead_code)]

use std::f64::consts::PI;

use mtv_core::camera::CameraCalib;
use mtv_core::kinematics::{DhChain, DhRow, Pose};
use mtv_core::maskio::Mask;
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type M4 = [[f64; 4]; 4];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn identity4() -> M4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn mul4(a: &M4, b: &M4) -> M4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn rot_z4(theta: f64) -> M4 {
    let (s, c) = theta.sin_cos();
    let mut m = identity4();
    m[0][0] = c;
    m[0][1] = -s;
    m[1][0] = s;
    m[1][1] = c;
    m
}

pub fn rot_x4(alpha: f64) -> M4 {
    let (s, c) = alpha.sin_cos();
    let mut m = identity4();
    m[1][1] = c;
    m[1][2] = -s;
    m[2][1] = s;
    m[2][2] = c;
    m
}

pub fn trans4(x: f64, y: f64, z: f64) -> M4 {
    let mut m = identity4();
    m[0][3] = x;
    m[1][3] = y;
    m[2][3] = z;
    m
}

pub fn pose_to_m4(p: &Pose) -> M4 {
    let mut m = identity4();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = p.rotation()[(i, j)];
        }
        m[i][3] = p.translation()[i];
    }
    m
}

/// `RotZ(θ + θ_off) · TransZ(d) · TransX(a) · RotX(α)` as four explicit matrices.
pub fn dh_oracle(row: &DhRow, theta: f64) -> M4 {
    let m = mul4(&rot_z4(theta + row.theta_offset), &trans4(0.0, 0.0, row.d));
    let m = mul4(&m, &trans4(row.a, 0.0, 0.0));
    mul4(&m, &rot_x4(row.alpha))
}

pub fn fk_oracle(chain: &DhChain, q: &[f64]) -> M4 {
    chain
        .rows
        .iter()
        .zip(q)
        .fold(pose_to_m4(&chain.base), |acc, (row, &theta)| mul4(&acc, &dh_oracle(row, theta)))
}

pub fn max_abs_diff(a: &M4, b: &M4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - b[i][j]).abs());
        }
    }
    worst
}

pub fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    let axis = Vector3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    let axis = Unit::new_normalize(axis + Vector3::new(1e-3, 0.0, 0.0));
    Rotation3::from_axis_angle(&axis, rng.random_range(-PI..PI)).into_inner()
}

pub fn random_chain(rng: &mut impl Rng, dof: usize) -> DhChain {
    let rows = (0..dof)
        .map(|_| {
            DhRow::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-PI..PI),
                rng.random_range(-0.5..0.5),
                rng.random_range(-PI..PI),
            )
        })
        .collect();
    let base = Pose::new(
        random_rotation(rng),
        Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    )
    .unwrap();
    DhChain::new(base, rows).unwrap()
}

pub fn random_joints(rng: &mut impl Rng, dof: usize) -> Vec<f64> {
    (0..dof).map(|_| rng.random_range(-PI..PI)).collect()
}

pub fn random_calib(rng: &mut impl Rng) -> CameraCalib {
    CameraCalib {
        fx: rng.random_range(50.0..800.0),
        fy: rng.random_range(50.0..800.0),
        cx: rng.random_range(0.0..640.0),
        cy: rng.random_range(0.0..480.0),
        rotation: random_rotation(rng),
        translation: Vector3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
        width: 640,
        height: 480,
    }
}

/// World point with camera depth in `[0.1, 5]` for `calib`, built by hand.
pub fn random_point_in_front(rng: &mut impl Rng, calib: &CameraCalib) -> Vector3<f64> {
    let pc = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(0.1..5.0)];
    let mut pw = [0.0; 3];
    for i in 0..3 {
        pw[i] = calib.translation[i];
        for k in 0..3 {
            pw[i] += calib.rotation[(i, k)] * pc[k];
        }
    }
    Vector3::new(pw[0], pw[1], pw[2])
}

/// `Rᵀ(p − t)` then `u = fx·x/z + cx`, `v = fy·y/z + cy`, spelled out.
pub fn projection_oracle(calib: &CameraCalib, p: &Vector3<f64>) -> (f64, f64, f64) {
    let d = [p[0] - calib.translation[0], p[1] - calib.translation[1], p[2] - calib.translation[2]];
    let mut pc = [0.0; 3];
    for i in 0..3 {
        for k in 0..3 {
            pc[i] += calib.rotation[(k, i)] * d[k];
        }
    }
    (calib.fx * pc[0] / pc[2] + calib.cx, calib.fy * pc[1] / pc[2] + calib.cy, pc[2])
}

/// Jaccard by per-pixel recount through `get`; both-empty counts as 1.
pub fn jaccard_recount(a: &Mask, b: &Mask) -> f64 {
    let (mut inter, mut union) = (0u64, 0u64);
    for y in 0..a.height() {
        for x in 0..a.width() {
            let (p, q) = (a.get(x, y), b.get(x, y));
            if p && q {
                inter += 1;
            }
            if p || q {
                union += 1;
            }
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn random_mask(rng: &mut impl Rng, w: u32, h: u32, density: f64) -> Mask {
    Mask::from_fn(w, h, |_, _| rng.random_bool(density)).unwrap()
}

pub fn rect_mask(w: u32, h: u32, x0: i64, y0: i64, rw: i64, rh: i64) -> Mask {
    let mut m = Mask::new(w, h).unwrap();
    m.fill_rect(x0, y0, x0 + rw, y0 + rh);
    m
}

/// Analytic Jaccard of a `W×H` rectangle against itself shifted by `dx`.
pub fn shifted_rect_jaccard(w: i64, h: i64, dx: i64) -> f64 {
    let overlap = (w - dx.abs()).max(0) * h;
    overlap as f64 / (2 * w * h - overlap) as f64
}

/// Published per-task view-1 means (percent) for tasks 1–15.
pub const PUBLISHED_MEANS_VIEW1: [f64; 15] = [
    54.6, 48.2, 51.4, 60.1, 35.6, 42.4, 34.9, 65.3, 58.9, 50.1, 54.7, 69.4, 63.5, 60.8, 58.4,
];

pub const TASK_NAMES: [&str; 15] = [
    "Bussing Table",
    "Collect Food",
    "Collect Tableware",
    "Collect Toy",
    "Move and Stack Block AB",
    "Move and Stack Plate",
    "Move Object Two",
    "Place Block A2B Left",
    "Place Block A2B Right",
    "Place Block AB2C Left",
    "Place Block AB2C Right",
    "Place Bread Plate",
    "Place Cup Plate",
    "Shake Bottle",
    "Stack Blocks Two",
];

/// Published per-view rankings in printed order: (task id, mean J in percent).
pub const PUBLISHED_RANKING_VIEW1: [(u32, f64); 15] = [
    (12, 68.3),
    (13, 64.5),
    (14, 62.8),
    (8, 62.5),
    (9, 58.5),
    (15, 55.9),
    (4, 55.9),
    (1, 54.9),
    (11, 53.4),
    (3, 49.9),
    (10, 49.3),
    (2, 48.8),
    (6, 46.7),
    (5, 36.5),
    (7, 36.0),
];

pub const PUBLISHED_RANKING_VIEW2: [(u32, f64); 15] = [
    (12, 57.7),
    (1, 52.1),
    (4, 49.4),
    (13, 45.2),
    (14, 45.2),
    (11, 44.7),
    (8, 44.1),
    (9, 43.2),
    (2, 43.0),
    (15, 40.4),
    (3, 40.5),
    (10, 40.0),
    (6, 37.6),
    (7, 30.0),
    (5, 25.7),
];
