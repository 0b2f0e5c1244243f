mod common;

use common::*;
use mtv_core::camera::{
    project, project_world, track_from_trajectory, validate_calib, world_to_camera, CalibIssue, CameraCalib,
    PixelPoint,
};
use mtv_core::trajvideo::ArmId;
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rand::Rng;

fn axis_calib() -> CameraCalib {
    CameraCalib {
        fx: 100.0,
        fy: 100.0,
        cx: 192.0,
        cy: 144.0,
        rotation: Matrix3::identity(),
        translation: Vector3::zeros(),
        width: 384,
        height: 288,
    }
}

#[test]
fn matches_hand_composition() {
    let mut r = rng(5);
    for _ in 0..2000 {
        let calib = random_calib(&mut r);
        let p = random_point_in_front(&mut r, &calib);
        let got = project_world(&calib, &p).unwrap();
        let (u, v, z) = projection_oracle(&calib, &p);
        assert!(z > 0.0);
        assert!((got.u - u).abs() < 1e-9 && (got.v - v).abs() < 1e-9, "{got:?} vs ({u}, {v})");
        assert_eq!(got.visible, (0.0..640.0).contains(&u) && (0.0..480.0).contains(&v));
    }
}

#[test]
fn principal_point_and_off_axis_examples() {
    let c = axis_calib();
    let p = project_world(&c, &Vector3::new(0.0, 0.0, 2.0)).unwrap();
    assert_eq!((p.u, p.v, p.visible), (192.0, 144.0, true));
    let p = project_world(&c, &Vector3::new(1.0, 0.0, 2.0)).unwrap();
    assert_eq!((p.u, p.v), (242.0, 144.0));
}

#[test]
fn behind_and_on_plane_points_get_sentinel() {
    let c = axis_calib();
    assert_eq!(project_world(&c, &Vector3::new(0.0, 0.0, -1.0)).unwrap(), PixelPoint::BEHIND);
    assert_eq!(project_world(&c, &Vector3::new(0.3, 0.1, 0.0)).unwrap(), PixelPoint::BEHIND);
    assert_eq!(project(&c, &Vector3::new(f64::NAN, 0.0, 1.0)), PixelPoint::BEHIND);
}

#[test]
fn off_canvas_points_are_not_visible() {
    let c = axis_calib();
    let p = project_world(&c, &Vector3::new(10.0, 0.0, 1.0)).unwrap();
    assert!(!p.visible);
    assert!(p.u > 384.0);
}

#[test]
fn look_at_puts_target_on_principal_point() {
    let calib = CameraCalib::look_at(
        Vector3::new(1.1, 0.0, 0.75),
        Vector3::new(0.25, 0.0, 0.08),
        Vector3::new(0.0, 0.0, 1.0),
        320.0,
        384,
        288,
    )
    .unwrap();
    assert!(validate_calib(&calib).is_empty());
    let p = project_world(&calib, &Vector3::new(0.25, 0.0, 0.08)).unwrap();
    assert!((p.u - 192.0).abs() < 1e-9 && (p.v - 144.0).abs() < 1e-9);
    let above = project_world(&calib, &Vector3::new(0.25, 0.0, 0.3)).unwrap();
    assert!(above.v < p.v, "world up should map to image up");
}

#[test]
fn validation_reports_each_problem() {
    let mut c = axis_calib();
    c.fx = 0.0;
    c.rotation[(0, 0)] = 2.0;
    c.width = 0;
    let issues = validate_calib(&c);
    assert!(issues.iter().any(|i| matches!(i, CalibIssue::NonPositiveFocal { .. })));
    assert!(issues.iter().any(|i| matches!(i, CalibIssue::NotOrthonormal { .. })));
    assert!(issues.iter().any(|i| matches!(i, CalibIssue::EmptyImage { .. })));

    let mut mirror = axis_calib();
    mirror.rotation = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
    assert!(validate_calib(&mirror).iter().any(|i| matches!(i, CalibIssue::NotProperRotation { .. })));
    assert!(world_to_camera(&mirror, &Vector3::new(f64::NAN, 0.0, 0.0)).is_err());
}

#[test]
fn track_keeps_one_entry_per_point() {
    let c = axis_calib();
    let pts = vec![Vector3::new(0.0, 0.0, 2.0), Vector3::new(0.0, 0.0, -2.0), Vector3::new(0.5, 0.5, 1.0)];
    let track = track_from_trajectory(&c, &pts, ArmId::Right);
    assert_eq!(track.arm, ArmId::Right);
    assert_eq!(track.points.len(), 3);
    assert_eq!(track.points[1], PixelPoint::BEHIND);
}

#[test]
fn calib_json_uses_r_and_t_keys() {
    let text = serde_json::to_string(&axis_calib()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v.get("R").is_some() && v.get("t").is_some());
    let back: CameraCalib = serde_json::from_str(&text).unwrap();
    assert_eq!(back, axis_calib());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scale_about_camera_center_is_invariant(seed in any::<u64>(), lambda in 0.05f64..50.0) {
        let mut r = rng(seed);
        let calib = random_calib(&mut r);
        let p = random_point_in_front(&mut r, &calib);
        let scaled = calib.translation + (p - calib.translation) * lambda;
        let a = project_world(&calib, &p).unwrap();
        let b = project_world(&calib, &scaled).unwrap();
        prop_assert!((a.u - b.u).abs() < 1e-7 && (a.v - b.v).abs() < 1e-7);
    }

    #[test]
    fn camera_frame_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let calib = random_calib(&mut r);
        let p = Vector3::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let pc = world_to_camera(&calib, &p).unwrap();
        let back = calib.rotation * pc + calib.translation;
        prop_assert!((back - p).norm() < 1e-12);
    }

    #[test]
    fn visible_means_inside_canvas(seed in any::<u64>()) {
        let mut r = rng(seed);
        let calib = random_calib(&mut r);
        let p = Vector3::new(r.random_range(-4.0..4.0), r.random_range(-4.0..4.0), r.random_range(-4.0..4.0));
        let px = project_world(&calib, &p).unwrap();
        if px.visible {
            prop_assert!(px.u >= 0.0 && px.u < 640.0 && px.v >= 0.0 && px.v < 480.0);
        }
        if world_to_camera(&calib, &p).unwrap().z <= 1e-6 {
            prop_assert_eq!(px, PixelPoint::BEHIND);
        }
    }

    #[test]
    fn constant_depth_line_projects_collinear(seed in any::<u64>()) {
        let mut r = rng(seed);
        let calib = random_calib(&mut r);
        let z = r.random_range(0.2..5.0);
        let a = Vector3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), z);
        let d = Vector3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), 0.0);
        let pts: Vec<PixelPoint> = (0..7)
            .map(|i| project(&calib, &(a + d * (i as f64 * 0.3))))
            .collect();
        let (p0, p1) = (pts[0], pts[6]);
        let (ex, ey) = (p1.u - p0.u, p1.v - p0.v);
        let len = (ex * ex + ey * ey).sqrt();
        prop_assume!(len > 1e-3);
        for p in &pts {
            let residual = ((p.u - p0.u) * ey - (p.v - p0.v) * ex).abs() / len;
            prop_assert!(residual < 1e-6, "residual {}", residual);
        }
    }
}
