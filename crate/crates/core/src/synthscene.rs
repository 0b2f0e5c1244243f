//! Deterministic synthetic episodes with analytic ground truth.
//!
//! A [`SceneTemplate`] scripts joint waypoints for each arm, two or more boxes
//! on the table and a set of calibrated views. [`simulate`] turns it into
//! joint trajectories, object motion, per-view ground-truth masks and
//! trajectory videos; [`write_episode`] lays them out on disk. Everything is
//! a function of the template and its seed.
//!
//! Episode tree:
//!
//! ```text
//! <id>/manifest.json
//! <id>/joints.json
//! <id>/arms/<arm>.json
//! <id>/view<k>/calib.json
//! <id>/view<k>/gt_masks/<object>/mask_00000.png …
//! <id>/view<k>/traj/frame_00000.png … traj.json
//! ```

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::camera::{project, track_from_trajectory, validate_calib, world_to_camera, CameraCalib, MIN_DEPTH};
use crate::error::{read_json, write_json, Error, Result};
use crate::kinematics::{ee_positions, DhChain, DhRow, JointVector, Pose};
use crate::maskio::{
    initial_frame_prior, DescriptionClient, Mask, MaskSequence, ObjectDescription, SegmentationClient,
};
use crate::trajvideo::{synth_trajectory_video, write_view_frames, ArmId, Frame, PixelTrack, TrajVideoSpec};

/// Axis-aligned box in the robot base frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3 {
    pub center: Vector3<f64>,
    pub half_extents: Vector3<f64>,
}

impl Box3 {
    pub fn corners(&self) -> [Vector3<f64>; 8] {
        let mut out = [Vector3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            *c = self.center + self.half_extents.component_mul(&Vector3::new(sx, sy, sz));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub frame: usize,
    pub center: [f64; 3],
}

/// Interval during which an object rides along with an arm's end effector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grasp {
    pub arm: ArmId,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectScript {
    pub id: String,
    pub description: String,
    pub half_extents: [f64; 3],
    /// Piecewise-linear center path; held constant outside the keyed range.
    pub keyframes: Vec<Keyframe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grasp: Option<Grasp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmScript {
    pub arm: ArmId,
    pub chain: DhChain,
    /// Joint waypoints spread evenly over the episode.
    pub waypoints: Vec<JointVector>,
    /// Uniform per-joint noise (radians) added to every waypoint.
    #[serde(default)]
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTemplate {
    pub seed: u64,
    pub task_id: u32,
    pub task_label: String,
    pub frame_count: usize,
    pub arms: Vec<ArmScript>,
    pub calibs: Vec<CameraCalib>,
    pub objects: Vec<ObjectScript>,
    /// Chance that an episode is scripted as a failure (object never moves).
    #[serde(default)]
    pub failure_probability: f64,
    /// Trail parameters; canvas size and frame count come from the calibs and `frame_count`.
    #[serde(default)]
    pub trail: TrajVideoSpec,
}

impl SceneTemplate {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.frame_count == 0 {
            return bad("frame_count must be at least 1".into());
        }
        if self.objects.len() < 2 {
            return bad(format!("a scene needs at least two objects, found {}", self.objects.len()));
        }
        if self.arms.is_empty() {
            return bad("a scene needs at least one arm".into());
        }
        if self.calibs.is_empty() {
            return bad("a scene needs at least one view".into());
        }
        if !(0.0..=1.0).contains(&self.failure_probability) {
            return bad("failure_probability must lie in [0, 1]".into());
        }
        for (v, c) in self.calibs.iter().enumerate() {
            let issues = validate_calib(c);
            if let Some(issue) = issues.first() {
                return bad(format!("view {}: {issue}", v + 1));
            }
            if (c.width, c.height) != (self.calibs[0].width, self.calibs[0].height) {
                return bad(format!("view {}: image size differs from view 1", v + 1));
            }
        }
        for arm in &self.arms {
            arm.chain.validate()?;
            if arm.waypoints.is_empty() {
                return bad(format!("{} arm has no waypoints", arm.arm));
            }
            if let Some(w) = arm.waypoints.iter().find(|w| w.len() != arm.chain.dof()) {
                return bad(format!(
                    "{} arm waypoint has {} joints, chain has {}",
                    arm.arm,
                    w.len(),
                    arm.chain.dof()
                ));
            }
        }
        for obj in &self.objects {
            if obj.keyframes.is_empty() {
                return bad(format!("object {} has no keyframes", obj.id));
            }
            if obj.half_extents.iter().any(|&h| !(h > 0.0)) {
                return bad(format!("object {} has non-positive extents", obj.id));
            }
            if let Some(g) = obj.grasp {
                if g.start > g.end || g.end >= self.frame_count {
                    return bad(format!("object {} grasp interval is out of range", obj.id));
                }
                if !self.arms.iter().any(|a| a.arm == g.arm) {
                    return bad(format!("object {} is grasped by missing {} arm", obj.id, g.arm));
                }
            }
        }
        let mut ids: Vec<_> = self.objects.iter().map(|o| &o.id).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != self.objects.len() {
            return bad("object ids must be unique".into());
        }
        Ok(())
    }

    pub fn trail_spec(&self) -> TrajVideoSpec {
        TrajVideoSpec {
            width: self.calibs[0].width,
            height: self.calibs[0].height,
            frame_count: self.frame_count,
            ..self.trail.clone()
        }
    }

    /// Reads either a single template or a JSON list of templates.
    pub fn load_many(path: &Path) -> Result<Vec<SceneTemplate>> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            Many(Vec<SceneTemplate>),
            One(Box<SceneTemplate>),
        }
        Ok(match read_json::<OneOrMany>(path)? {
            OneOrMany::Many(v) => v,
            OneOrMany::One(t) => vec![*t],
        })
    }
}

/// Six-link desk-scale arm used by the built-in templates.
pub fn desk_arm_chain(base: Pose) -> DhChain {
    DhChain {
        base,
        rows: vec![
            DhRow::new(0.0, FRAC_PI_2, 0.12, 0.0),
            DhRow::new(0.22, 0.0, 0.0, 0.0),
            DhRow::new(0.20, 0.0, 0.0, 0.0),
            DhRow::new(0.0, FRAC_PI_2, 0.0, FRAC_PI_2),
            DhRow::new(0.0, -FRAC_PI_2, 0.06, 0.0),
            DhRow::new(0.0, 0.0, 0.05, 0.0),
        ],
    }
}

/// Labels of the fifteen built-in tabletop tasks, in task-id order.
pub const BUILTIN_TASKS: [&str; 15] = [
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

const OBJECT_NAMES: [&str; 6] = [
    "the red block",
    "the blue plate",
    "the green cup",
    "the yellow bread",
    "the purple toy",
    "the orange bottle",
];

/// Two-arm, two-view tabletop template for built-in task `task_id` (1-based).
pub fn builtin_template(task_id: u32, seed: u64) -> Result<SceneTemplate> {
    let label = BUILTIN_TASKS
        .get((task_id as usize).wrapping_sub(1))
        .ok_or_else(|| Error::InvalidParameter(format!("no built-in task {task_id}")))?;
    let frame_count = crate::DEFAULT_FRAME_COUNT;
    let variant = (task_id - 1) as f64;

    let mut arms = Vec::new();
    for (arm, side) in [(ArmId::Left, 1.0), (ArmId::Right, -1.0)] {
        let base = Pose::from_translation(Vector3::new(0.0, 0.3 * side, 0.0));
        let chain = desk_arm_chain(base);
        let swing = side * (0.35 + 0.02 * variant);
        let home = vec![-side * 0.5, 0.9, -1.6, 0.2, 0.0, 0.0];
        let reach = vec![-side * 0.5 + swing * 0.4, 0.5, -1.4, 0.4, 0.1, 0.0];
        let lift = vec![-side * 0.5 + swing, 0.8, -1.5, 0.3, -0.1, 0.3];
        let place = vec![-side * 0.5 + swing * 1.6, 0.55, -1.35, 0.35, 0.0, 0.0];
        arms.push(ArmScript {
            arm,
            chain,
            waypoints: [home.clone(), reach, lift, place, home].into_iter().map(JointVector).collect(),
            jitter: 0.08,
        });
    }

    let target = Vector3::new(0.25, 0.0, 0.08);
    let (w, h) = (crate::DEFAULT_WIDTH, crate::DEFAULT_HEIGHT);
    let calibs = vec![
        CameraCalib::look_at(Vector3::new(1.1, 0.0, 0.75), target, Vector3::z(), 320.0, w, h)?,
        CameraCalib::look_at(Vector3::new(0.45, 1.0, 0.6), target, Vector3::z(), 300.0, w, h)?,
    ];

    // The grasped object starts under the left end effector at the grasp frame.
    let grasp = Grasp {
        arm: ArmId::Left,
        start: 20,
        end: 55,
    };
    let left = &arms[0];
    let reach_ee = ee_positions(&left.chain, &interpolate_waypoints(&left.waypoints, frame_count))?[grasp.start];
    let a = (task_id as usize) % OBJECT_NAMES.len();
    let b = (task_id as usize + 2) % OBJECT_NAMES.len();
    let objects = vec![
        ObjectScript {
            id: "obj0".into(),
            description: OBJECT_NAMES[a].into(),
            half_extents: [0.025, 0.025, 0.02],
            keyframes: vec![Keyframe {
                frame: 0,
                center: [reach_ee.x, reach_ee.y, 0.02],
            }],
            grasp: Some(grasp),
        },
        ObjectScript {
            id: "obj1".into(),
            description: OBJECT_NAMES[b].into(),
            half_extents: [0.04, 0.04, 0.01],
            keyframes: vec![Keyframe {
                frame: 0,
                center: [0.3 + 0.01 * variant, -0.12, 0.01],
            }],
            grasp: None,
        },
    ];

    Ok(SceneTemplate {
        seed,
        task_id,
        task_label: label.to_string(),
        frame_count,
        arms,
        calibs,
        objects,
        failure_probability: 0.2,
        trail: TrajVideoSpec::default(),
    })
}

/// All fifteen built-in templates; task `k` gets seed `seed + k − 1`.
pub fn builtin_templates(seed: u64) -> Result<Vec<SceneTemplate>> {
    (1..=BUILTIN_TASKS.len() as u32)
        .map(|k| builtin_template(k, seed.wrapping_add(k as u64 - 1)))
        .collect()
}

/// Linear interpolation between waypoints spread evenly over `frames` frames.
pub fn interpolate_waypoints(waypoints: &[JointVector], frames: usize) -> Vec<JointVector> {
    let segments = waypoints.len().saturating_sub(1);
    (0..frames)
        .map(|t| {
            if segments == 0 || frames == 1 {
                return waypoints[0].clone();
            }
            let s = t as f64 * segments as f64 / (frames - 1) as f64;
            let i = (s.floor() as usize).min(segments - 1);
            let f = s - i as f64;
            let (a, b) = (&waypoints[i].0, &waypoints[i + 1].0);
            JointVector(a.iter().zip(b).map(|(x, y)| x + (y - x) * f).collect())
        })
        .collect()
}

fn keyframe_center(keys: &[Keyframe], t: usize) -> Vector3<f64> {
    let mut sorted = keys.to_vec();
    sorted.sort_by_key(|k| k.frame);
    let first = sorted[0];
    if t <= first.frame {
        return Vector3::from(first.center);
    }
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if t <= b.frame {
            let f = (t - a.frame) as f64 / (b.frame - a.frame).max(1) as f64;
            return Vector3::from(a.center).lerp(&Vector3::from(b.center), f);
        }
    }
    Vector3::from(sorted[sorted.len() - 1].center)
}

/// Ground-truth mask: pixel bounding box of the box's projected corners.
///
/// Pixel `(x, y)` is covered when its center `(x, y)` lies inside
/// `[u_min, u_max] × [v_min, v_max]`, clipped to the canvas. Corners at or
/// behind the camera are ignored; a box entirely behind gives an empty mask.
pub fn render_gt_mask(calib: &CameraCalib, bx: &Box3) -> Result<Mask> {
    let mut mask = Mask::new(calib.width, calib.height)?;
    let mut bounds: Option<(f64, f64, f64, f64)> = None;
    for corner in bx.corners() {
        let p_c = world_to_camera(calib, &corner)?;
        if p_c.z <= MIN_DEPTH {
            continue;
        }
        let p = project(calib, &p_c);
        let (umin, umax, vmin, vmax) = bounds.get_or_insert((p.u, p.u, p.v, p.v));
        *umin = umin.min(p.u);
        *umax = umax.max(p.u);
        *vmin = vmin.min(p.v);
        *vmax = vmax.max(p.v);
    }
    let Some((umin, umax, vmin, vmax)) = bounds else {
        return Ok(mask);
    };
    let clamp = |x: f64, limit: u32| x.clamp(-1.0, limit as f64 + 1.0) as i64;
    mask.fill_rect(
        clamp(umin.ceil(), calib.width),
        clamp(vmin.ceil(), calib.height),
        clamp(umax.floor(), calib.width) + 1,
        clamp(vmax.floor(), calib.height) + 1,
    );
    Ok(mask)
}

/// Translates every mask by `(dx, dy)` pixels, clipping at the borders.
pub fn perturb_masks(seq: &MaskSequence, dx: i64, dy: i64) -> MaskSequence {
    MaskSequence::new(seq.frames().iter().map(|m| m.translate(dx, dy)).collect())
        .expect("translation preserves sequence shape")
}

/// Everything generated for one episode, in memory.
#[derive(Debug, Clone)]
pub struct Episode {
    pub episode_id: String,
    pub template: SceneTemplate,
    pub success: bool,
    /// Per arm, one joint vector per frame.
    pub joints: Vec<(ArmId, Vec<JointVector>)>,
    /// Per arm, end-effector position per frame.
    pub ee: Vec<(ArmId, Vec<Vector3<f64>>)>,
    /// Per object, box per frame.
    pub boxes: Vec<Vec<Box3>>,
    /// `gt_masks[view][object]`.
    pub gt_masks: Vec<Vec<MaskSequence>>,
    /// `tracks[view]`, one track per arm.
    pub tracks: Vec<Vec<PixelTrack>>,
    /// `traj_frames[view]`.
    pub traj_frames: Vec<Vec<Frame>>,
}

impl Episode {
    pub fn view_name(v: usize) -> String {
        format!("view{}", v + 1)
    }

    /// Initial-frame foreground prior of view `v`.
    pub fn initial_mask(&self, v: usize) -> Result<Mask> {
        initial_frame_prior(&self.gt_masks[v])
    }
}

pub fn simulate(template: &SceneTemplate, episode_id: &str) -> Result<Episode> {
    template.validate()?;
    let t_total = template.frame_count;
    let mut rng = ChaCha8Rng::seed_from_u64(template.seed);
    let success = !rng.random_bool(template.failure_probability);

    let mut joints = Vec::new();
    let mut ee = Vec::new();
    for arm in &template.arms {
        let waypoints: Vec<JointVector> = arm
            .waypoints
            .iter()
            .map(|w| JointVector(w.0.iter().map(|q| q + arm.jitter * rng.random_range(-1.0..=1.0)).collect()))
            .collect();
        let q = interpolate_waypoints(&waypoints, t_total);
        ee.push((arm.arm, ee_positions(&arm.chain, &q)?));
        joints.push((arm.arm, q));
    }

    let boxes: Vec<Vec<Box3>> = template
        .objects
        .iter()
        .map(|obj| {
            let half_extents = Vector3::from(obj.half_extents);
            (0..t_total)
                .map(|t| {
                    let center = if !success {
                        keyframe_center(&obj.keyframes, 0)
                    } else {
                        let mut c = keyframe_center(&obj.keyframes, t);
                        if let Some(g) = obj.grasp {
                            if t > g.start {
                                let path = &ee.iter().find(|(a, _)| *a == g.arm).expect("validated").1;
                                c += path[t.min(g.end)] - path[g.start];
                            }
                        }
                        c
                    };
                    Box3 { center, half_extents }
                })
                .collect()
        })
        .collect();

    let gt_masks = template
        .calibs
        .iter()
        .map(|calib| {
            boxes
                .iter()
                .map(|per_frame| {
                    MaskSequence::new(per_frame.iter().map(|b| render_gt_mask(calib, b)).collect::<Result<_>>()?)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let tracks: Vec<Vec<PixelTrack>> = template
        .calibs
        .iter()
        .map(|calib| ee.iter().map(|(arm, pts)| track_from_trajectory(calib, pts, *arm)).collect())
        .collect();
    let initial_masks = gt_masks.iter().map(|objs| initial_frame_prior(objs)).collect::<Result<Vec<_>>>()?;
    let traj_frames = synth_trajectory_video(&tracks, &initial_masks, &template.trail_spec())?;

    Ok(Episode {
        episode_id: episode_id.to_string(),
        template: template.clone(),
        success,
        joints,
        ee,
        boxes,
        gt_masks,
        tracks,
        traj_frames,
    })
}

/// Joint trajectories of all arms, as stored in `joints.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointsFile {
    pub frames: usize,
    pub arms: Vec<ArmJoints>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmJoints {
    pub arm: ArmId,
    pub joints: Vec<JointVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmEntry {
    pub arm: ArmId,
    pub chain: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub id: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub view: String,
    pub calib: PathBuf,
    /// RGB frames, when the episode has them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<PathBuf>,
    pub traj: PathBuf,
    /// Mask directory per object id.
    pub masks: Vec<(String, PathBuf)>,
}

/// `manifest.json`; paths are relative to the episode directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeManifest {
    pub episode_id: String,
    pub task_id: u32,
    pub task_label: String,
    pub success: bool,
    pub seed: u64,
    pub frames: usize,
    pub joints: PathBuf,
    pub arms: Vec<ArmEntry>,
    pub objects: Vec<ObjectEntry>,
    pub views: Vec<ViewEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const GT_MASK_DIR: &str = "gt_masks";
pub const PRED_MASK_DIR: &str = "pred_masks";

impl EpisodeManifest {
    pub fn load(episode_dir: &Path) -> Result<Self> {
        read_json(&episode_dir.join(MANIFEST_FILE))
    }

    /// Relative paths that should exist under the episode directory.
    pub fn referenced_paths(&self) -> Vec<&Path> {
        let mut out = vec![self.joints.as_path()];
        out.extend(self.arms.iter().map(|a| a.chain.as_path()));
        for v in &self.views {
            out.push(&v.calib);
            out.push(&v.traj);
            out.extend(v.frames.as_deref());
            out.extend(v.masks.iter().map(|(_, p)| p.as_path()));
        }
        out
    }
}

/// Writes the episode tree under `root/<episode_id>` and returns its manifest.
pub fn write_episode(episode: &Episode, root: &Path) -> Result<EpisodeManifest> {
    write_episode_with_masks(episode, root, GT_MASK_DIR, |_, _, seq| seq.clone())
}

/// Like [`write_episode`], but stores `transform(view, object, gt)` under
/// `mask_dir` instead of the ground truth. Used to build prediction trees.
pub fn write_episode_with_masks(
    episode: &Episode,
    root: &Path,
    mask_dir: &str,
    transform: impl Fn(usize, usize, &MaskSequence) -> MaskSequence,
) -> Result<EpisodeManifest> {
    let dir = root.join(&episode.episode_id);
    let template = &episode.template;
    let spec = template.trail_spec();

    let joints = JointsFile {
        frames: template.frame_count,
        arms: episode
            .joints
            .iter()
            .map(|(arm, q)| ArmJoints {
                arm: *arm,
                joints: q.clone(),
            })
            .collect(),
    };
    write_json(&dir.join("joints.json"), &joints)?;

    let mut arms = Vec::new();
    for arm in &template.arms {
        let rel = PathBuf::from("arms").join(format!("{}.json", arm.arm));
        write_json(&dir.join(&rel), &arm.chain)?;
        arms.push(ArmEntry { arm: arm.arm, chain: rel });
    }

    let mut views = Vec::new();
    for (v, calib) in template.calibs.iter().enumerate() {
        let name = Episode::view_name(v);
        let calib_rel = PathBuf::from(&name).join("calib.json");
        write_json(&dir.join(&calib_rel), calib)?;
        let mut masks = Vec::new();
        for (o, obj) in template.objects.iter().enumerate() {
            let rel = PathBuf::from(&name).join(mask_dir).join(&obj.id);
            transform(v, o, &episode.gt_masks[v][o]).save_dir(&dir.join(&rel))?;
            masks.push((obj.id.clone(), rel));
        }
        let traj_rel = PathBuf::from(&name).join("traj");
        write_view_frames(&dir.join(&traj_rel), &name, &episode.traj_frames[v], &spec)?;
        views.push(ViewEntry {
            view: name,
            calib: calib_rel,
            frames: None,
            traj: traj_rel,
            masks,
        });
    }

    let manifest = EpisodeManifest {
        episode_id: episode.episode_id.clone(),
        task_id: template.task_id,
        task_label: template.task_label.clone(),
        success: episode.success,
        seed: template.seed,
        frames: template.frame_count,
        joints: PathBuf::from("joints.json"),
        arms,
        objects: template
            .objects
            .iter()
            .map(|o| ObjectEntry {
                id: o.id.clone(),
                description: o.description.clone(),
            })
            .collect(),
        views,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Simulates and writes one episode.
pub fn generate_episode(template: &SceneTemplate, episode_id: &str, root: &Path) -> Result<EpisodeManifest> {
    write_episode(&simulate(template, episode_id)?, root)
}

/// Description client that names every scripted object of a template.
pub struct SceneDescriptionClient {
    objects: Vec<ObjectDescription>,
}

impl SceneDescriptionClient {
    pub fn new(template: &SceneTemplate) -> Result<Self> {
        let objects = template
            .objects
            .iter()
            .map(|o| ObjectDescription::new(o.id.clone(), o.description.clone()))
            .collect::<Result<_>>()?;
        Ok(Self { objects })
    }
}

impl DescriptionClient for SceneDescriptionClient {
    fn describe(&self, _image: &Frame) -> Result<Vec<ObjectDescription>> {
        Ok(self.objects.clone())
    }
}

/// Segmentation oracle returning the analytic masks of one view.
pub struct SceneSegmentationClient {
    objects: Vec<(String, MaskSequence)>,
}

impl SceneSegmentationClient {
    pub fn new(episode: &Episode, view: usize) -> Self {
        let objects = episode
            .template
            .objects
            .iter()
            .zip(&episode.gt_masks[view])
            .map(|(o, seq)| (o.id.clone(), seq.clone()))
            .collect();
        Self { objects }
    }
}

impl SegmentationClient for SceneSegmentationClient {
    fn segment(&self, frames: &[Frame], desc: &ObjectDescription) -> Result<Vec<Option<Mask>>> {
        let (_, seq) = self
            .objects
            .iter()
            .find(|(id, _)| *id == desc.object_id)
            .ok_or(Error::NoObjectsFound)?;
        Ok((0..frames.len()).map(|t| seq.frames().get(t).cloned()).collect())
    }
}
