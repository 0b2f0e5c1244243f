//! Subcommand implementations. Each `cmd_*` function takes resolved inputs
//! (flags already merged with the run config) and returns what it produced.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mtv_core::camera::{project_world, track_from_trajectory, CameraCalib, PixelPoint};
use mtv_core::error::{read_json, write_json};
use mtv_core::evalcore::{
    aggregate, jaccard_video_objects, progress_curve, rank_tasks, render_progress, render_ranking, render_report,
    write_scores, EvalReport, ReportFormat, VideoScore,
};
use mtv_core::kinematics::{ee_positions, forward_kinematics, DhChain, JointVector};
use mtv_core::latentgrid::{round_trip_check, BlockShape, RoundTripReport};
use mtv_core::maskio::{
    describe_objects, initial_frame_prior, load_mask, segment_video, DescriptionClient, Mask, MaskSequence,
    RemoteConfig, SegmentationClient,
};
use mtv_core::synthscene::{
    builtin_templates, perturb_masks, simulate, write_episode, write_episode_with_masks, EpisodeManifest,
    JointsFile, SceneTemplate, GT_MASK_DIR, MANIFEST_FILE, PRED_MASK_DIR,
};
use mtv_core::trajvideo::{read_view_frames, synth_trajectory_video, write_view_frames, ArmId, Frame, TrajVideoSpec};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{CliError, CliResult, Context};

/// Latent block shape used by `latent-check`: 16 channels at 1/8 of the default canvas.
pub const LATENT_BLOCK: BlockShape = BlockShape {
    channels: 16,
    height: 36,
    width: 48,
};

#[derive(Deserialize)]
#[serde(untagged)]
enum JointsInput {
    Trajectory(Vec<Vec<f64>>),
    Single(Vec<f64>),
}

/// End-effector position for every joint vector in `joints_file`.
pub fn cmd_fk(chain_file: &Path, joints_file: &Path) -> CliResult<Vec<[f64; 3]>> {
    let chain = DhChain::load(chain_file).input_err(format!("chain {}", chain_file.display()))?;
    let joints: JointsInput = read_json(joints_file).input_err("")?;
    let trajectory: Vec<JointVector> = match joints {
        JointsInput::Trajectory(rows) => rows.into_iter().map(JointVector).collect(),
        JointsInput::Single(q) => vec![JointVector(q)],
    };
    for (t, q) in trajectory.iter().enumerate() {
        if q.len() != chain.dof() {
            return Err(CliError::input(format!(
                "joints[{t}]: expected {} angles, found {}",
                chain.dof(),
                q.len()
            )));
        }
        if let Some(j) = q.0.iter().position(|v| !v.is_finite()) {
            return Err(CliError::input(format!("joints[{t}][{j}]: not a finite number")));
        }
    }
    let positions = if trajectory.len() == 1 {
        vec![*forward_kinematics(&chain, &trajectory[0]).input_err("joints[0]")?.translation()]
    } else {
        ee_positions(&chain, &trajectory).input_err("joints")?
    };
    Ok(positions.iter().map(|p| [p.x, p.y, p.z]).collect())
}

/// Pixel coordinates of every world point in `points_file`.
pub fn cmd_project(calib_file: &Path, points_file: &Path) -> CliResult<Vec<PixelPoint>> {
    let calib = CameraCalib::load(calib_file).input_err(format!("calib {}", calib_file.display()))?;
    let points: Vec<[f64; 3]> = read_json(points_file).input_err("")?;
    points
        .iter()
        .enumerate()
        .map(|(i, p)| project_world(&calib, &Vector3::from(*p)).input_err(format!("points[{i}]")))
        .collect()
}

/// Prediction tree written next to the ground truth by `synth-scene`.
#[derive(Debug, Clone)]
pub struct PredTree {
    pub root: PathBuf,
    pub dx: i64,
    pub dy: i64,
}

pub fn episode_id(index: usize) -> String {
    format!("ep{index:04}")
}

/// Generates `n_episodes` episodes under `out`. Episode `i` uses template
/// `i mod len` with seed `base + i`, where `base` is `seed` if given and the
/// template's own seed otherwise. Without a template file the fifteen
/// built-in tasks are used.
pub fn cmd_synth_scene(
    template_file: Option<&Path>,
    n_episodes: usize,
    seed: Option<u64>,
    out: &Path,
    pred: Option<&PredTree>,
) -> CliResult<Vec<EpisodeManifest>> {
    if n_episodes == 0 {
        return Ok(Vec::new());
    }
    let templates = match template_file {
        Some(path) => SceneTemplate::load_many(path).input_err(format!("template {}", path.display()))?,
        None => builtin_templates(0).input_err("built-in templates")?,
    };
    if templates.is_empty() {
        return Err(CliError::input("template file holds no templates"));
    }
    for (i, t) in templates.iter().enumerate() {
        t.validate().input_err(format!("template {i} ({})", t.task_label))?;
    }
    (0..n_episodes)
        .into_par_iter()
        .map(|i| {
            let mut template = templates[i % templates.len()].clone();
            let base = seed.unwrap_or(template.seed);
            template.seed = base.wrapping_add(i as u64);
            let id = episode_id(i);
            let episode = simulate(&template, &id).runtime_err(&id)?;
            let manifest = write_episode(&episode, out).runtime_err(&id)?;
            if let Some(p) = pred {
                write_episode_with_masks(&episode, &p.root, PRED_MASK_DIR, |_, _, seq| {
                    perturb_masks(seq, p.dx, p.dy)
                })
                .runtime_err(&id)?;
            }
            Ok(manifest)
        })
        .collect()
}

/// Inputs for rendering trajectory videos outside an episode tree.
#[derive(Debug, Clone, Default)]
pub struct TrajInputs {
    pub chains: BTreeMap<ArmId, PathBuf>,
    pub joints: PathBuf,
    pub calibs: Vec<PathBuf>,
    /// Initial-frame masks per view; missing views get an empty prior.
    pub masks: Vec<PathBuf>,
}

pub enum TrajSource {
    /// Re-render every episode found under this root.
    Episodes(PathBuf),
    Explicit(TrajInputs),
}

/// Directory written for one view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajOutput {
    pub episode: Option<String>,
    pub view: String,
    pub dir: PathBuf,
    pub frames: usize,
}

fn load_calib(view: &str, path: &Path) -> CliResult<CameraCalib> {
    if !path.exists() {
        return Err(CliError::input(format!("{view}: calibration file {} is missing", path.display())));
    }
    CameraCalib::load(path).input_err(format!("{view}: calibration {}", path.display()))
}

fn render_views(
    chains: &[(ArmId, DhChain)],
    joints: &JointsFile,
    calibs: &[(String, CameraCalib)],
    priors: Vec<Option<Mask>>,
    trail: &TrajVideoSpec,
) -> CliResult<Vec<Vec<Frame>>> {
    let (w, h) = (calibs[0].1.width, calibs[0].1.height);
    if let Some((view, _)) = calibs.iter().find(|(_, c)| (c.width, c.height) != (w, h)) {
        return Err(CliError::input(format!("{view}: image size differs from {}", calibs[0].0)));
    }
    let spec = TrajVideoSpec {
        width: w,
        height: h,
        frame_count: joints.frames,
        ..trail.clone()
    };
    let mut ee = Vec::new();
    for (arm, chain) in chains {
        let q = &joints
            .arms
            .iter()
            .find(|a| a.arm == *arm)
            .ok_or_else(|| CliError::input(format!("joints: no trajectory for the {arm} arm")))?
            .joints;
        if q.len() != joints.frames {
            return Err(CliError::input(format!(
                "joints.{arm}: {} frames, header says {}",
                q.len(),
                joints.frames
            )));
        }
        ee.push((*arm, ee_positions(chain, q).input_err(format!("joints.{arm}"))?));
    }
    let tracks: Vec<_> = calibs
        .iter()
        .map(|(_, calib)| ee.iter().map(|(arm, p)| track_from_trajectory(calib, p, *arm)).collect())
        .collect();
    let masks = priors
        .into_iter()
        .zip(calibs)
        .map(|(m, (view, _))| match m {
            Some(m) if m.dims() != (w, h) => Err(CliError::input(format!(
                "{view}: initial mask is {}x{}, canvas is {w}x{h}",
                m.width(),
                m.height()
            ))),
            Some(m) => Ok(m),
            None => Mask::new(w, h).input_err(view),
        })
        .collect::<CliResult<Vec<_>>>()?;
    synth_trajectory_video(&tracks, &masks, &spec).runtime_err("render")
}

/// Episode directories (those holding a manifest) under `root`, by name.
pub fn list_episodes(root: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    let entries = std::fs::read_dir(root).input_err(root.display())?;
    let mut out: Vec<(String, PathBuf)> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(MANIFEST_FILE).is_file())
        .filter_map(|p| Some((p.file_name()?.to_str()?.to_string(), p)))
        .collect();
    out.sort();
    Ok(out)
}

fn episode_priors(dir: &Path, manifest: &EpisodeManifest) -> CliResult<Vec<Option<Mask>>> {
    manifest
        .views
        .iter()
        .map(|v| {
            let firsts = v
                .masks
                .iter()
                .map(|(obj, rel)| {
                    let seq = MaskSequence::load_dir(&dir.join(rel))
                        .input_err(format!("{} {}: masks of {obj}", manifest.episode_id, v.view))?;
                    Ok(seq)
                })
                .collect::<CliResult<Vec<_>>>()?;
            if firsts.is_empty() {
                return Ok(None);
            }
            initial_frame_prior(&firsts)
                .map(Some)
                .input_err(format!("{} {}", manifest.episode_id, v.view))
        })
        .collect()
}

fn synth_traj_episode(id: &str, dir: &Path, out_dir: &Path, trail: &TrajVideoSpec) -> CliResult<Vec<TrajOutput>> {
    let manifest = EpisodeManifest::load(dir).input_err(id)?;
    if manifest.views.is_empty() {
        return Err(CliError::input(format!("{id}: manifest lists no views")));
    }
    let joints: JointsFile = read_json(&dir.join(&manifest.joints)).input_err(id)?;
    let chains = manifest
        .arms
        .iter()
        .map(|a| Ok((a.arm, DhChain::load(&dir.join(&a.chain)).input_err(format!("{id} {} arm", a.arm))?)))
        .collect::<CliResult<Vec<_>>>()?;
    let calibs = manifest
        .views
        .iter()
        .map(|v| Ok((v.view.clone(), load_calib(&format!("{id} {}", v.view), &dir.join(&v.calib))?)))
        .collect::<CliResult<Vec<_>>>()?;
    let priors = episode_priors(dir, &manifest)?;
    let videos = render_views(&chains, &joints, &calibs, priors, trail).map_err(|e| CliError {
        message: format!("{id}: {}", e.message),
        ..e
    })?;
    let spec = TrajVideoSpec {
        width: calibs[0].1.width,
        height: calibs[0].1.height,
        frame_count: joints.frames,
        ..trail.clone()
    };
    manifest
        .views
        .iter()
        .zip(videos)
        .map(|(v, frames)| {
            let target = out_dir.join(&v.traj);
            write_view_frames(&target, &v.view, &frames, &spec).runtime_err(format!("{id} {}", v.view))?;
            Ok(TrajOutput {
                episode: Some(id.to_string()),
                view: v.view.clone(),
                dir: target,
                frames: frames.len(),
            })
        })
        .collect()
}

/// Renders trajectory videos. Episode trees are rendered in place unless
/// `out` names another root; explicit inputs go to `out/view<k>/traj`.
pub fn cmd_synth_traj(source: &TrajSource, out: Option<&Path>, trail: &TrajVideoSpec) -> CliResult<Vec<TrajOutput>> {
    trail.validate().input_err("trail")?;
    match source {
        TrajSource::Episodes(root) => {
            let episodes = list_episodes(root)?;
            let per_episode = episodes
                .par_iter()
                .map(|(id, dir)| synth_traj_episode(id, dir, &out.unwrap_or(root).join(id), trail))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(per_episode.into_iter().flatten().collect())
        }
        TrajSource::Explicit(inputs) => {
            let out = out.ok_or_else(|| CliError::input("synth-traj needs --out for explicit inputs"))?;
            if inputs.chains.is_empty() {
                return Err(CliError::input("no DH chains given (--chain <arm>=<file>)"));
            }
            if inputs.calibs.is_empty() {
                return Err(CliError::input("no calibrations given (--calib <file>)"));
            }
            if inputs.masks.len() > inputs.calibs.len() {
                return Err(CliError::input(format!(
                    "{} masks given for {} views",
                    inputs.masks.len(),
                    inputs.calibs.len()
                )));
            }
            let chains = inputs
                .chains
                .iter()
                .map(|(arm, p)| Ok((*arm, DhChain::load(p).input_err(format!("chain for the {arm} arm"))?)))
                .collect::<CliResult<Vec<_>>>()?;
            let joints: JointsFile = read_json(&inputs.joints).input_err("")?;
            let calibs = inputs
                .calibs
                .iter()
                .enumerate()
                .map(|(v, p)| {
                    let view = format!("view{}", v + 1);
                    let calib = load_calib(&view, p)?;
                    Ok((view, calib))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let priors = (0..calibs.len())
                .map(|v| {
                    inputs
                        .masks
                        .get(v)
                        .map(|p| load_mask(p).input_err(format!("view{}", v + 1)))
                        .transpose()
                })
                .collect::<CliResult<Vec<_>>>()?;
            let videos = render_views(&chains, &joints, &calibs, priors, trail)?;
            let spec = TrajVideoSpec {
                width: calibs[0].1.width,
                height: calibs[0].1.height,
                frame_count: joints.frames,
                ..trail.clone()
            };
            calibs
                .iter()
                .zip(videos)
                .map(|((view, _), frames)| {
                    let dir = out.join(view).join("traj");
                    write_view_frames(&dir, view, &frames, &spec).runtime_err(view)?;
                    Ok(TrajOutput {
                        episode: None,
                        view: view.clone(),
                        dir,
                        frames: frames.len(),
                    })
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub pred: PathBuf,
    pub gt: PathBuf,
    pub out: PathBuf,
    pub format: ReportFormat,
    pub bins: Option<usize>,
    /// Evaluate only the first `views` views of each episode.
    pub views: Option<usize>,
    /// Segment RGB frames with the remote backends instead of reading mask trees.
    pub remote: Option<RemoteConfig>,
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub scores: Vec<VideoScore>,
    pub report: EvalReport,
    pub files: Vec<PathBuf>,
}

pub const SCORES_FILE: &str = "scores.jsonl";
pub const PROGRESS_FILE: &str = "progress.csv";

pub fn report_file(format: ReportFormat) -> String {
    format!("report.{}", format.extension())
}

pub fn ranking_file(view: &str, format: ReportFormat) -> String {
    format!("ranking_{view}.{}", format.extension())
}

fn pred_mask_dir(pred_dir: &Path, pred_manifest: Option<&EpisodeManifest>, view: &str, obj: &str) -> PathBuf {
    if let Some(entry) = pred_manifest
        .and_then(|m| m.views.iter().find(|v| v.view == view))
        .and_then(|v| v.masks.iter().find(|(o, _)| o == obj))
    {
        return pred_dir.join(&entry.1);
    }
    let pred = pred_dir.join(view).join(PRED_MASK_DIR).join(obj);
    if pred.is_dir() {
        pred
    } else {
        pred_dir.join(view).join(GT_MASK_DIR).join(obj)
    }
}

struct Unit<'a> {
    id: &'a str,
    gt_dir: &'a Path,
    pred_dir: PathBuf,
    gt: &'a EpisodeManifest,
    pred: Option<&'a EpisodeManifest>,
    view: usize,
}

fn score_from_masks(u: &Unit) -> CliResult<VideoScore> {
    let view = &u.gt.views[u.view];
    let ctx = format!("{} {}", u.id, view.view);
    let mut preds = Vec::new();
    let mut gts = Vec::new();
    for (obj, rel) in &view.masks {
        gts.push(MaskSequence::load_dir(&u.gt_dir.join(rel)).input_err(format!("{ctx}: ground truth of {obj}"))?);
        let dir = pred_mask_dir(&u.pred_dir, u.pred, &view.view, obj);
        if !dir.is_dir() {
            return Err(CliError::input(format!("{ctx}: no predicted masks for {obj}")));
        }
        preds.push(MaskSequence::load_dir(&dir).input_err(format!("{ctx}: prediction of {obj}"))?);
    }
    if gts.is_empty() {
        return Err(CliError::input(format!("{ctx}: manifest lists no objects")));
    }
    jaccard_video_objects(&preds, &gts, u.id, &view.view, u.gt.task_id).input_err(&ctx)
}

fn view_frames(dir: &Path, manifest: Option<&EpisodeManifest>, view: &str, ctx: &str) -> CliResult<Vec<Frame>> {
    let rel = manifest
        .and_then(|m| m.views.iter().find(|v| v.view == view))
        .and_then(|v| v.frames.clone())
        .unwrap_or_else(|| PathBuf::from(view).join("frames"));
    let path = dir.join(rel);
    if !path.is_dir() {
        return Err(CliError::input(format!(
            "{ctx}: remote segmentation needs RGB frames, {} is missing",
            path.display()
        )));
    }
    let frames = read_view_frames(&path).input_err(ctx)?;
    if frames.is_empty() {
        return Err(CliError::input(format!("{ctx}: {} holds no frames", path.display())));
    }
    Ok(frames)
}

fn score_remote(u: &Unit, vlm: &dyn DescriptionClient, rvos: &dyn SegmentationClient) -> CliResult<VideoScore> {
    let view = &u.gt.views[u.view].view;
    let ctx = format!("{} {view}", u.id);
    let gt_frames = view_frames(u.gt_dir, Some(u.gt), view, &ctx)?;
    let pred_frames = view_frames(&u.pred_dir, u.pred, view, &ctx)?;
    let objects = describe_objects(vlm, &gt_frames[0]).runtime_err(&ctx)?;
    let mut preds = Vec::new();
    let mut gts = Vec::new();
    for obj in &objects {
        gts.push(segment_video(rvos, &gt_frames, obj).runtime_err(&ctx)?.masks);
        preds.push(segment_video(rvos, &pred_frames, obj).runtime_err(&ctx)?.masks);
    }
    jaccard_video_objects(&preds, &gts, u.id, view, u.gt.task_id).input_err(&ctx)
}

/// Writes the report, one ranking per view and, with `bins`, the progress curve.
pub fn write_reports(
    scores: &[VideoScore],
    out: &Path,
    format: ReportFormat,
    bins: Option<usize>,
) -> CliResult<(EvalReport, Vec<PathBuf>)> {
    let report = aggregate(scores);
    let mut files = Vec::new();
    let mut write = |name: String, text: String| -> CliResult<()> {
        let path = out.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).runtime_err(parent.display())?;
        }
        std::fs::write(&path, text).runtime_err(path.display())?;
        files.push(path);
        Ok(())
    };
    write(report_file(format), render_report(&report, format))?;
    for view in report.views() {
        let ranking = rank_tasks(&report, &view).input_err("")?;
        write(ranking_file(&view, format), render_ranking(&report, &ranking, format))?;
    }
    if let Some(n) = bins {
        let curve = progress_curve(scores, n).input_err("--bins")?;
        write(PROGRESS_FILE.to_string(), render_progress(&curve))?;
    }
    Ok((report, files))
}

/// Scores every (episode, view) of the ground-truth tree against the
/// prediction tree and writes scores, report, rankings and progress curve.
pub fn cmd_eval(opts: &EvalOptions) -> CliResult<EvalOutput> {
    if opts.views == Some(0) {
        return Err(CliError::input("--views must be at least 1"));
    }
    let gt_episodes = list_episodes(&opts.gt)?;
    if gt_episodes.is_empty() {
        return Err(CliError::input(format!("no episodes found under {}", opts.gt.display())));
    }
    let missing: Vec<&str> = gt_episodes
        .iter()
        .filter(|(id, _)| !opts.pred.join(id).is_dir())
        .map(|(id, _)| id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::input(format!(
            "prediction tree {} is missing episodes: {}",
            opts.pred.display(),
            missing.join(", ")
        )));
    }
    let manifests = gt_episodes
        .iter()
        .map(|(id, dir)| {
            let gt = EpisodeManifest::load(dir).input_err(id)?;
            let pred_dir = opts.pred.join(id);
            let pred = if pred_dir.join(MANIFEST_FILE).is_file() {
                Some(EpisodeManifest::load(&pred_dir).input_err(format!("prediction {id}"))?)
            } else {
                None
            };
            Ok((id.as_str(), dir.as_path(), pred_dir, gt, pred))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut units = Vec::new();
    for (id, gt_dir, pred_dir, gt, pred) in &manifests {
        let n_views = opts.views.map_or(gt.views.len(), |v| v.min(gt.views.len()));
        for view in 0..n_views {
            units.push(Unit {
                id,
                gt_dir,
                pred_dir: pred_dir.clone(),
                gt,
                pred: pred.as_ref(),
                view,
            });
        }
    }
    let remote_clients = match &opts.remote {
        Some(cfg) => Some((
            cfg.description_client().input_err("remote")?,
            cfg.segmentation_client().input_err("remote")?,
        )),
        None => None,
    };
    let scores = units
        .par_iter()
        .map(|u| {
            let score = match &remote_clients {
                Some((vlm, rvos)) => score_remote(u, vlm, rvos)?,
                None => score_from_masks(u)?,
            };
            Ok(score.with_task_name(u.gt.task_label.clone()))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let scores_path = opts.out.join(SCORES_FILE);
    write_scores(&scores_path, &scores).runtime_err("")?;
    let (report, mut files) = write_reports(&scores, &opts.out, opts.format, opts.bins)?;
    files.insert(0, scores_path);
    Ok(EvalOutput { scores, report, files })
}

/// Rebuilds report, rankings and progress curve from a score dump.
pub fn cmd_report(
    scores_file: &Path,
    out: &Path,
    format: ReportFormat,
    bins: Option<usize>,
) -> CliResult<(EvalReport, Vec<PathBuf>)> {
    let scores = mtv_core::evalcore::read_scores(scores_file).input_err("")?;
    if scores.is_empty() {
        return Err(CliError::input(format!("{} holds no scores", scores_file.display())));
    }
    write_reports(&scores, out, format, bins)
}

/// Labeled assemble → strip and flatten → unflatten round trips. `corrupt`
/// swaps two stream blocks before unflattening.
pub fn cmd_latent_check(views: usize, frames: usize, corrupt: bool) -> CliResult<RoundTripReport> {
    let report = round_trip_check(views, frames, LATENT_BLOCK, |stream| {
        if corrupt {
            if stream.len() >= 2 {
                stream.swap(0, 1);
            } else {
                stream.clear();
            }
        }
    })
    .input_err("")?;
    Ok(report)
}

/// Writes `value` as pretty JSON to `out`, or returns it for stdout.
pub fn json_output<T: serde::Serialize>(value: &T, out: Option<&Path>) -> CliResult<Option<String>> {
    match out {
        Some(path) => {
            write_json(path, value).runtime_err("")?;
            Ok(None)
        }
        None => Ok(Some(serde_json::to_string_pretty(value).runtime_err("")?)),
    }
}
