//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances are fixed here.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use mtv_cli::commands::{cmd_eval, cmd_synth_scene, cmd_synth_traj, EvalOptions, PredTree, TrajSource};
use mtv_core::camera::{project, project_world, CameraCalib};
use mtv_core::evalcore::{aggregate, display_percent, jaccard_video, rank_tasks, FrameScore, ReportFormat, VideoScore};
use mtv_core::kinematics::{forward_kinematics, DhChain, JointVector};
use mtv_core::latentgrid::{assemble, flatten, labeled_inputs, strip_references, unflatten, BlockShape};
use mtv_core::maskio::MaskSequence;
use mtv_core::synthscene::{perturb_masks, EpisodeManifest, JointsFile};
use mtv_core::trajvideo::{read_view_frames, render_trail_frame, ArmId, PixelTrack, TrajVideoSpec};
use mtv_core::camera::PixelPoint;
use nalgebra::Vector3;
use rand::Rng;

const FK_TOL: f64 = 1e-9;
const FK_BUDGET: Duration = Duration::from_secs(5);
const PROJ_TOL_PX: f64 = 1e-9;
const PROJ_BUDGET: Duration = Duration::from_secs(5);
const LINE_TOL_PX: f64 = 1e-6;
const GOLDEN_TOL_LEVELS: f64 = 1.0;
const LATENT_BUDGET: Duration = Duration::from_secs(1);
const PIPELINE_BUDGET: Duration = Duration::from_secs(60);
const HEAD_TOL_PX: f64 = 1.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fk_oracle_equivalence() -> Outcome {
    let mut r = rng(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let chain = random_chain(&mut r, 6);
        let q = random_joints(&mut r, 6);
        let pose = forward_kinematics(&chain, &JointVector(q.clone())).unwrap();
        worst = worst.max(max_abs_diff(&pose_to_m4(&pose), &fk_oracle(&chain, &q)));
    }
    let elapsed = start.elapsed();
    outcome(
        worst < FK_TOL && elapsed < FK_BUDGET,
        format!("1000 chains, max entry error {worst:.2e} (tol {FK_TOL:e}), {elapsed:.2?}"),
    )
}

fn projection_contract() -> Outcome {
    let mut r = rng(2);
    let start = Instant::now();
    let (mut worst, mut worst_scale): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let calib = random_calib(&mut r);
        let p = random_point_in_front(&mut r, &calib);
        let got = project_world(&calib, &p).unwrap();
        let (u, v, _) = projection_oracle(&calib, &p);
        worst = worst.max((got.u - u).abs()).max((got.v - v).abs());
        let p_c = Vector3::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(0.1..5.0));
        let base = project(&calib, &p_c);
        for lambda in [0.5, 2.0, 10.0] {
            let s = project(&calib, &(p_c * lambda));
            worst_scale = worst_scale.max((s.u - base.u).abs()).max((s.v - base.v).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < PROJ_TOL_PX && worst_scale < PROJ_TOL_PX && elapsed < PROJ_BUDGET,
        format!("10000 pairs, max error {worst:.2e} px, scale error {worst_scale:.2e} px, {elapsed:.2?}"),
    )
}

fn line_preservation() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let mut lines = 0;
    for _ in 0..2000 {
        let calib = random_calib(&mut r);
        let z = r.random_range(0.2..5.0);
        let a = Vector3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), z);
        let d = Vector3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), 0.0);
        let pts: Vec<PixelPoint> = (0..16).map(|i| project(&calib, &(a + d * (i as f64 / 15.0)))).collect();
        let (p0, p1) = (pts[0], pts[15]);
        let (ex, ey) = (p1.u - p0.u, p1.v - p0.v);
        let len = (ex * ex + ey * ey).sqrt();
        if len < 1.0 {
            continue;
        }
        lines += 1;
        for p in &pts {
            worst = worst.max(((p.u - p0.u) * ey - (p.v - p0.v) * ex).abs() / len);
        }
    }
    outcome(
        worst < LINE_TOL_PX && lines > 1000,
        format!("{lines} lines, max residual {worst:.2e} px"),
    )
}

fn trail_golden() -> Outcome {
    let spec = TrajVideoSpec {
        trail_length: 4,
        width: 96,
        height: 32,
        frame_count: 4,
        ..TrajVideoSpec::default()
    };
    let track = PixelTrack {
        arm: ArmId::Right,
        points: (0..4)
            .map(|i| PixelPoint {
                u: 10.0 + 20.0 * i as f64,
                v: 16.0,
                visible: true,
            })
            .collect(),
    };
    let a = render_trail_frame(std::slice::from_ref(&track), 3, &spec).unwrap();
    let b = render_trail_frame(std::slice::from_ref(&track), 3, &spec).unwrap();
    let peaks: Vec<u8> = (0..4u32).rev().map(|i| a.get(10 + 20 * i, 16)[0]).collect();
    let ideal = [1.0, 0.75, 0.5, 0.25];
    let within = peaks
        .iter()
        .zip(ideal)
        .all(|(&p, w)| (p as f64 - 255.0 * w).abs() <= GOLDEN_TOL_LEVELS);
    outcome(
        within && a.as_raw() == b.as_raw(),
        format!("peaks {peaks:?} vs 255·(1, .75, .5, .25) ±{GOLDEN_TOL_LEVELS}, rerender identical: {}", a == b),
    )
}

fn analytic_jaccard() -> Outcome {
    let gt = MaskSequence::new(vec![rect_mask(384, 288, 100, 100, 20, 10); 81]).unwrap();
    let cases = [(4, 2.0 / 3.0), (0, 1.0), (25, 0.0)];
    let mut scores = Vec::new();
    let mut details = Vec::new();
    let mut pass = true;
    for (i, (dx, expect)) in cases.iter().enumerate() {
        let s = jaccard_video(&perturb_masks(&gt, *dx, 0), &gt, &format!("ep{i}"), "view1", i as u32 + 1).unwrap();
        let report = aggregate(std::slice::from_ref(&s));
        let j = report.task_mean("view1", i as u32 + 1).unwrap();
        pass &= s.j_video == *expect && j == *expect && s.frame_scores.len() == 81;
        details.push(format!("dx={dx}: {j}"));
        scores.push(s);
    }
    outcome(pass, details.join(", "))
}

fn table_arithmetic() -> Outcome {
    let scores: Vec<VideoScore> = PUBLISHED_MEANS_VIEW1
        .iter()
        .enumerate()
        .map(|(i, &j)| VideoScore::new(format!("t{i}"), "view1", i as u32 + 1, vec![FrameScore { t: 0, j: j / 100.0, both_empty: false }]))
        .collect();
    let overall = aggregate(&scores).overall("view1").unwrap();
    let shown = display_percent(overall);
    outcome(shown == "53.9", format!("internal {:.4}, displayed {shown} (expected 53.9)", overall * 100.0))
}

fn ranking_reproduction() -> Outcome {
    let mut scores = Vec::new();
    for (view, table) in [("view1", &PUBLISHED_RANKING_VIEW1), ("view2", &PUBLISHED_RANKING_VIEW2)] {
        for &(t, j) in table.iter() {
            let s = VideoScore::new(format!("{view}-{t}"), view, t, vec![FrameScore { t: 0, j: j / 100.0, both_empty: false }]);
            scores.push(s.with_task_name(TASK_NAMES[t as usize - 1]));
        }
    }
    let report = aggregate(&scores);
    let mut pass = true;
    let mut details = Vec::new();
    for (view, first, last) in [("view1", (12, "68.3"), (7, "36.0")), ("view2", (12, "57.7"), (5, "25.7"))] {
        let ranking = rank_tasks(&report, view).unwrap();
        let (f, l) = (ranking[0], ranking[ranking.len() - 1]);
        let ok = (f.0, display_percent(f.1).as_str()) == first && (l.0, display_percent(l.1).as_str()) == last;
        pass &= ok;
        details.push(format!(
            "{view}: first {} {}, last {} {}",
            TASK_NAMES[f.0 as usize - 1],
            display_percent(f.1),
            TASK_NAMES[l.0 as usize - 1],
            display_percent(l.1)
        ));
    }
    outcome(pass, details.join("; "))
}

fn latent_round_trip() -> Outcome {
    let shape = BlockShape::new(16, 36, 48);
    let start = Instant::now();
    let mut pass = true;
    let mut combos = 0;
    for v in [1, 2, 4] {
        for t in [0, 1, 3, 81] {
            let (refs, xs) = labeled_inputs(v, t, shape);
            let grid = assemble(refs, xs.clone()).unwrap();
            pass &= strip_references(grid.clone()) == xs;
            let (stream, manifest) = flatten(grid.clone());
            pass &= unflatten(stream, &manifest).map(|g| g == grid).unwrap_or(false);
            combos += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(pass && elapsed < LATENT_BUDGET, format!("{combos} (V,T) combinations, {elapsed:.2?}"))
}

fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn run_pipeline(root: &Path) -> (Vec<String>, usize) {
    let (gt, pred, eval) = (root.join("gt"), root.join("pred"), root.join("eval"));
    let pred_tree = PredTree {
        root: pred.clone(),
        dx: 4,
        dy: 0,
    };
    cmd_synth_scene(None, 15, Some(42), &gt, Some(&pred_tree)).unwrap();
    let rendered = cmd_synth_traj(&TrajSource::Episodes(gt.clone()), None, &TrajVideoSpec::default()).unwrap();
    let out = cmd_eval(&EvalOptions {
        pred,
        gt,
        out: eval,
        format: ReportFormat::Markdown,
        bins: Some(10),
        views: None,
        remote: None,
    })
    .unwrap();
    let overall = out
        .report
        .views()
        .iter()
        .map(|v| format!("{v} {}", display_percent(out.report.overall(v).unwrap())))
        .collect();
    (overall, rendered.iter().map(|o| o.frames).sum())
}

fn pipeline_determinism(work: &Path) -> Outcome {
    let start = Instant::now();
    let (a, b) = (work.join("run_a"), work.join("run_b"));
    let (overall_a, frames) = run_pipeline(&a);
    let (overall_b, _) = run_pipeline(&b);
    let elapsed = start.elapsed();
    let (ta, tb) = (tree_bytes(&a), tree_bytes(&b));
    let identical = ta == tb;
    let episodes = std::fs::read_dir(a.join("gt")).unwrap().count();
    outcome(
        identical && overall_a == overall_b && episodes == 15 && frames == 15 * 2 * 81 && elapsed < PIPELINE_BUDGET,
        format!(
            "{episodes} episodes, {frames} trail frames, {} files identical: {identical}, overall [{}], two runs {elapsed:.2?}",
            ta.len(),
            overall_a.join(", ")
        ),
    )
}

fn loop_closure(work: &Path) -> Outcome {
    let gt = work.join("run_a").join("gt");
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut dirs: Vec<_> = std::fs::read_dir(&gt).unwrap().map(|e| e.unwrap().path()).collect();
    dirs.sort();
    for dir in dirs {
        let manifest = EpisodeManifest::load(&dir).unwrap();
        let joints: JointsFile = serde_json::from_slice(&std::fs::read(dir.join(&manifest.joints)).unwrap()).unwrap();
        for view in &manifest.views {
            let calib: CameraCalib = CameraCalib::load(&dir.join(&view.calib)).unwrap();
            let frames = read_view_frames(&dir.join(&view.traj)).unwrap();
            for arm in &manifest.arms {
                let chain = DhChain::load(&dir.join(&arm.chain)).unwrap();
                let q = &joints.arms.iter().find(|a| a.arm == arm.arm).unwrap().joints;
                let channel = if arm.arm == ArmId::Left { 1 } else { 0 };
                for (t, frame) in frames.iter().enumerate() {
                    let m = fk_oracle(&chain, &q[t].0);
                    let (u, v, z) = projection_oracle(&calib, &Vector3::new(m[0][3], m[1][3], m[2][3]));
                    if z <= 1e-6 || u < 0.0 || v < 0.0 || u >= calib.width as f64 || v >= calib.height as f64 {
                        continue;
                    }
                    let mut best = 0u8;
                    let mut at = Vec::new();
                    for y in 0..frame.height() {
                        for x in 0..frame.width() {
                            let c = frame.get(x, y)[channel];
                            if c > best {
                                best = c;
                                at.clear();
                            }
                            if c == best {
                                at.push((x, y));
                            }
                        }
                    }
                    checked += 1;
                    let d = at
                        .iter()
                        .map(|&(x, y)| ((x as f64 - u).powi(2) + (y as f64 - v).powi(2)).sqrt())
                        .fold(0.0, f64::max);
                    worst = worst.max(d);
                    if d > HEAD_TOL_PX && failures.len() < 3 {
                        failures.push(format!("{} {} {} t={t}", manifest.episode_id, view.view, arm.arm));
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty() && checked > 0,
        format!("{checked} (frame, arm) heads checked, worst distance {worst:.3} px (tol {HEAD_TOL_PX}) {}", failures.join(" ")),
    )
}

fn main() {
    let work = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("FK oracle equivalence", Box::new(fk_oracle_equivalence)),
        ("projection contract", Box::new(projection_contract)),
        ("line preservation", Box::new(line_preservation)),
        ("trail golden K=4", Box::new(trail_golden)),
        ("analytic Jaccard", Box::new(analytic_jaccard)),
        ("published overall arithmetic", Box::new(table_arithmetic)),
        ("published ranking ends", Box::new(ranking_reproduction)),
        ("latent grid round trip", Box::new(latent_round_trip)),
        ("pipeline determinism", Box::new(|| pipeline_determinism(work.path()))),
        ("FK-projection-render loop closure", Box::new(|| loop_closure(work.path()))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if result.pass { "PASS" } else { "FAIL" }, i + 1, result.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
