//! Mask-matching evaluation: frame- and video-level Jaccard index, per-task
//! and per-view aggregation, rollout-progress curves and task rankings.
//!
//! Scores are fractions in `[0, 1]` internally; reports display them as
//! percentages rounded half-up to one decimal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskio::{Mask, MaskSequence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub t: usize,
    pub j: f64,
    /// Both masks were empty; `j` is 1 by convention.
    pub both_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoScore {
    pub episode_id: String,
    pub view_id: String,
    pub task_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_name: Option<String>,
    pub frame_scores: Vec<FrameScore>,
    pub j_video: f64,
}

impl VideoScore {
    /// Builds a score whose `j_video` is the mean of `frame_scores`.
    pub fn new(
        episode_id: impl Into<String>,
        view_id: impl Into<String>,
        task_id: u32,
        frame_scores: Vec<FrameScore>,
    ) -> Self {
        let j_video = mean(frame_scores.iter().map(|f| f.j));
        Self {
            episode_id: episode_id.into(),
            view_id: view_id.into(),
            task_id,
            task_name: None,
            frame_scores,
            j_video,
        }
    }

    pub fn with_task_name(mut self, name: impl Into<String>) -> Self {
        self.task_name = Some(name.into());
        self
    }
}

/// Running mean; a constant sequence returns its value exactly.
fn mean(values: impl Iterator<Item = f64>) -> f64 {
    values
        .enumerate()
        .fold(0.0, |m, (k, v)| m + (v - m) / (k + 1) as f64)
}

/// `|pred ∩ gt| / |pred ∪ gt|`; 1 when both masks are empty.
pub fn jaccard_frame(pred: &Mask, gt: &Mask) -> Result<FrameScore> {
    let (inter, union) = pred.overlap_counts(gt)?;
    Ok(if union == 0 {
        FrameScore {
            t: 0,
            j: 1.0,
            both_empty: true,
        }
    } else {
        FrameScore {
            t: 0,
            j: inter as f64 / union as f64,
            both_empty: false,
        }
    })
}

fn check_lengths(preds: &MaskSequence, gts: &MaskSequence) -> Result<()> {
    if preds.len() != gts.len() {
        return Err(Error::LengthMismatch {
            expected: gts.len(),
            found: preds.len(),
        });
    }
    Ok(())
}

/// Per-frame Jaccard scores of one object track.
pub fn jaccard_frames(preds: &MaskSequence, gts: &MaskSequence) -> Result<Vec<FrameScore>> {
    check_lengths(preds, gts)?;
    preds
        .frames()
        .iter()
        .zip(gts.frames())
        .enumerate()
        .map(|(t, (p, g))| jaccard_frame(p, g).map(|s| FrameScore { t, ..s }))
        .collect()
}

/// Video score of a single object: the mean of its frame scores.
pub fn jaccard_video(
    preds: &MaskSequence,
    gts: &MaskSequence,
    episode_id: &str,
    view_id: &str,
    task_id: u32,
) -> Result<VideoScore> {
    Ok(VideoScore::new(episode_id, view_id, task_id, jaccard_frames(preds, gts)?))
}

/// Video score over several objects. Each frame's score is the mean of the
/// per-object scores at that frame; `both_empty` is set only if every object
/// was empty in both masks.
pub fn jaccard_video_objects(
    preds: &[MaskSequence],
    gts: &[MaskSequence],
    episode_id: &str,
    view_id: &str,
    task_id: u32,
) -> Result<VideoScore> {
    if preds.len() != gts.len() || gts.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} predicted object tracks for {} ground-truth tracks",
            preds.len(),
            gts.len()
        )));
    }
    let per_object = preds
        .iter()
        .zip(gts)
        .map(|(p, g)| jaccard_frames(p, g))
        .collect::<Result<Vec<_>>>()?;
    let frames = per_object[0].len();
    if let Some(bad) = per_object.iter().find(|o| o.len() != frames) {
        return Err(Error::LengthMismatch {
            expected: frames,
            found: bad.len(),
        });
    }
    let frame_scores = (0..frames)
        .map(|t| FrameScore {
            t,
            j: mean(per_object.iter().map(|o| o[t].j)),
            both_empty: per_object.iter().all(|o| o[t].both_empty),
        })
        .collect();
    Ok(VideoScore::new(episode_id, view_id, task_id, frame_scores))
}

/// Aggregated scores keyed by `(view, task)`.
///
/// Cells keep every video score, so merging partial reports is exact and
/// independent of how the inputs were split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    cells: BTreeMap<(String, u32), Vec<f64>>,
    task_names: BTreeMap<u32, String>,
}

impl EvalReport {
    pub fn merge(mut self, other: EvalReport) -> EvalReport {
        for (key, mut values) in other.cells {
            self.cells.entry(key).or_default().append(&mut values);
        }
        for (id, name) in other.task_names {
            self.task_names.entry(id).or_insert(name);
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn views(&self) -> Vec<String> {
        self.cells.keys().map(|(v, _)| v.clone()).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn tasks(&self) -> Vec<u32> {
        self.cells.keys().map(|&(_, t)| t).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn task_name(&self, task: u32) -> Option<&str> {
        self.task_names.get(&task).map(String::as_str)
    }

    pub fn set_task_name(&mut self, task: u32, name: impl Into<String>) {
        self.task_names.insert(task, name.into());
    }

    pub fn episode_count(&self, view: &str, task: u32) -> usize {
        self.cells.get(&(view.to_string(), task)).map_or(0, Vec::len)
    }

    /// Mean video score of one `(view, task)` cell.
    pub fn task_mean(&self, view: &str, task: u32) -> Option<f64> {
        self.cells.get(&(view.to_string(), task)).map(|v| order_free_mean(v))
    }

    /// Per-task means for a view, ascending task id.
    pub fn task_means(&self, view: &str) -> Vec<(u32, f64)> {
        self.cells
            .iter()
            .filter(|((v, _), _)| v == view)
            .map(|(&(_, t), values)| (t, order_free_mean(values)))
            .collect()
    }

    /// Unweighted mean of the view's task means.
    pub fn overall(&self, view: &str) -> Option<f64> {
        let means = self.task_means(view);
        if means.is_empty() {
            None
        } else {
            Some(order_free_mean(&means.iter().map(|&(_, m)| m).collect::<Vec<_>>()))
        }
    }
}

/// Mean computed over sorted values, so the result does not depend on input order.
fn order_free_mean(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    mean(sorted.into_iter())
}

pub fn aggregate(scores: &[VideoScore]) -> EvalReport {
    let mut report = EvalReport::default();
    for s in scores {
        report
            .cells
            .entry((s.view_id.clone(), s.task_id))
            .or_default()
            .push(s.j_video);
        if let Some(name) = &s.task_name {
            report.task_names.entry(s.task_id).or_insert_with(|| name.clone());
        }
    }
    report
}

/// Mean frame score per rollout-progress bin over all videos. Frame `t` of a
/// `T`-frame video falls in bin `floor(n_bins · t / T)`. Bins that receive no
/// frames are omitted.
pub fn progress_curve(scores: &[VideoScore], n_bins: usize) -> Result<Vec<(usize, f64)>> {
    if n_bins == 0 {
        return Err(Error::InvalidParameter("progress curve needs at least one bin".into()));
    }
    let mut sums = vec![(0.0, 0usize); n_bins];
    for s in scores {
        let total = s.frame_scores.len();
        for (idx, f) in s.frame_scores.iter().enumerate() {
            let bin = (n_bins * idx / total).min(n_bins - 1);
            sums[bin].0 += f.j;
            sums[bin].1 += 1;
        }
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(b, (s, n))| (b, s / n as f64))
        .collect())
}

/// Tasks of one view ordered by descending mean; ties go to the lower task id.
pub fn rank_tasks(report: &EvalReport, view: &str) -> Result<Vec<(u32, f64)>> {
    let mut means = report.task_means(view);
    if means.is_empty() {
        return Err(Error::UnknownView(view.to_string()));
    }
    means.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(means)
}

/// Formats a fraction as a percentage with one decimal, rounding half up.
pub fn display_percent(j: f64) -> String {
    let tenths = j * 1000.0;
    // Snap to 1e-6 tenths first so values printed as x.x5 round up.
    let snapped = (tenths * 1e6).round() / 1e6;
    let rounded = (snapped + 0.5).floor() as i64;
    let sign = if rounded < 0 { "-" } else { "" };
    let r = rounded.abs();
    format!("{sign}{}.{}", r / 10, r % 10)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidParameter(format!("unknown report format {other:?}"))),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
        }
    }
}

/// Renders the per-view task table.
///
/// Markdown: one row per view, one column per task, then `Overall`.
/// CSV: one row per `(view, task)` cell plus an `overall` row per view.
pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    let tasks = report.tasks();
    let mut out = String::new();
    match format {
        ReportFormat::Markdown => {
            out.push_str("| View |");
            for t in &tasks {
                let _ = write!(out, " {t} |");
            }
            out.push_str(" Overall |\n|---|");
            out.push_str(&"---|".repeat(tasks.len()));
            out.push_str("---|\n");
            for view in report.views() {
                let _ = write!(out, "| {view} |");
                for &t in &tasks {
                    match report.task_mean(&view, t) {
                        Some(m) => {
                            let _ = write!(out, " {} |", display_percent(m));
                        }
                        None => out.push_str(" - |"),
                    }
                }
                let overall = report.overall(&view).map(display_percent).unwrap_or_else(|| "-".into());
                let _ = writeln!(out, " {overall} |");
            }
        }
        ReportFormat::Csv => {
            out.push_str("view,task,task_name,episodes,j\n");
            for view in report.views() {
                let mut total = 0;
                for (t, m) in report.task_means(&view) {
                    let n = report.episode_count(&view, t);
                    total += n;
                    let name = report.task_name(t).unwrap_or("");
                    let _ = writeln!(out, "{view},{t},{},{n},{}", csv_field(name), display_percent(m));
                }
                if let Some(overall) = report.overall(&view) {
                    let _ = writeln!(out, "{view},overall,,{total},{}", display_percent(overall));
                }
            }
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders a ranking produced by [`rank_tasks`].
pub fn render_ranking(report: &EvalReport, ranking: &[(u32, f64)], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Markdown => out.push_str("| Rank | Task ID | Task Name | J |\n|---|---|---|---|\n"),
        ReportFormat::Csv => out.push_str("rank,task,task_name,j\n"),
    }
    for (i, &(t, m)) in ranking.iter().enumerate() {
        let name = report.task_name(t).unwrap_or("");
        let _ = match format {
            ReportFormat::Markdown => writeln!(out, "| {} | {t} | {name} | {} |", i + 1, display_percent(m)),
            ReportFormat::Csv => writeln!(out, "{},{t},{},{}", i + 1, csv_field(name), display_percent(m)),
        };
    }
    out
}

/// Renders a progress curve as CSV (`bin,j`).
pub fn render_progress(curve: &[(usize, f64)]) -> String {
    let mut out = String::from("bin,j\n");
    for (b, j) in curve {
        let _ = writeln!(out, "{b},{}", display_percent(*j));
    }
    out
}

pub fn emit_report(report: &EvalReport, format: ReportFormat, path: &Path) -> Result<()> {
    write_text(path, &render_report(report, format))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes one JSON object per line.
pub fn write_scores(path: &Path, scores: &[VideoScore]) -> Result<()> {
    let mut buf = Vec::new();
    for s in scores {
        serde_json::to_writer(&mut buf, s).map_err(|e| Error::json("score dump", e))?;
        buf.write_all(b"\n").expect("writing to a Vec cannot fail");
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_scores(path: &Path) -> Result<Vec<VideoScore>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut scores = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let s = serde_json::from_str(&line).map_err(|e| Error::json(format!("{}:{}", path.display(), n + 1), e))?;
        scores.push(s);
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: u32, h: u32, x0: i64, y0: i64, x1: i64, y1: i64) -> Mask {
        let mut m = Mask::new(w, h).unwrap();
        m.fill_rect(x0, y0, x1, y1);
        m
    }

    fn video(j: &[f64]) -> Vec<FrameScore> {
        j.iter()
            .enumerate()
            .map(|(t, &j)| FrameScore { t, j, both_empty: false })
            .collect()
    }

    #[test]
    fn frame_examples() {
        let a = rect(30, 20, 2, 2, 8, 8);
        assert_eq!(jaccard_frame(&a, &a).unwrap().j, 1.0);
        let b = rect(30, 20, 10, 2, 14, 8);
        assert_eq!(jaccard_frame(&a, &b).unwrap().j, 0.0);

        let sq1 = rect(30, 20, 0, 0, 10, 10);
        let sq2 = rect(30, 20, 5, 0, 15, 10);
        assert_eq!(jaccard_frame(&sq1, &sq2).unwrap().j, 50.0 / 150.0);
    }

    #[test]
    fn both_empty_convention() {
        let e = Mask::new(5, 5).unwrap();
        let s = jaccard_frame(&e, &e).unwrap();
        assert_eq!(s.j, 1.0);
        assert!(s.both_empty);
        let one_empty = jaccard_frame(&e, &rect(5, 5, 0, 0, 1, 1)).unwrap();
        assert_eq!(one_empty.j, 0.0);
        assert!(!one_empty.both_empty);
    }

    #[test]
    fn frame_dimension_mismatch() {
        let err = jaccard_frame(&Mask::new(4, 4).unwrap(), &Mask::new(4, 5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn video_mean_and_length_check() {
        let s = VideoScore::new("e", "view1", 1, video(&[1.0, 0.5, 0.0]));
        assert_eq!(s.j_video, 0.5);

        let a = MaskSequence::new(vec![rect(8, 8, 0, 0, 3, 3); 4]).unwrap();
        assert_eq!(jaccard_video(&a, &a, "e", "v", 1).unwrap().j_video, 1.0);
        let b = MaskSequence::new(vec![rect(8, 8, 0, 0, 3, 3); 3]).unwrap();
        assert!(matches!(
            jaccard_video(&a, &b, "e", "v", 1),
            Err(Error::LengthMismatch { expected: 3, found: 4 })
        ));
    }

    #[test]
    fn multi_object_frames_average_objects() {
        let gt_a = MaskSequence::new(vec![rect(20, 10, 0, 0, 10, 10)]).unwrap();
        let gt_b = MaskSequence::new(vec![rect(20, 10, 10, 0, 20, 10)]).unwrap();
        let pred_b_wrong = MaskSequence::new(vec![Mask::new(20, 10).unwrap()]).unwrap();
        let s = jaccard_video_objects(&[gt_a.clone(), pred_b_wrong], &[gt_a, gt_b], "e", "v", 1).unwrap();
        assert_eq!(s.j_video, 0.5);
    }

    #[test]
    fn aggregate_examples() {
        let single = aggregate(&[VideoScore::new("e", "view1", 3, video(&[0.25, 0.75]))]);
        assert_eq!(single.overall("view1"), Some(0.5));

        let two = aggregate(&[
            VideoScore::new("a", "view1", 1, video(&[0.0])),
            VideoScore::new("b", "view1", 2, video(&[1.0])),
        ]);
        assert_eq!(two.overall("view1"), Some(0.5));
        assert_eq!(two.overall("view2"), None);

        let empty = aggregate(&[]);
        assert!(empty.is_empty());
        assert!(empty.views().is_empty());
    }

    #[test]
    fn overall_weights_tasks_not_episodes() {
        let report = aggregate(&[
            VideoScore::new("a", "v", 1, video(&[1.0])),
            VideoScore::new("b", "v", 1, video(&[1.0])),
            VideoScore::new("c", "v", 1, video(&[1.0])),
            VideoScore::new("d", "v", 2, video(&[0.0])),
        ]);
        assert_eq!(report.overall("v"), Some(0.5));
        assert_eq!(report.episode_count("v", 1), 3);
    }

    #[test]
    fn progress_examples() {
        let constant = VideoScore::new("e", "v", 1, video(&[0.3; 10]));
        let curve = progress_curve(&[constant], 5).unwrap();
        assert_eq!(curve.len(), 5);
        assert!(curve.iter().all(|&(_, j)| (j - 0.3).abs() < 1e-15));

        let halves = VideoScore::new("e", "v", 1, video(&[1.0, 1.0, 0.0, 0.0]));
        assert_eq!(progress_curve(&[halves], 2).unwrap(), vec![(0, 1.0), (1, 0.0)]);

        let falling: Vec<f64> = (0..20).map(|t| 1.0 - t as f64 / 20.0).collect();
        let curve = progress_curve(&[VideoScore::new("e", "v", 1, video(&falling))], 4).unwrap();
        assert!(curve.windows(2).all(|w| w[1].1 < w[0].1));

        assert!(matches!(progress_curve(&[], 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn ranking_ties_and_unknown_view() {
        let report = aggregate(&[
            VideoScore::new("a", "v", 3, video(&[0.5])),
            VideoScore::new("b", "v", 1, video(&[0.5])),
            VideoScore::new("c", "v", 2, video(&[0.5])),
        ]);
        let order: Vec<u32> = rank_tasks(&report, "v").unwrap().iter().map(|r| r.0).collect();
        assert_eq!(order, [1, 2, 3]);
        assert!(matches!(rank_tasks(&report, "nope"), Err(Error::UnknownView(_))));
    }

    #[test]
    fn display_rounding() {
        assert_eq!(display_percent(0.5386), "53.9");
        assert_eq!(display_percent(0.53886), "53.9");
        assert_eq!(display_percent(0.5385), "53.9");
        assert_eq!(display_percent(0.5384), "53.8");
        assert_eq!(display_percent(1.0), "100.0");
        assert_eq!(display_percent(0.0), "0.0");
        assert_eq!(display_percent(2.0 / 3.0), "66.7");
    }

    #[test]
    fn empty_report_is_header_only() {
        let empty = EvalReport::default();
        assert_eq!(render_report(&empty, ReportFormat::Markdown), "| View | Overall |\n|---|---|\n");
        assert_eq!(render_report(&empty, ReportFormat::Csv), "view,task,task_name,episodes,j\n");
    }

    #[test]
    fn score_dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.jsonl");
        let scores = vec![
            VideoScore::new("a", "view1", 1, video(&[0.1, 0.2])).with_task_name("Collect Food"),
            VideoScore::new("b", "view2", 2, video(&[1.0])),
        ];
        write_scores(&path, &scores).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(read_scores(&path).unwrap(), scores);
    }
}
