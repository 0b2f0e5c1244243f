//! Trajectory control videos: fading trails of glowing end-effector points
//! drawn over the initial-frame object mask, one synchronized sequence per view.
//!
//! Compositing per output frame, in order:
//! 1. black canvas;
//! 2. mask foreground blended with `mask_color` at 50%;
//! 3. trail layer added per channel and clamped to 255.
//!
//! Within one track, the points of different ages combine by per-pixel max, so
//! the newest point is always the brightest spot of its trail. Different
//! tracks are summed. Both operations are order-independent, which keeps
//! every frame a pure function of `(tracks, t, spec)`.

use std::io::Write;
use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ImageEncoder, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::PixelPoint;
use crate::error::{Error, Result};
use crate::maskio::{duplicate_mask, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArmId {
    Left,
    Right,
}

impl ArmId {
    pub fn as_str(self) -> &'static str {
        match self {
            ArmId::Left => "left",
            ArmId::Right => "right",
        }
    }
}

impl std::fmt::Display for ArmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ArmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(ArmId::Left),
            "right" => Ok(ArmId::Right),
            other => Err(Error::InvalidParameter(format!("unknown arm {other:?}"))),
        }
    }
}

/// Projected end-effector path of one arm in one view, one point per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelTrack {
    pub arm: ArmId,
    pub points: Vec<PixelPoint>,
}

/// Intensity weight by point age (0 = current frame).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decay {
    /// `1 − age / trail_length`.
    Linear,
    /// Explicit weights, one per age, `trail_length` entries.
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmColors {
    pub left: [u8; 3],
    pub right: [u8; 3],
}

impl ArmColors {
    pub fn get(&self, arm: ArmId) -> [u8; 3] {
        match arm {
            ArmId::Left => self.left,
            ArmId::Right => self.right,
        }
    }
}

/// Trail rendering parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajVideoSpec {
    /// Number of past points drawn, including the current one.
    pub trail_length: usize,
    /// Glow radius in pixels.
    pub point_radius: f64,
    pub decay: Decay,
    pub arm_colors: ArmColors,
    pub mask_color: [u8; 3],
    pub width: u32,
    pub height: u32,
    pub frame_count: usize,
}

impl Default for TrajVideoSpec {
    fn default() -> Self {
        Self {
            trail_length: 12,
            point_radius: 6.0,
            decay: Decay::Linear,
            arm_colors: ArmColors {
                left: [0, 255, 0],
                right: [255, 0, 0],
            },
            mask_color: [0, 0, 255],
            width: crate::DEFAULT_WIDTH,
            height: crate::DEFAULT_HEIGHT,
            frame_count: crate::DEFAULT_FRAME_COUNT,
        }
    }
}

impl TrajVideoSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.trail_length == 0 {
            return bad("trail_length must be at least 1".into());
        }
        if !(self.point_radius >= 1.0) || !self.point_radius.is_finite() {
            return bad(format!("point_radius {} must be a finite value ≥ 1", self.point_radius));
        }
        if self.width == 0 || self.height == 0 {
            return bad(format!("canvas {}x{} must be at least 1x1", self.width, self.height));
        }
        if let Decay::Weights(w) = &self.decay {
            if w.len() != self.trail_length {
                return bad(format!("{} decay weights for trail_length {}", w.len(), self.trail_length));
            }
            if w[0] != 1.0 {
                return bad("decay weight at age 0 must be 1".into());
            }
            if w.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return bad("decay weights must lie in [0, 1]".into());
            }
            if w.windows(2).any(|p| p[1] > p[0]) {
                return bad("decay weights must be non-increasing with age".into());
            }
        }
        Ok(())
    }

    /// Weight for a point `age` frames old; zero at or beyond the trail length.
    pub fn decay_weight(&self, age: usize) -> f64 {
        if age >= self.trail_length {
            return 0.0;
        }
        match &self.decay {
            Decay::Linear => 1.0 - age as f64 / self.trail_length as f64,
            Decay::Weights(w) => w[age],
        }
    }
}

/// 8-bit RGB frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Frame {
    pub fn black(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0; width as usize * height as usize * 3],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = self.offset(x, y);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Per-channel saturating sum.
    pub fn add_saturating(&self, other: &Frame) -> Result<Frame> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::DimensionMismatch(format!(
                "frame {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a.saturating_add(b)).collect();
        Ok(Frame {
            width: self.width,
            height: self.height,
            data,
        })
    }

    pub fn to_image(&self) -> RgbImage {
        RgbImage::from_raw(self.width, self.height, self.data.clone()).expect("frame buffer matches its dimensions")
    }

    pub fn from_image(img: RgbImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.into_raw(),
        }
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        encode_png(&mut out, &self.data, self.width, self.height, image::ExtendedColorType::Rgb8).map_err(|source| {
            Error::Image {
                path: Default::default(),
                source,
            }
        })?;
        Ok(out)
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes = self.encode_png()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load_png(path: &Path) -> Result<Frame> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Frame::from_image(img.to_rgb8()))
    }
}

/// PNG encoding with fixed settings so output bytes are stable.
pub(crate) fn encode_png(
    out: &mut impl Write,
    data: &[u8],
    width: u32,
    height: u32,
    color: image::ExtendedColorType,
) -> image::ImageResult<()> {
    PngEncoder::new_with_quality(out, CompressionType::Fast, FilterType::Sub).write_image(data, width, height, color)
}

/// Linear radial falloff: `max(0, 1 − distance / radius)`.
pub fn glow_kernel(distance: f64, radius: f64) -> f64 {
    (1.0 - distance / radius).max(0.0)
}

/// Round half up to the nearest integer pixel.
pub fn round_pixel(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

fn quantize(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Unquantized trail intensities for frame `t`, three channels per pixel.
pub fn render_trail_layer(tracks: &[PixelTrack], t: usize, spec: &TrajVideoSpec) -> Vec<f64> {
    let (w, h) = (spec.width as i64, spec.height as i64);
    let mut layer = vec![0.0; (w * h * 3) as usize];
    let mut stroke = vec![0.0f64; (w * h) as usize];
    let reach = spec.point_radius.ceil() as i64;
    for track in tracks {
        stroke.iter_mut().for_each(|v| *v = 0.0);
        let mut touched = false;
        for age in 0..spec.trail_length.min(t + 1) {
            let Some(p) = track.points.get(t - age) else {
                continue;
            };
            if !p.visible {
                continue;
            }
            let weight = spec.decay_weight(age);
            if weight <= 0.0 {
                continue;
            }
            let (cx, cy) = (round_pixel(p.u), round_pixel(p.v));
            for y in (cy - reach).max(0)..=(cy + reach).min(h - 1) {
                for x in (cx - reach).max(0)..=(cx + reach).min(w - 1) {
                    let d = (((x - cx).pow(2) + (y - cy).pow(2)) as f64).sqrt();
                    let v = weight * glow_kernel(d, spec.point_radius);
                    let s = &mut stroke[(y * w + x) as usize];
                    if v > *s {
                        *s = v;
                        touched = true;
                    }
                }
            }
        }
        if !touched {
            continue;
        }
        let color = spec.arm_colors.get(track.arm);
        for (i, &s) in stroke.iter().enumerate() {
            if s > 0.0 {
                for c in 0..3 {
                    layer[i * 3 + c] += color[c] as f64 * s;
                }
            }
        }
    }
    layer
}

/// Trail frame `t` on a black canvas.
pub fn render_trail_frame(tracks: &[PixelTrack], t: usize, spec: &TrajVideoSpec) -> Result<Frame> {
    if t >= spec.frame_count {
        return Err(Error::InvalidParameter(format!(
            "frame {t} is outside a {}-frame video",
            spec.frame_count
        )));
    }
    let layer = render_trail_layer(tracks, t, spec);
    Ok(Frame {
        width: spec.width,
        height: spec.height,
        data: layer.into_iter().map(quantize).collect(),
    })
}

/// Blends `mask_color` at 50% alpha over the mask foreground of `frame`.
pub fn composite_mask_prior(frame: &Frame, mask: &Mask, spec: &TrajVideoSpec) -> Result<Frame> {
    if mask.dims() != (frame.width, frame.height) {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} vs frame {}x{}",
            mask.width(),
            mask.height(),
            frame.width,
            frame.height
        )));
    }
    let mut out = frame.clone();
    for (i, &fg) in mask.bits().iter().enumerate() {
        if fg {
            for c in 0..3 {
                let base = out.data[i * 3 + c] as u16;
                out.data[i * 3 + c] = ((base + spec.mask_color[c] as u16 + 1) / 2) as u8;
            }
        }
    }
    Ok(out)
}

/// Renders one frame sequence per view. Every view shares `spec.frame_count`.
pub fn synth_trajectory_video(
    tracks_per_view: &[Vec<PixelTrack>],
    initial_masks: &[Mask],
    spec: &TrajVideoSpec,
) -> Result<Vec<Vec<Frame>>> {
    spec.validate()?;
    if tracks_per_view.len() != initial_masks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} track sets for {} initial masks",
            tracks_per_view.len(),
            initial_masks.len()
        )));
    }
    for (v, (tracks, mask)) in tracks_per_view.iter().zip(initial_masks).enumerate() {
        if let Some(track) = tracks.iter().find(|tr| tr.points.len() != spec.frame_count) {
            return Err(Error::DimensionMismatch(format!(
                "view {v}: {} track has {} points, expected {}",
                track.arm,
                track.points.len(),
                spec.frame_count
            )));
        }
        if mask.dims() != (spec.width, spec.height) {
            return Err(Error::DimensionMismatch(format!(
                "view {v}: initial mask is {}x{}, canvas is {}x{}",
                mask.width(),
                mask.height(),
                spec.width,
                spec.height
            )));
        }
    }
    tracks_per_view
        .par_iter()
        .zip(initial_masks)
        .map(|(tracks, mask)| {
            let masks = duplicate_mask(mask, spec.frame_count)?;
            let black = Frame::black(spec.width, spec.height);
            (0..spec.frame_count)
                .into_par_iter()
                .map(|t| {
                    let base = composite_mask_prior(&black, &masks.frames()[t], spec)?;
                    base.add_saturating(&render_trail_frame(tracks, t, spec)?)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

pub fn frame_file_name(t: usize) -> String {
    format!("frame_{t:05}.png")
}

/// File name of the sidecar written next to each view's frames.
pub const SIDECAR_FILE: &str = "traj.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoSidecar {
    pub view: String,
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    pub spec: TrajVideoSpec,
}

/// Writes `frame_00000.png…` and the sidecar into `dir`.
pub fn write_view_frames(dir: &Path, view: &str, frames: &[Frame], spec: &TrajVideoSpec) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    frames
        .par_iter()
        .enumerate()
        .try_for_each(|(t, f)| f.save_png(&dir.join(frame_file_name(t))))?;
    let sidecar = VideoSidecar {
        view: view.to_string(),
        frames: frames.len(),
        width: spec.width,
        height: spec.height,
        spec: spec.clone(),
    };
    crate::error::write_json(&dir.join(SIDECAR_FILE), &sidecar)
}

/// Loads `frame_*.png` from `dir` in index order.
pub fn read_view_frames(dir: &Path) -> Result<Vec<Frame>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("frame_") && n.ends_with(".png"))
        })
        .collect();
    paths.sort();
    paths.par_iter().map(|p| Frame::load_png(p)).collect()
}
