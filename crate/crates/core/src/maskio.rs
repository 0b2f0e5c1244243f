//! Binary object masks, their PNG representation, and the boundary to the
//! external description (VLM) and segmentation (RVOS) models.
//!
//! Masks are single-channel 0/255 PNGs on disk; anything above 127 reads back
//! as foreground. The model boundary is two narrow traits with fixture-keyed
//! mocks and blocking HTTP implementations.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use base64::Engine;
use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::trajvideo::Frame;

/// Foreground threshold applied to 8-bit mask pixels.
pub const FOREGROUND_THRESHOLD: u8 = 127;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    /// Empty (all background) mask.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!("mask size {width}x{height} must be at least 1x1")));
        }
        Ok(Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        let mut mask = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                mask.bits[(y * width + x) as usize] = f(x, y);
            }
        }
        Ok(mask)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[(y * self.width + x) as usize] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of foreground pixels.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    fn check_same_dims(&self, other: &Mask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "mask {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    /// `(|A ∩ B|, |A ∪ B|)`.
    pub fn overlap_counts(&self, other: &Mask) -> Result<(usize, usize)> {
        self.check_same_dims(other)?;
        let (mut inter, mut union) = (0, 0);
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        Ok((inter, union))
    }

    pub fn union(&self, other: &Mask) -> Result<Mask> {
        self.check_same_dims(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a || b).collect();
        Ok(Mask {
            width: self.width,
            height: self.height,
            bits,
        })
    }

    /// Sets the half-open pixel rectangle `[x0, x1) × [y0, y1)`, clipped to the mask.
    pub fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64) {
        let xs = x0.max(0)..x1.min(self.width as i64);
        let ys = y0.max(0)..y1.min(self.height as i64);
        for y in ys {
            for x in xs.clone() {
                self.bits[(y as u32 * self.width + x as u32) as usize] = true;
            }
        }
    }

    /// Shifts the foreground by `(dx, dy)` pixels; pixels leaving the canvas are dropped.
    pub fn translate(&self, dx: i64, dy: i64) -> Mask {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut out = Mask {
            width: self.width,
            height: self.height,
            bits: vec![false; self.bits.len()],
        };
        for y in 0..h {
            let ny = y + dy;
            if !(0..h).contains(&ny) {
                continue;
            }
            for x in 0..w {
                let nx = x + dx;
                if (0..w).contains(&nx) && self.bits[(y * w + x) as usize] {
                    out.bits[(ny * w + nx) as usize] = true;
                }
            }
        }
        out
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| Luma([if self.get(x, y) { 255 } else { 0 }]))
    }

    pub fn from_image(img: &GrayImage) -> Result<Self> {
        Mask::from_fn(img.width(), img.height(), |x, y| img.get_pixel(x, y)[0] > FOREGROUND_THRESHOLD)
    }

    /// Hex SHA-256 of the dimensions and bits, used as a fixture key.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.width.to_le_bytes());
        h.update(self.height.to_le_bytes());
        h.update(self.bits.iter().map(|&b| b as u8).collect::<Vec<_>>());
        hex::encode(h.finalize())
    }
}

/// Ordered masks of uniform size, one per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSequence {
    frames: Vec<Mask>,
}

impl MaskSequence {
    pub fn new(frames: Vec<Mask>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidParameter("mask sequence must be non-empty".into()))?;
        let dims = first.dims();
        if let Some((t, m)) = frames.iter().enumerate().find(|(_, m)| m.dims() != dims) {
            return Err(Error::DimensionMismatch(format!(
                "mask sequence frame {t} is {}x{}, frame 0 is {}x{}",
                m.width, m.height, dims.0, dims.1
            )));
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[Mask] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Mask> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (u32, u32) {
        self.frames[0].dims()
    }

    /// Writes `mask_00000.png`, `mask_00001.png`, … into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.frames
            .iter()
            .enumerate()
            .try_for_each(|(t, m)| save_mask(m, &dir.join(mask_file_name(t))))
    }

    /// Loads a directory written by [`MaskSequence::save_dir`].
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("mask_") && n.ends_with(".png"))
            })
            .collect();
        paths.sort();
        let frames = paths.iter().map(|p| load_mask(p)).collect::<Result<Vec<_>>>()?;
        MaskSequence::new(frames)
    }
}

pub fn mask_file_name(t: usize) -> String {
    format!("mask_{t:05}.png")
}

pub fn save_mask(mask: &Mask, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let bytes = encode_mask_png(mask)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_mask(path: &Path) -> Result<Mask> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mask_png(&bytes).map_err(|e| match e {
        Error::Image { source, .. } => Error::Image {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn encode_mask_png(mask: &Mask) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    crate::trajvideo::encode_png(&mut out, mask.to_image().as_raw(), mask.width, mask.height, image::ExtendedColorType::L8)
        .map_err(|source| Error::Image {
            path: PathBuf::new(),
            source,
        })?;
    Ok(out)
}

pub fn decode_mask_png(bytes: &[u8]) -> Result<Mask> {
    let img = image::load_from_memory(bytes).map_err(|source| Error::Image {
        path: PathBuf::new(),
        source,
    })?;
    Mask::from_image(&img.to_luma8())
}

/// Repeats the initial-frame mask `t` times.
pub fn duplicate_mask(mask: &Mask, t: usize) -> Result<MaskSequence> {
    if t == 0 {
        return Err(Error::InvalidParameter("cannot duplicate a mask zero times".into()));
    }
    MaskSequence::new(vec![mask.clone(); t])
}

/// Foreground prior: the union of every object's frame-0 mask.
pub fn initial_frame_prior(sequences: &[MaskSequence]) -> Result<Mask> {
    let (first, rest) = sequences
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("no mask sequences given".into()))?;
    rest.iter().try_fold(first.frames[0].clone(), |acc, seq| acc.union(&seq.frames[0]))
}

/// A referring expression for one object in the scene.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectDescription {
    pub object_id: String,
    pub text: String,
}

impl ObjectDescription {
    pub fn new(object_id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidParameter("object description text is empty".into()));
        }
        Ok(Self {
            object_id: object_id.into(),
            text,
        })
    }

    fn mentions_tray(&self) -> bool {
        self.text
            .split(|c: char| !c.is_alphanumeric())
            .any(|w| w.eq_ignore_ascii_case("tray") || w.eq_ignore_ascii_case("trays"))
    }
}

/// Produces object descriptions for an image (VQA-style VLM).
pub trait DescriptionClient: Send + Sync {
    fn describe(&self, image: &Frame) -> Result<Vec<ObjectDescription>>;

    /// Whether tray-like support surfaces should be dropped from the result.
    fn supports_category_filter(&self) -> bool {
        false
    }
}

/// Segments one described object across a video (RVOS). A `None` entry marks
/// a frame the backend failed to produce a usable mask for.
pub trait SegmentationClient: Send + Sync {
    fn segment(&self, frames: &[Frame], desc: &ObjectDescription) -> Result<Vec<Option<Mask>>>;
}

pub fn describe_objects(client: &dyn DescriptionClient, image: &Frame) -> Result<Vec<ObjectDescription>> {
    let mut descriptions = client.describe(image)?;
    if client.supports_category_filter() {
        descriptions.retain(|d| !d.mentions_tray());
    }
    if descriptions.is_empty() {
        return Err(Error::NoObjectsFound);
    }
    Ok(descriptions)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameWarning {
    pub frame: usize,
    pub message: String,
}

/// Segmentation result; frames the backend failed on are empty masks with a warning.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub masks: MaskSequence,
    pub warnings: Vec<FrameWarning>,
}

pub fn segment_video(client: &dyn SegmentationClient, frames: &[Frame], desc: &ObjectDescription) -> Result<Segmentation> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidParameter("cannot segment an empty video".into()))?;
    let (w, h) = (first.width(), first.height());
    let mut raw = client.segment(frames, desc)?;
    let mut warnings = Vec::new();
    if raw.len() > frames.len() {
        warnings.push(FrameWarning {
            frame: frames.len(),
            message: format!("backend returned {} masks for {} frames; extra masks dropped", raw.len(), frames.len()),
        });
        raw.truncate(frames.len());
    }
    raw.resize(frames.len(), None);
    let masks = raw
        .into_iter()
        .enumerate()
        .map(|(t, m)| match m {
            Some(m) if m.dims() == (w, h) => Ok(m),
            Some(m) => {
                warnings.push(FrameWarning {
                    frame: t,
                    message: format!("mask is {}x{}, frame is {w}x{h}", m.width(), m.height()),
                });
                Mask::new(w, h)
            }
            None => {
                warnings.push(FrameWarning {
                    frame: t,
                    message: "no mask returned".into(),
                });
                Mask::new(w, h)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    for w in &warnings {
        log::warn!("segmentation of {:?}, frame {}: {}", desc.object_id, w.frame, w.message);
    }
    Ok(Segmentation {
        masks: MaskSequence::new(masks)?,
        warnings,
    })
}

fn frame_hash(frame: &Frame) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(frame.width().to_le_bytes());
    h.update(frame.height().to_le_bytes());
    h.update(frame.as_raw());
    h.finalize().into()
}

/// Fixture key for a description request.
pub fn description_key(image: &Frame) -> String {
    hex::encode(frame_hash(image))
}

/// Fixture key for a segmentation request.
pub fn segmentation_key(frames: &[Frame], query: &str) -> String {
    let mut h = Sha256::new();
    for f in frames {
        h.update(frame_hash(f));
    }
    h.update(b"\n");
    h.update(query.as_bytes());
    hex::encode(h.finalize())
}

fn numbered_descriptions(texts: &[String]) -> Result<Vec<ObjectDescription>> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| ObjectDescription::new(format!("obj{i}"), t.clone()))
        .collect()
}

/// Fixture-backed description client.
///
/// On disk: `<root>/descriptions/<key>.json` holding a JSON list of strings,
/// where `<key>` is [`description_key`] of the image.
#[derive(Debug, Clone, Default)]
pub struct MockDescriptionClient {
    fixtures: HashMap<String, Vec<String>>,
    filter_categories: bool,
}

impl MockDescriptionClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_category_filter(mut self, enabled: bool) -> Self {
        self.filter_categories = enabled;
        self
    }

    pub fn insert(&mut self, image: &Frame, descriptions: Vec<String>) {
        self.fixtures.insert(description_key(image), descriptions);
    }

    pub fn from_dir(root: &Path) -> Result<Self> {
        let dir = root.join("descriptions");
        let mut fixtures = HashMap::new();
        if dir.is_dir() {
            for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                let path = entry.map_err(|e| Error::io(&dir, e))?.path();
                if path.extension().is_some_and(|e| e == "json") {
                    let key = path.file_stem().unwrap().to_string_lossy().into_owned();
                    fixtures.insert(key, crate::error::read_json(&path)?);
                }
            }
        }
        Ok(Self {
            fixtures,
            filter_categories: false,
        })
    }

    pub fn save_dir(&self, root: &Path) -> Result<()> {
        for (key, texts) in &self.fixtures {
            crate::error::write_json(&root.join("descriptions").join(format!("{key}.json")), texts)?;
        }
        Ok(())
    }
}

impl DescriptionClient for MockDescriptionClient {
    fn describe(&self, image: &Frame) -> Result<Vec<ObjectDescription>> {
        match self.fixtures.get(&description_key(image)) {
            Some(texts) => numbered_descriptions(texts),
            None => Err(Error::NoObjectsFound),
        }
    }

    fn supports_category_filter(&self) -> bool {
        self.filter_categories
    }
}

/// Fixture-backed segmentation client.
///
/// On disk: `<root>/segments/<key>/mask_00000.png…`, where `<key>` is
/// [`segmentation_key`] of the frames and query text.
#[derive(Debug, Clone, Default)]
pub struct MockSegmentationClient {
    fixtures: HashMap<String, Vec<Mask>>,
}

impl MockSegmentationClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, frames: &[Frame], query: &str, masks: Vec<Mask>) {
        self.fixtures.insert(segmentation_key(frames, query), masks);
    }

    pub fn from_dir(root: &Path) -> Result<Self> {
        let dir = root.join("segments");
        let mut fixtures = HashMap::new();
        if dir.is_dir() {
            for entry in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                let path = entry.map_err(|e| Error::io(&dir, e))?.path();
                if path.is_dir() {
                    let key = path.file_name().unwrap().to_string_lossy().into_owned();
                    fixtures.insert(key, MaskSequence::load_dir(&path)?.into_frames());
                }
            }
        }
        Ok(Self { fixtures })
    }

    pub fn save_dir(&self, root: &Path) -> Result<()> {
        for (key, masks) in &self.fixtures {
            MaskSequence::new(masks.clone())?.save_dir(&root.join("segments").join(key))?;
        }
        Ok(())
    }
}

impl SegmentationClient for MockSegmentationClient {
    fn segment(&self, frames: &[Frame], desc: &ObjectDescription) -> Result<Vec<Option<Mask>>> {
        match self.fixtures.get(&segmentation_key(frames, &desc.text)) {
            Some(masks) => Ok(masks.iter().cloned().map(Some).collect()),
            None => Err(Error::Remote {
                attempts: 1,
                message: format!("no segmentation fixture for {:?}", desc.text),
            }),
        }
    }
}

/// Bounded retry with exponential backoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    /// Runs `op` until it succeeds, fails permanently, or attempts run out.
    fn run<T>(&self, mut op: impl FnMut() -> std::result::Result<T, Attempt>) -> Result<T> {
        let attempts = self.attempts.max(1);
        let mut backoff = self.initial_backoff;
        let mut last = String::new();
        for n in 1..=attempts {
            match op() {
                Ok(v) => return Ok(v),
                Err(Attempt::Fatal(message)) => return Err(Error::Remote { attempts: n, message }),
                Err(Attempt::Retry(message)) => {
                    log::warn!("remote attempt {n}/{attempts} failed: {message}");
                    last = message;
                    if n < attempts {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
            }
        }
        Err(Error::Remote {
            attempts,
            message: last,
        })
    }
}

enum Attempt {
    Retry(String),
    Fatal(String),
}

/// Endpoints and credentials for the real model backends.
#[derive(Debug, Clone, Default)]
pub struct RemoteConfig {
    pub vlm_url: Option<String>,
    pub rvos_url: Option<String>,
    pub api_token: Option<String>,
    /// Optional instruction sent with description requests.
    pub prompt: Option<String>,
    pub retry: RetryPolicy,
    pub timeout: Option<Duration>,
}

impl RemoteConfig {
    pub const VLM_URL_ENV: &'static str = "MTV_VLM_URL";
    pub const RVOS_URL_ENV: &'static str = "MTV_RVOS_URL";
    pub const API_TOKEN_ENV: &'static str = "MTV_API_TOKEN";

    pub fn from_env() -> Self {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        Self {
            vlm_url: var(Self::VLM_URL_ENV),
            rvos_url: var(Self::RVOS_URL_ENV),
            api_token: var(Self::API_TOKEN_ENV),
            ..Self::default()
        }
    }

    fn http_client(&self) -> Result<reqwest::blocking::Client> {
        reqwest::blocking::Client::builder()
            .timeout(self.timeout.unwrap_or(Duration::from_secs(300)))
            .build()
            .map_err(|e| Error::Remote {
                attempts: 0,
                message: e.to_string(),
            })
    }

    pub fn description_client(&self) -> Result<HttpDescriptionClient> {
        let url = self
            .vlm_url
            .clone()
            .ok_or_else(|| Error::InvalidParameter(format!("{} is not set", Self::VLM_URL_ENV)))?;
        Ok(HttpDescriptionClient {
            url,
            config: self.clone(),
            http: self.http_client()?,
        })
    }

    pub fn segmentation_client(&self) -> Result<HttpSegmentationClient> {
        let url = self
            .rvos_url
            .clone()
            .ok_or_else(|| Error::InvalidParameter(format!("{} is not set", Self::RVOS_URL_ENV)))?;
        Ok(HttpSegmentationClient {
            url,
            config: self.clone(),
            http: self.http_client()?,
        })
    }

    fn post<Req: Serialize, Resp: serde::de::DeserializeOwned>(
        &self,
        http: &reqwest::blocking::Client,
        url: &str,
        body: &Req,
    ) -> Result<Resp> {
        self.retry.run(|| {
            let mut req = http.post(url).json(body);
            if let Some(token) = &self.api_token {
                req = req.bearer_auth(token);
            }
            let resp = req.send().map_err(|e| Attempt::Retry(e.to_string()))?;
            let status = resp.status();
            if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
                return Err(Attempt::Retry(format!("{url} returned {status}")));
            }
            if !status.is_success() {
                return Err(Attempt::Fatal(format!("{url} returned {status}")));
            }
            resp.json::<Resp>()
                .map_err(|e| Attempt::Fatal(format!("malformed response from {url}: {e}")))
        })
    }
}

fn b64() -> base64::engine::GeneralPurpose {
    base64::engine::general_purpose::STANDARD
}

/// Request body of the description endpoint.
#[derive(Debug, Serialize, Deserialize)]
pub struct DescribeRequest {
    pub image: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DescribeResponse {
    pub descriptions: Vec<String>,
}

/// Request body of the segmentation endpoint.
#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentRequest {
    pub frames: Vec<String>,
    pub query: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentResponse {
    pub masks: Vec<String>,
}

/// Base64 of a PNG-encoded frame.
pub fn frame_to_base64(frame: &Frame) -> Result<String> {
    Ok(b64().encode(frame.encode_png()?))
}

pub fn mask_to_base64(mask: &Mask) -> Result<String> {
    Ok(b64().encode(encode_mask_png(mask)?))
}

/// Decodes a base64 PNG mask; `None` when either layer is malformed.
pub fn mask_from_base64(text: &str) -> Option<Mask> {
    let bytes = b64().decode(text).ok()?;
    decode_mask_png(&bytes).ok()
}

pub struct HttpDescriptionClient {
    url: String,
    config: RemoteConfig,
    http: reqwest::blocking::Client,
}

impl DescriptionClient for HttpDescriptionClient {
    fn describe(&self, image: &Frame) -> Result<Vec<ObjectDescription>> {
        let body = DescribeRequest {
            image: frame_to_base64(image)?,
            prompt: self.config.prompt.clone(),
        };
        let resp: DescribeResponse = self.config.post(&self.http, &self.url, &body)?;
        let texts: Vec<String> = resp.descriptions.into_iter().filter(|t| !t.trim().is_empty()).collect();
        numbered_descriptions(&texts)
    }

    fn supports_category_filter(&self) -> bool {
        true
    }
}

pub struct HttpSegmentationClient {
    url: String,
    config: RemoteConfig,
    http: reqwest::blocking::Client,
}

impl SegmentationClient for HttpSegmentationClient {
    fn segment(&self, frames: &[Frame], desc: &ObjectDescription) -> Result<Vec<Option<Mask>>> {
        let body = SegmentRequest {
            frames: frames.iter().map(frame_to_base64).collect::<Result<_>>()?,
            query: desc.text.clone(),
        };
        let resp: SegmentResponse = self.config.post(&self.http, &self.url, &body)?;
        Ok(resp.masks.iter().map(|m| mask_from_base64(m)).collect())
    }
}
