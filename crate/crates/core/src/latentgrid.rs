//! Multi-view latent token layout.
//!
//! Row `v` of a grid holds view `v`'s reference block followed by its `T`
//! frame blocks. Blocks are opaque payloads tagged with a uniform
//! `(channels, height, width)` shape; no numeric work happens here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl BlockShape {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self { channels, height, width }
    }
}

impl std::fmt::Display for BlockShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block<P> {
    pub shape: BlockShape,
    pub payload: P,
}

impl<P> Block<P> {
    pub fn new(shape: BlockShape, payload: P) -> Self {
        Self { shape, payload }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Reference,
    /// Frame index within the view, starting at 0.
    Frame(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot<P> {
    pub kind: SlotKind,
    pub block: Block<P>,
}

/// `V × (1 + T)` grid; column 0 of every row is the reference slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenGrid<P> {
    shape: BlockShape,
    frames: usize,
    rows: Vec<Vec<Slot<P>>>,
}

impl<P> TokenGrid<P> {
    pub fn views(&self) -> usize {
        self.rows.len()
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn block_shape(&self) -> BlockShape {
        self.shape
    }

    pub fn rows(&self) -> &[Vec<Slot<P>>] {
        &self.rows
    }

    pub fn slot(&self, view: usize, column: usize) -> Option<&Slot<P>> {
        self.rows.get(view).and_then(|r| r.get(column))
    }
}

fn check_shape<P>(expected: BlockShape, block: &Block<P>, view: usize, slot: usize) -> Result<()> {
    if block.shape != expected {
        return Err(Error::ShapeMismatch {
            view,
            slot,
            expected: expected.to_string(),
            found: block.shape.to_string(),
        });
    }
    Ok(())
}

/// Builds the grid: row `v` is `[references[v], frames[v][0], …, frames[v][T−1]]`.
/// In shape errors, `slot` 0 is the reference and `slot` `t + 1` is frame `t`.
pub fn assemble<P>(references: Vec<Block<P>>, frames: Vec<Vec<Block<P>>>) -> Result<TokenGrid<P>> {
    let shape = references
        .first()
        .map(|b| b.shape)
        .ok_or_else(|| Error::InvalidParameter("a token grid needs at least one view".into()))?;
    if frames.len() != references.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} reference blocks for {} frame rows",
            references.len(),
            frames.len()
        )));
    }
    let t = frames[0].len();
    let mut rows = Vec::with_capacity(references.len());
    for (v, (reference, row)) in references.into_iter().zip(frames).enumerate() {
        if row.len() != t {
            return Err(Error::DimensionMismatch(format!("view {v} has {} frames, view 0 has {t}", row.len())));
        }
        check_shape(shape, &reference, v, 0)?;
        let mut slots = Vec::with_capacity(1 + t);
        slots.push(Slot {
            kind: SlotKind::Reference,
            block: reference,
        });
        for (i, block) in row.into_iter().enumerate() {
            check_shape(shape, &block, v, i + 1)?;
            slots.push(Slot {
                kind: SlotKind::Frame(i),
                block,
            });
        }
        rows.push(slots);
    }
    Ok(TokenGrid { shape, frames: t, rows })
}

/// Drops column 0 of every row, keeping the `V × T` frame blocks in order.
pub fn strip_references<P>(grid: TokenGrid<P>) -> Vec<Vec<Block<P>>> {
    grid.rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .filter(|s| s.kind != SlotKind::Reference)
                .map(|s| s.block)
                .collect()
        })
        .collect()
}

/// Serialization order of a flattened grid.
pub const VIEW_MAJOR: &str = "view_major";

/// Index map accompanying a flattened stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridManifest {
    #[serde(rename = "V")]
    pub views: usize,
    #[serde(rename = "T")]
    pub frames: usize,
    pub block_shape: [usize; 3],
    pub order: String,
}

/// View-major stream: `[r_1, X_1^1 … X_1^T, r_2, …]`.
pub fn flatten<P>(grid: TokenGrid<P>) -> (Vec<Block<P>>, GridManifest) {
    let manifest = GridManifest {
        views: grid.views(),
        frames: grid.frames,
        block_shape: [grid.shape.channels, grid.shape.height, grid.shape.width],
        order: VIEW_MAJOR.to_string(),
    };
    let stream = grid.rows.into_iter().flatten().map(|s| s.block).collect();
    (stream, manifest)
}

/// Inverse of [`flatten`].
pub fn unflatten<P>(stream: Vec<Block<P>>, manifest: &GridManifest) -> Result<TokenGrid<P>> {
    if manifest.order != VIEW_MAJOR {
        return Err(Error::InvalidIndexMap(format!("unsupported order {:?}", manifest.order)));
    }
    if manifest.views == 0 {
        return Err(Error::InvalidIndexMap("V must be at least 1".into()));
    }
    let row_len = manifest
        .frames
        .checked_add(1)
        .ok_or_else(|| Error::InvalidIndexMap("T overflows".into()))?;
    let expected = manifest
        .views
        .checked_mul(row_len)
        .ok_or_else(|| Error::InvalidIndexMap("V·(1+T) overflows".into()))?;
    if stream.len() != expected {
        return Err(Error::InvalidIndexMap(format!(
            "stream has {} blocks, manifest implies {expected}",
            stream.len()
        )));
    }
    let [c, h, w] = manifest.block_shape;
    let shape = BlockShape::new(c, h, w);
    let mut rows = Vec::with_capacity(manifest.views);
    let mut it = stream.into_iter();
    for v in 0..manifest.views {
        let mut row = Vec::with_capacity(row_len);
        for col in 0..row_len {
            let block = it.next().expect("length checked above");
            if block.shape != shape {
                return Err(Error::InvalidIndexMap(format!(
                    "block at view {v}, slot {col} is {}, manifest says {shape}",
                    block.shape
                )));
            }
            let kind = if col == 0 { SlotKind::Reference } else { SlotKind::Frame(col - 1) };
            row.push(Slot { kind, block });
        }
        rows.push(row);
    }
    Ok(TokenGrid {
        shape,
        frames: manifest.frames,
        rows,
    })
}

/// Label used for reference blocks by [`labeled_inputs`].
pub fn reference_label(view: usize) -> String {
    format!("ref:{view}")
}

/// Label used for frame blocks by [`labeled_inputs`].
pub fn frame_label(view: usize, t: usize) -> String {
    format!("x:{view}:{t}")
}

pub type LabeledInputs = (Vec<Block<String>>, Vec<Vec<Block<String>>>);

/// Uniquely labeled reference and frame blocks for `V` views and `T` frames.
pub fn labeled_inputs(views: usize, frames: usize, shape: BlockShape) -> LabeledInputs {
    let refs = (0..views).map(|v| Block::new(shape, reference_label(v))).collect();
    let xs = (0..views)
        .map(|v| (0..frames).map(|t| Block::new(shape, frame_label(v, t))).collect())
        .collect();
    (refs, xs)
}

/// Outcome of a labeled assemble → strip / flatten → unflatten round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTripReport {
    pub strip_ok: bool,
    pub flatten_ok: bool,
    pub detail: Option<String>,
}

impl RoundTripReport {
    pub fn passed(&self) -> bool {
        self.strip_ok && self.flatten_ok
    }
}

/// Runs both round trips with labeled blocks. `corrupt` may tamper with the
/// flattened stream before it is unflattened.
pub fn round_trip_check(
    views: usize,
    frames: usize,
    shape: BlockShape,
    corrupt: impl FnOnce(&mut Vec<Block<String>>),
) -> Result<RoundTripReport> {
    let (refs, xs) = labeled_inputs(views, frames, shape);
    let grid = assemble(refs, xs.clone())?;

    let kept = strip_references(grid.clone());
    let strip_ok = kept == xs
        && kept
            .iter()
            .flatten()
            .all(|b| !b.payload.starts_with("ref:"));
    let mut detail = (!strip_ok).then(|| "strip_references did not return the frame blocks".to_string());

    let (mut stream, manifest) = flatten(grid.clone());
    corrupt(&mut stream);
    let flatten_ok = match unflatten(stream, &manifest) {
        Ok(back) if back == grid => true,
        Ok(_) => {
            detail.get_or_insert_with(|| "unflatten produced a different grid".into());
            false
        }
        Err(e) => {
            detail.get_or_insert_with(|| e.to_string());
            false
        }
    };
    Ok(RoundTripReport {
        strip_ok,
        flatten_ok,
        detail,
    })
}
