//! Geometry, rendering and evaluation kernels for trajectory-video control
//! of robot manipulation world models.
//!
//! The control-signal path runs joint trajectories through forward kinematics
//! ([`kinematics`]), projects end-effector positions into each calibrated view
//! ([`camera`]) and renders fading glowing trails over an initial-frame object
//! mask ([`trajvideo`]). The evaluation path compares predicted and
//! ground-truth object masks with frame- and video-level Jaccard scores
//! ([`evalcore`]). [`synthscene`] generates deterministic episodes with known
//! ground truth so both paths can be checked end to end.

pub mod camera;
pub mod error;
pub mod evalcore;
pub mod kinematics;
pub mod latentgrid;
pub mod maskio;
pub mod synthscene;
pub mod trajvideo;

pub use error::{Error, Result};

/// Default episode length in frames.
pub const DEFAULT_FRAME_COUNT: usize = 81;
/// Default canvas width in pixels.
pub const DEFAULT_WIDTH: u32 = 384;
/// Default canvas height in pixels.
pub const DEFAULT_HEIGHT: u32 = 288;
