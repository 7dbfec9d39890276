//! Classical motion estimation: polynomial-expansion dense flow, pyramidal
//! Lucas-Kanade tracking, backward warping and the flow-extrapolation
//! baseline. Borders are edge-replicated everywhere.

pub(crate) mod farneback;
mod frame;
mod lk;
pub(crate) mod plane;
mod poly;
mod warp;

use thiserror::Error;

pub use farneback::{farneback_flow, FlowField, FlowParams};
pub use frame::{to_luma, Frame};
pub use lk::{lk_track, Track, TrackParams};
pub use poly::{polynomial_expansion, Quadratic, QuadraticField};
pub use warp::{extrapolate_sequence, warp};

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("expected {expected} channel(s), got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("seed ({x}, {y}) lies outside the first frame")]
    SeedOutsideFrame { x: f64, y: f64 },
    #[error("{0}")]
    Contract(String),
}
