//! Toolkit for turning vessel GPS telemetry and one annotated reference
//! frame into trajectory-conditioning payloads for image-to-video models,
//! plus a classical flow-extrapolation baseline, evaluation metrics and a
//! synthetic scene generator with exact ground truth.
//!
//! With the default `parallel` feature, per-pixel and per-frame loops run
//! on rayon's global pool; results are identical for any thread count.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditioning;
pub mod flowlab;
pub mod geoproject;
pub mod metrics;
mod par;
pub mod synthscene;
pub mod telemetry;

use thiserror::Error;

pub use geoproject::{CameraFrameModel, ClipTiming, Pixel, PixelTrajectory};
pub use telemetry::{GeoFix, TelemetryLog, VesselId};

/// Any error raised by the library, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("telemetry: {0}")]
    Telemetry(#[from] telemetry::TelemetryError),
    #[error("geoproject: {0}")]
    Geo(#[from] geoproject::GeoError),
    #[error("conditioning: {0}")]
    Conditioning(#[from] conditioning::ConditioningError),
    #[error("flowlab: {0}")]
    Flow(#[from] flowlab::FlowError),
    #[error("metrics: {0}")]
    Metrics(#[from] metrics::MetricsError),
    #[error("synthscene: {0}")]
    Synth(#[from] synthscene::SynthError),
}
