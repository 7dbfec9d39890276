//! Command-line pipeline: GPS projection, conditioning payloads, the flow
//! baseline, evaluation and synthetic scenes.

pub mod commands;
pub mod config;
pub mod frames_io;
