//! Pipeline configuration document.
//!
//! Every key is optional; missing keys take the defaults below, which
//! describe a 1024x576, 7 fps, 14-frame clip with the top of the frame
//! facing 100 degrees. Relative paths resolve against the directory
//! holding the config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use seawake::flowlab::{FlowParams, TrackParams};
use seawake::{ClipTiming, Pixel, VesselId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselCentre {
    pub id: VesselId,
    pub center: Pixel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// GPS log, CSV.
    pub telemetry: PathBuf,
    /// Directory of `frame_%04d.png` files.
    pub frames_dir: PathBuf,
    /// Annotated reference frame; defaults to the first frame of `frames_dir`.
    pub reference_frame: Option<PathBuf>,
    /// Trajectory document written by `project`, read by `condition` and `evaluate`.
    pub trajectories: Option<PathBuf>,
    /// Seconds to subtract from log timestamps to reach video time.
    pub offset_s: f64,
    /// Video time of the reference frame, seconds.
    pub t_start: f64,
    pub fps: f64,
    pub n_frames: usize,
    pub width: u32,
    pub height: u32,
    /// Compass bearing of the frame's up direction, degrees.
    pub theta_deg: f64,
    /// Pixels per metre; estimated from the two vessel centres when absent.
    pub scale_px_per_m: Option<f64>,
    pub vessels: Vec<VesselCentre>,
    pub vessel_box_px: f64,
    pub corner_box_px: f64,
    pub corner_inset_px: f64,
    pub flow: FlowParams,
    pub track: TrackParams,
    /// Geographic position of the image centre for `synth`.
    pub synth_lon: f64,
    pub synth_lat: f64,
    /// Scale used by `synth` to emit GPS.
    pub synth_scale_px_per_m: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            telemetry: "telemetry.csv".into(),
            frames_dir: "frames".into(),
            reference_frame: None,
            trajectories: None,
            offset_s: 21.0,
            t_start: 0.0,
            fps: 7.0,
            n_frames: 14,
            width: 1024,
            height: 576,
            theta_deg: 100.0,
            scale_px_per_m: None,
            vessels: Vec::new(),
            vessel_box_px: seawake::conditioning::DEFAULT_VESSEL_BOX_PX,
            corner_box_px: seawake::conditioning::DEFAULT_CORNER_BOX_PX,
            corner_inset_px: seawake::conditioning::DEFAULT_CORNER_INSET_PX,
            flow: FlowParams::default(),
            track: TrackParams::default(),
            synth_lon: 23.65,
            synth_lat: 37.94,
            synth_scale_px_per_m: 28.3,
        }
    }
}

impl PipelineConfig {
    /// Reads a config and makes its paths absolute.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read(path).with_context(|| format!("config: cannot read {}", path.display()))?;
        let de = &mut serde_json::Deserializer::from_slice(&text);
        let mut cfg: PipelineConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| anyhow::anyhow!("config: {} at `{}`", e.inner(), e.path()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.telemetry);
        fix(&mut self.frames_dir);
        if let Some(p) = self.reference_frame.as_mut() {
            fix(p);
        }
        if let Some(p) = self.trajectories.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.offset_s.is_finite() || !self.t_start.is_finite() {
            bail!("config: offset_s and t_start must be finite");
        }
        self.timing()?;
        if let Some(s) = self.scale_px_per_m {
            if !(s > 0.0 && s.is_finite()) {
                bail!("config: scale_px_per_m must be positive, got {s}");
            }
        }
        self.flow.validate().map_err(seawake::Error::from).context("config: flow")?;
        self.track.validate().map_err(seawake::Error::from).context("config: track")?;
        Ok(())
    }

    pub fn timing(&self) -> Result<ClipTiming> {
        ClipTiming::new(self.t_start, self.fps, self.n_frames, self.width, self.height)
            .map_err(|e| anyhow::Error::from(seawake::Error::from(e)))
    }

    /// `--vessel` flags replace the configured centres.
    pub fn apply_vessel_flags(&mut self, flags: &[String]) -> Result<()> {
        if flags.is_empty() {
            return Ok(());
        }
        self.vessels = flags.iter().map(|f| parse_vessel_flag(f)).collect::<Result<_>>()?;
        Ok(())
    }

    pub fn centres(&self) -> Vec<(VesselId, Pixel)> {
        self.vessels.iter().map(|v| (v.id, v.center)).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config is always serialisable");
        s.push('\n');
        s
    }
}

/// Parses `id:cx,cy`.
pub fn parse_vessel_flag(flag: &str) -> Result<VesselCentre> {
    let parse = || -> Option<VesselCentre> {
        let (id, xy) = flag.split_once(':')?;
        let (x, y) = xy.split_once(',')?;
        Some(VesselCentre {
            id: id.trim().parse().ok()?,
            center: Pixel::new(x.trim().parse().ok()?, y.trim().parse().ok()?),
        })
    };
    parse().with_context(|| format!("config: bad --vessel `{flag}`, expected id:cx,cy"))
}
