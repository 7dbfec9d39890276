use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use seawake::conditioning::{build_payload, render_overlay, serialize_payload, vessel_box, ConditioningPayload};
use seawake::flowlab::extrapolate_sequence;
use seawake::geoproject::{project_trajectory, CameraFrameModel};
use seawake::metrics::{evaluate_method, render_table, EvaluationReport};
use seawake::synthscene::{generate_scene, synth_model, MotionScript};
use seawake::telemetry::{align, parse_log, window, write_log};
use seawake::{Error, Pixel, PixelTrajectory};
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, VesselCentre};
use crate::frames_io::{frame_name, read_frame, read_sequence, write_frame, write_sequence};

pub const TRAJECTORIES_FILE: &str = "trajectories.json";
pub const PAYLOAD_FILE: &str = "payload.json";
pub const OVERLAY_FILE: &str = "overlay.png";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TABLE: &str = "report.txt";
pub const BASELINE_DIR: &str = "baseline";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

/// Resolved settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Session {
    pub config: PipelineConfig,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
}

/// Projected pixel paths plus the camera constants that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDoc {
    pub scale_px_per_m: f64,
    pub theta_deg: f64,
    pub trajectories: Vec<PixelTrajectory>,
}

impl TrajectoryDoc {
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("io: cannot read {}", path.display()))?;
        let de = &mut serde_json::Deserializer::from_slice(&bytes);
        serde_path_to_error::deserialize(de)
            .map_err(|e| anyhow::anyhow!("io: {}: {} at `{}`", path.display(), e.inner(), e.path()))
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("documents are always serialisable");
    text.push('\n');
    write_text(&text, path)
}

fn write_text(text: &str, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("io: cannot create {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("io: cannot write {}", path.display()))
}

impl Session {
    fn trajectories_path(&self) -> PathBuf {
        self.config
            .trajectories
            .clone()
            .unwrap_or_else(|| self.out_dir.join(TRAJECTORIES_FILE))
    }

    fn reference_frame_path(&self) -> PathBuf {
        self.config
            .reference_frame
            .clone()
            .unwrap_or_else(|| self.config.frames_dir.join(frame_name(1)))
    }

    fn load_or_project(&self) -> Result<TrajectoryDoc> {
        let path = self.trajectories_path();
        if path.exists() {
            TrajectoryDoc::read(&path)
        } else {
            self.project()
        }
    }

    /// Projects every configured vessel's GPS track onto the clip's frames
    /// and writes the trajectory document.
    pub fn project(&self) -> Result<TrajectoryDoc> {
        let cfg = &self.config;
        let timing = cfg.timing()?;
        let centres = cfg.centres();
        if centres.is_empty() {
            bail!("config: no vessel centres given (use --vessel id:cx,cy)");
        }
        let file = File::open(&cfg.telemetry)
            .with_context(|| format!("io: cannot open telemetry {}", cfg.telemetry.display()))?;
        let log = parse_log(file).map_err(Error::from)?;
        let aligned = align(&log, cfg.offset_s);
        let windowed = window(&aligned, timing.t_start, timing.t_end()).map_err(Error::from)?;
        let (model, estimate) = CameraFrameModel::from_log(&windowed, cfg.theta_deg, cfg.scale_px_per_m, timing, &centres)
            .map_err(Error::from)?;
        if let Some(est) = estimate {
            println!(
                "scale: {:.6} px/m ({:.3} px over {:.3} m)",
                est.px_per_m, est.pixel_distance, est.metre_distance
            );
        } else {
            println!("scale: {:.6} px/m (configured)", model.scale());
        }
        let trajectories = centres
            .iter()
            .map(|&(id, _)| project_trajectory(&windowed, id, &model).map_err(Error::from))
            .collect::<Result<Vec<_>, _>>()?;
        let doc = TrajectoryDoc {
            scale_px_per_m: model.scale(),
            theta_deg: cfg.theta_deg,
            trajectories,
        };
        let path = self.out_dir.join(TRAJECTORIES_FILE);
        write_json(&doc, &path)?;
        println!("wrote {}", path.display());
        Ok(doc)
    }

    /// Builds and writes the six-entry payload, optionally with an overlay
    /// of it drawn on the reference frame.
    pub fn condition(&self, overlay: bool) -> Result<ConditioningPayload> {
        let cfg = &self.config;
        let timing = cfg.timing()?;
        let doc = self.load_or_project()?;
        let [a, b] = doc.trajectories.as_slice() else {
            bail!("contract: conditioning needs exactly two vessels, got {}", doc.trajectories.len());
        };
        let centre_of = |t: &PixelTrajectory| -> Pixel {
            cfg.vessels
                .iter()
                .find(|v| v.id == t.vessel_id)
                .map(|v| v.center)
                .or_else(|| t.points.first().copied())
                .unwrap_or(Pixel::new(f64::NAN, f64::NAN))
        };
        let boxes = [a, b]
            .map(|t| vessel_box(centre_of(t), cfg.vessel_box_px, &timing).map_err(Error::from));
        let [ba, bb] = boxes;
        let reference = self.reference_frame_path();
        let reference_name = reference
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| frame_name(1));
        let payload = build_payload(
            &timing,
            [(ba?, a), (bb?, b)],
            cfg.corner_box_px,
            cfg.corner_inset_px,
            &reference_name,
        )
        .map_err(Error::from)?;
        for (e, i) in payload.out_of_frame_points() {
            eprintln!("warning: entry {e} point {i} lies outside the frame");
        }
        let path = self.out_dir.join(PAYLOAD_FILE);
        let bytes = serialize_payload(&payload);
        std::fs::create_dir_all(&self.out_dir).with_context(|| format!("io: cannot create {}", self.out_dir.display()))?;
        std::fs::write(&path, bytes).with_context(|| format!("io: cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
        if overlay {
            let frame = read_frame(&reference)?;
            let drawn = render_overlay(&frame, &payload).map_err(Error::from)?;
            let path = self.out_dir.join(OVERLAY_FILE);
            write_frame(&drawn, &path)?;
            println!("wrote {}", path.display());
        }
        Ok(payload)
    }

    /// Fills the gap between two bounding frames by flow extrapolation,
    /// writing `frame_0002.png` onwards.
    pub fn baseline(&self, first: Option<PathBuf>, last: Option<PathBuf>, n: usize) -> Result<Vec<PathBuf>> {
        if n == 0 {
            bail!("contract: baseline needs at least one missing frame");
        }
        let cfg = &self.config;
        let first = first.unwrap_or_else(|| cfg.frames_dir.join(frame_name(1)));
        let last = last.unwrap_or_else(|| cfg.frames_dir.join(frame_name(n + 2)));
        let (f0, f1) = (read_frame(&first)?, read_frame(&last)?);
        let frames = extrapolate_sequence(&f0, &f1, n, &cfg.flow).map_err(Error::from)?;
        let dir = self.out_dir.join(BASELINE_DIR);
        let paths = write_sequence(&frames, &dir, 2)?;
        println!("wrote {} frames to {}", paths.len(), dir.display());
        Ok(paths)
    }

    /// Tracks the vessels through `generated`, scores them against the
    /// projected trajectories and writes the report and its table.
    pub fn evaluate(&self, generated: &Path, method: &str, reference_frames: Option<&Path>) -> Result<EvaluationReport> {
        let cfg = &self.config;
        let frames = read_sequence(generated)?;
        let doc = self.load_or_project()?;
        let seeds: Vec<_> = doc
            .trajectories
            .iter()
            .map(|t| {
                let c = cfg.vessels.iter().find(|v| v.id == t.vessel_id).map(|v| v.center);
                (t.vessel_id, c.or_else(|| t.points.first().copied()).unwrap_or(Pixel::new(0.0, 0.0)))
            })
            .collect();
        let refs = reference_frames.map(read_sequence).transpose()?;
        let report = evaluate_method(
            method,
            &frames,
            &doc.trajectories,
            &seeds,
            refs.as_deref(),
            &cfg.flow,
            &cfg.track,
        )
        .map_err(Error::from)?;
        let table = render_table(std::slice::from_ref(&report));
        write_text(&report.to_json(), &self.out_dir.join(REPORT_JSON))?;
        write_text(&table, &self.out_dir.join(REPORT_TABLE))?;
        print!("{table}");
        Ok(report)
    }

    /// Renders a scripted scene and writes its frames, GPS log, ground
    /// truth and a config that runs the rest of the pipeline on it.
    pub fn synth(&self, script_path: &Path) -> Result<()> {
        let cfg = &self.config;
        let bytes = std::fs::read(script_path).with_context(|| format!("io: cannot read script {}", script_path.display()))?;
        let mut script = MotionScript::from_json(&bytes).map_err(Error::from)?;
        if let Some(seed) = self.seed {
            script.background.seed = seed;
        }
        let timing = cfg.timing()?;
        let model = synth_model(&script, &timing, cfg.synth_lon, cfg.synth_lat, cfg.theta_deg, cfg.synth_scale_px_per_m)
            .map_err(Error::from)?;
        let scene = generate_scene(&script, &timing, &model).map_err(Error::from)?;

        write_sequence(&scene.frames, &self.out_dir.join("frames"), 1)?;
        write_text(&write_log(&align(&scene.log, -cfg.offset_s)), &self.out_dir.join("telemetry.csv"))?;
        write_json(
            &TrajectoryDoc {
                scale_px_per_m: model.scale(),
                theta_deg: cfg.theta_deg,
                trajectories: scene.ground_truth.clone(),
            },
            &self.out_dir.join(GROUND_TRUTH_FILE),
        )?;
        let emitted = PipelineConfig {
            telemetry: "telemetry.csv".into(),
            frames_dir: "frames".into(),
            reference_frame: None,
            trajectories: None,
            scale_px_per_m: None,
            vessels: scene
                .ground_truth
                .iter()
                .map(|g| VesselCentre {
                    id: g.vessel_id,
                    center: g.points[0],
                })
                .collect(),
            ..cfg.clone()
        };
        write_text(&emitted.to_json(), &self.out_dir.join("config.json"))?;
        println!("wrote {} frames and {} fixes to {}", scene.frames.len(), scene.log.len(), self.out_dir.display());
        Ok(())
    }
}
