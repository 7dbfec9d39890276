//! Synthetic maritime-like clips with exact ground truth.
//!
//! A [`MotionScript`] moves Gaussian-blob vessels over drifting value-noise
//! water. The matching GPS log is produced by inverse projection through a
//! [`CameraFrameModel`], so projecting the log forward reproduces the
//! scripted pixel paths.
//!
//! Script documents look like
//!
//! ```json
//! {"vessels": [{"id": 1, "waypoints": [[0.0, 100.0, 200.0], [2.0, 128.0, 200.0]],
//!               "radius_px": 6.0}],
//!  "background": {"seed": 7, "octaves": 4, "drift": [0.0, 0.0]}}
//! ```
//!
//! Waypoint times share the clock of [`ClipTiming::t_start`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flowlab::Frame;
use crate::geoproject::{
    self, inverse_project, make_origin, Anchor, CameraFrameModel, ClipTiming, GeoError, LocalOrigin, Pixel,
    PixelTrajectory,
};
use crate::par;
use crate::telemetry::{self, GeoFix, TelemetryError, TelemetryLog, VesselId};

/// GPS emission interval, seconds.
pub const GPS_INTERVAL_S: f64 = 1.0;
const DEFAULT_INTENSITY: f64 = 0.95;
const DEFAULT_AMPLITUDE: f64 = 0.08;
/// Lattice spacing of the coarsest noise octave, pixels.
const NOISE_CELL_PX: f64 = 24.0;
const WATER_RGB: [f64; 3] = [0.12, 0.28, 0.36];
/// Ratio of blob width across the direction of travel to the radius.
const ACROSS_RATIO: f64 = 0.7;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid script: {0}")]
    Script(String),
    #[error("script parse error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("vessel {vessel}: t = {t} outside waypoint span [{first}, {last}]")]
    OutOfRange { vessel: VesselId, t: f64, first: f64, last: f64 },
    #[error("{0}")]
    Contract(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Waypoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 3]> for Waypoint {
    fn from([t, x, y]: [f64; 3]) -> Self {
        Self { t, x, y }
    }
}

impl From<Waypoint> for [f64; 3] {
    fn from(w: Waypoint) -> Self {
        [w.t, w.x, w.y]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselScript {
    pub id: VesselId,
    pub waypoints: Vec<Waypoint>,
    pub radius_px: f64,
    /// Peak blob brightness in `[0, 1]`.
    #[serde(default = "default_intensity")]
    pub intensity: f64,
}

fn default_intensity() -> f64 {
    DEFAULT_INTENSITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub seed: u64,
    pub octaves: u32,
    /// Uniform water drift, pixels per frame.
    pub drift: [f64; 2],
    /// Peak-to-peak noise contrast.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    DEFAULT_AMPLITUDE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionScript {
    pub vessels: Vec<VesselScript>,
    pub background: Background,
}

impl MotionScript {
    pub fn from_json(bytes: &[u8]) -> Result<Self, SynthError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let script: MotionScript = serde_path_to_error::deserialize(de).map_err(|e| SynthError::Schema {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })?;
        script.validate()?;
        Ok(script)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("script is always serialisable");
        s.push('\n');
        s
    }

    /// Checks the script on its own; frame bounds are checked against a
    /// clip in [`generate_scene`].
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.vessels.is_empty() {
            return Err(SynthError::Script("no vessels".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &self.vessels {
            if !seen.insert(v.id) {
                return Err(SynthError::Script(format!("vessel {} listed twice", v.id)));
            }
            if v.waypoints.is_empty() {
                return Err(SynthError::Script(format!("vessel {} has no waypoints", v.id)));
            }
            if v.waypoints.iter().any(|w| !(w.t.is_finite() && w.x.is_finite() && w.y.is_finite())) {
                return Err(SynthError::Script(format!("vessel {} has a non-finite waypoint", v.id)));
            }
            if v.waypoints.windows(2).any(|w| !(w[0].t < w[1].t)) {
                return Err(SynthError::Script(format!(
                    "vessel {} waypoint times must strictly increase",
                    v.id
                )));
            }
            if !(v.radius_px > 0.0 && v.radius_px.is_finite()) {
                return Err(SynthError::Script(format!("vessel {} radius must be positive", v.id)));
            }
            if !(0.0..=1.0).contains(&v.intensity) {
                return Err(SynthError::Script(format!("vessel {} intensity outside [0, 1]", v.id)));
            }
        }
        let bg = &self.background;
        if bg.octaves == 0 || bg.octaves > 16 {
            return Err(SynthError::Script(format!("octaves must lie in 1..=16, got {}", bg.octaves)));
        }
        if !bg.drift.iter().all(|d| d.is_finite()) || !(0.0..=1.0).contains(&bg.amplitude) {
            return Err(SynthError::Script("drift must be finite and amplitude in [0, 1]".into()));
        }
        Ok(())
    }

    fn vessel(&self, id: VesselId) -> Result<&VesselScript, SynthError> {
        self.vessels
            .iter()
            .find(|v| v.id == id)
            .ok_or_else(|| SynthError::Contract(format!("vessel {id} is not in the script")))
    }
}

/// Piecewise-linear position of `vessel` at time `t`.
pub fn interpolate_script(script: &MotionScript, vessel: VesselId, t: f64) -> Result<Pixel, SynthError> {
    let wps = &script.vessel(vessel)?.waypoints;
    let (first, last) = (wps[0], wps[wps.len() - 1]);
    if !(t >= first.t && t <= last.t) {
        return Err(SynthError::OutOfRange {
            vessel,
            t,
            first: first.t,
            last: last.t,
        });
    }
    let k = wps.partition_point(|w| w.t <= t);
    if k == 0 || wps[k - 1].t == t {
        let w = wps[k.saturating_sub(1)];
        return Ok(Pixel::new(w.x, w.y));
    }
    let (a, b) = (wps[k - 1], wps[k]);
    let u = (t - a.t) / (b.t - a.t);
    Ok(Pixel::new(a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)))
}

/// Velocity of `vessel` at `t`, pixels per second (right-hand segment at
/// knots, zero for a single waypoint).
fn script_velocity(v: &VesselScript, t: f64) -> (f64, f64) {
    let wps = &v.waypoints;
    if wps.len() < 2 {
        return (0.0, 0.0);
    }
    let k = wps.partition_point(|w| w.t <= t).clamp(1, wps.len() - 1);
    let (a, b) = (wps[k - 1], wps[k]);
    let dt = b.t - a.t;
    ((b.x - a.x) / dt, (b.y - a.y) / dt)
}

pub struct Scene {
    pub frames: Vec<Frame>,
    pub log: TelemetryLog,
    pub ground_truth: Vec<PixelTrajectory>,
}

/// Renders the clip, emits its GPS log and samples the exact pixel paths.
pub fn generate_scene(script: &MotionScript, timing: &ClipTiming, model: &CameraFrameModel) -> Result<Scene, SynthError> {
    script.validate()?;
    timing.validate()?;
    if model.timing() != timing {
        return Err(SynthError::Contract("model was built for a different clip timing".into()));
    }
    for v in &script.vessels {
        model.anchor(v.id).map_err(|_| SynthError::Contract(format!("vessel {} has no model anchor", v.id)))?;
        for w in &v.waypoints {
            if !timing.contains(Pixel::new(w.x, w.y)) {
                return Err(SynthError::Script(format!(
                    "vessel {} waypoint ({}, {}) lies outside the {}x{} frame",
                    v.id, w.x, w.y, timing.width, timing.height
                )));
            }
        }
    }

    let mut ground_truth = Vec::with_capacity(script.vessels.len());
    for v in &script.vessels {
        let mut points = Vec::with_capacity(timing.n_frames);
        let mut timestamps = Vec::with_capacity(timing.n_frames);
        for i in 0..timing.n_frames {
            let t = timing.frame_time(i);
            points.push(interpolate_script(script, v.id, t)?);
            timestamps.push(t);
        }
        ground_truth.push(PixelTrajectory {
            vessel_id: v.id,
            points,
            timestamps,
        });
    }

    let log = emit_log(script, model)?;
    let frames = par::map_indices(timing.n_frames, |i| render_frame(script, timing, i));
    let frames = frames.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(Scene {
        frames,
        log,
        ground_truth,
    })
}

/// Emission times: a 1 Hz grid from the first waypoint, every waypoint
/// time (so the log stays exact across corners) and the last waypoint.
fn emission_times(v: &VesselScript) -> Vec<f64> {
    let (t0, t1) = (v.waypoints[0].t, v.waypoints[v.waypoints.len() - 1].t);
    let mut times: Vec<f64> = (0..)
        .map(|k| t0 + k as f64 * GPS_INTERVAL_S)
        .take_while(|&t| t < t1)
        .chain(v.waypoints.iter().map(|w| w.t))
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    times
}

fn emit_log(script: &MotionScript, model: &CameraFrameModel) -> Result<TelemetryLog, SynthError> {
    let mut fixes = Vec::new();
    for v in &script.vessels {
        for t in emission_times(v) {
            let p = interpolate_script(script, v.id, t)?;
            fixes.push(inverse_project(p, t, model, v.id)?);
        }
    }
    Ok(TelemetryLog::from_fixes(fixes)?)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn lattice(seed: u64, octave: u32, ix: i64, iy: i64) -> f64 {
    let h = splitmix(seed ^ splitmix(u64::from(octave) ^ splitmix((ix as u64) ^ splitmix(iy as u64))));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

/// Multi-octave value noise in `[-0.5, 0.5]`.
pub fn value_noise(bg: &Background, x: f64, y: f64) -> f64 {
    let (mut total, mut norm, mut amp, mut cell) = (0.0, 0.0, 1.0, NOISE_CELL_PX);
    for o in 0..bg.octaves {
        let (gx, gy) = (x / cell, y / cell);
        let (fx, fy) = (gx.floor(), gy.floor());
        let (ix, iy) = (fx as i64, fy as i64);
        let (u, v) = (fade(gx - fx), fade(gy - fy));
        let c = |dx, dy| lattice(bg.seed, o, ix + dx, iy + dy);
        let top = c(0, 0) + u * (c(1, 0) - c(0, 0));
        let bottom = c(0, 1) + u * (c(1, 1) - c(0, 1));
        total += amp * (top + v * (bottom - top));
        norm += amp;
        amp *= 0.5;
        cell *= 0.5;
    }
    total / norm - 0.5
}

/// Water brightness at pixel `(x, y)` of frame `i`; a pure function of its
/// arguments and the background settings.
pub fn water(bg: &Background, x: f64, y: f64, i: usize) -> f64 {
    let n = value_noise(bg, x - i as f64 * bg.drift[0], y - i as f64 * bg.drift[1]);
    bg.amplitude * n
}

fn render_frame(script: &MotionScript, timing: &ClipTiming, i: usize) -> Result<Frame, SynthError> {
    let (w, h) = (timing.width as usize, timing.height as usize);
    let t = timing.frame_time(i);
    struct Blob {
        c: Pixel,
        dir: (f64, f64),
        along: f64,
        across: f64,
        intensity: f64,
    }
    let blobs = script
        .vessels
        .iter()
        .map(|v| {
            let (vx, vy) = script_velocity(v, t);
            let speed = vx.hypot(vy);
            Ok(Blob {
                c: interpolate_script(script, v.id, t)?,
                dir: if speed > 0.0 { (vx / speed, vy / speed) } else { (1.0, 0.0) },
                along: v.radius_px,
                across: v.radius_px * ACROSS_RATIO,
                intensity: v.intensity,
            })
        })
        .collect::<Result<Vec<_>, SynthError>>()?;

    let bg = &script.background;
    let mut samples = vec![0.0; w * h * 3];
    par::for_each_row(&mut samples, w * 3, |y, row| {
        for x in 0..w {
            let (px, py) = (x as f64, y as f64);
            let n = water(bg, px, py, i);
            let mut rgb = WATER_RGB.map(|c| c + n);
            for b in &blobs {
                let (dx, dy) = (px - b.c.x, py - b.c.y);
                let a = dx * b.dir.0 + dy * b.dir.1;
                let c = -dx * b.dir.1 + dy * b.dir.0;
                let q = (a / b.along).powi(2) + (c / b.across).powi(2);
                if q > 40.0 {
                    continue;
                }
                let alpha = (-0.5 * q).exp();
                for ch in &mut rgb {
                    *ch = *ch * (1.0 - alpha) + b.intensity * alpha;
                }
            }
            for c in 0..3 {
                row[x * 3 + c] = rgb[c].clamp(0.0, 1.0);
            }
        }
    });
    Frame::new(w, h, 3, samples).map_err(|e| SynthError::Contract(e.to_string()))
}

/// Builds a camera model for a script in which the image centre sits at
/// `(geo_lon, geo_lat)` and every vessel is anchored at its scripted
/// position at `timing.t_start`.
///
/// The model origin is chosen so that it equals the mean of the emitted
/// log over the clip window, which is what a model rebuilt from that log
/// would use; projecting the log then reproduces the script exactly.
pub fn synth_model(
    script: &MotionScript,
    timing: &ClipTiming,
    geo_lon: f64,
    geo_lat: f64,
    theta_deg: f64,
    scale: f64,
) -> Result<CameraFrameModel, SynthError> {
    script.validate()?;
    timing.validate()?;
    let centre = Pixel::new(f64::from(timing.width) / 2.0, f64::from(timing.height) / 2.0);
    let mut origin = LocalOrigin::new(geo_lon, geo_lat)?;
    let mut model = None;
    for _ in 0..32 {
        let mut anchors = BTreeMap::new();
        for v in &script.vessels {
            let center = interpolate_script(script, v.id, timing.t_start)?;
            let en = geoproject::unrotate_frame(
                (center.x - centre.x) / scale,
                -(center.y - centre.y) / scale,
                theta_deg,
            );
            let fix = GeoFix::new(
                v.id,
                timing.t_start,
                geo_lon + en.e / origin.m_lon(),
                geo_lat + en.n / origin.m_lat(),
            );
            anchors.insert(v.id, Anchor { center, fix });
        }
        let m = CameraFrameModel::new(origin, theta_deg, scale, anchors, *timing)?;
        let log = emit_log(script, &m)?;
        let windowed = telemetry::window(&log, timing.t_start, timing.t_end())?;
        let next = make_origin(&windowed)?;
        let settled = next.lon() == origin.lon() && next.lat() == origin.lat();
        model = Some(m);
        if settled {
            break;
        }
        origin = next;
    }
    Ok(model.expect("at least one iteration runs"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geoproject::project_trajectory;

    fn timing() -> ClipTiming {
        ClipTiming::new(0.0, 7.0, 14, 320, 192).unwrap()
    }

    fn linear_script() -> MotionScript {
        // 2 px/frame at 7 fps is 14 px/s
        MotionScript {
            vessels: vec![
                VesselScript {
                    id: 1,
                    waypoints: vec![[-1.0, 90.0, 100.0].into(), [3.0, 146.0, 100.0].into()],
                    radius_px: 5.0,
                    intensity: 0.95,
                },
                VesselScript {
                    id: 2,
                    waypoints: vec![[-1.0, 220.0, 140.0].into(), [3.0, 220.0, 84.0].into()],
                    radius_px: 5.0,
                    intensity: 0.9,
                },
            ],
            background: Background {
                seed: 11,
                octaves: 4,
                drift: [0.0, 0.0],
                amplitude: 0.08,
            },
        }
    }

    #[test]
    fn interpolation_examples() {
        let s = MotionScript {
            vessels: vec![VesselScript {
                id: 5,
                waypoints: vec![[0.0, 0.0, 0.0].into(), [1.0, 10.0, 20.0].into(), [3.0, 10.0, 0.0].into()],
                radius_px: 3.0,
                intensity: 1.0,
            }],
            background: linear_script().background,
        };
        assert_eq!(interpolate_script(&s, 5, 1.0).unwrap(), Pixel::new(10.0, 20.0));
        assert_eq!(interpolate_script(&s, 5, 3.0).unwrap(), Pixel::new(10.0, 0.0));
        assert_eq!(interpolate_script(&s, 5, 0.5).unwrap(), Pixel::new(5.0, 10.0));
        assert_eq!(interpolate_script(&s, 5, 0.25).unwrap(), Pixel::new(2.5, 5.0));
        assert!(matches!(interpolate_script(&s, 5, 3.5), Err(SynthError::OutOfRange { .. })));
        assert!(matches!(interpolate_script(&s, 6, 0.5), Err(SynthError::Contract(_))));
    }

    #[test]
    fn script_json_round_trip_and_validation() {
        let s = linear_script();
        let back = MotionScript::from_json(s.to_json().as_bytes()).unwrap();
        assert_eq!(back, s);

        let minimal = br#"{"vessels":[{"id":3,"waypoints":[[0,1,2],[1,2,3]],"radius_px":4}],
                           "background":{"seed":1,"octaves":2,"drift":[0.5,0]}}"#;
        let m = MotionScript::from_json(minimal).unwrap();
        assert_eq!(m.vessels[0].intensity, DEFAULT_INTENSITY);
        assert_eq!(m.background.amplitude, DEFAULT_AMPLITUDE);

        let bad = br#"{"vessels":[{"id":3,"waypoints":[[1,1,2],[1,2,3]],"radius_px":4}],
                       "background":{"seed":1,"octaves":2,"drift":[0,0]}}"#;
        assert!(matches!(MotionScript::from_json(bad), Err(SynthError::Script(_))));
        let typo = br#"{"vessels":[{"id":3,"waypoints":[[0,1]],"radius_px":4}],
                        "background":{"seed":1,"octaves":2,"drift":[0,0]}}"#;
        let err = MotionScript::from_json(typo).unwrap_err();
        assert!(err.to_string().contains("vessels[0].waypoints[0]"), "{err}");
    }

    #[test]
    fn emitted_log_projects_back_onto_script() {
        let s = linear_script();
        let t = timing();
        let model = synth_model(&s, &t, 23.7, 37.9, 100.0, 28.3).unwrap();
        let scene = generate_scene(&s, &t, &model).unwrap();

        // Rebuild the model the way a consumer of the log would.
        let windowed = telemetry::window(&scene.log, t.t_start, t.t_end()).unwrap();
        let centres: Vec<(VesselId, Pixel)> = scene.ground_truth.iter().map(|g| (g.vessel_id, g.points[0])).collect();
        let (rebuilt, est) = CameraFrameModel::from_log(&windowed, 100.0, None, t, &centres).unwrap();
        assert!((est.unwrap().px_per_m - 28.3).abs() < 1e-6);
        for gt in &scene.ground_truth {
            let p = project_trajectory(&windowed, gt.vessel_id, &rebuilt).unwrap();
            for (a, b) in p.points.iter().zip(&gt.points) {
                assert!(a.distance(*b) < 1e-4, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn gps_runs_at_one_hertz() {
        let s = linear_script();
        let times = emission_times(&s.vessels[0]);
        assert_eq!(times, vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn static_script_gives_static_frames_and_track() {
        let mut s = linear_script();
        for v in &mut s.vessels {
            let w = v.waypoints[0];
            v.waypoints = vec![w, Waypoint { t: 3.0, ..w }];
        }
        let t = timing();
        let model = synth_model(&s, &t, 10.0, 50.0, 100.0, 20.0).unwrap();
        let scene = generate_scene(&s, &t, &model).unwrap();
        assert!(scene.frames.iter().all(|f| *f == scene.frames[0]));
        for gt in &scene.ground_truth {
            let p = project_trajectory(&scene.log, gt.vessel_id, &model).unwrap();
            assert!(p.points.iter().all(|q| q.distance(gt.points[0]) < 1e-6));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let s = linear_script();
        let t = timing();
        let model = synth_model(&s, &t, 23.7, 37.9, 100.0, 28.3).unwrap();
        let a = generate_scene(&s, &t, &model).unwrap();
        let b = generate_scene(&s, &t, &model).unwrap();
        assert!(a.frames.iter().zip(&b.frames).all(|(x, y)| {
            x.samples().iter().zip(y.samples()).all(|(p, q)| p.to_bits() == q.to_bits())
        }));
        assert_eq!(telemetry::write_log(&a.log), telemetry::write_log(&b.log));
    }

    #[test]
    fn blobs_have_well_conditioned_structure() {
        let s = linear_script();
        let t = timing();
        let model = synth_model(&s, &t, 23.7, 37.9, 100.0, 28.3).unwrap();
        let scene = generate_scene(&s, &t, &model).unwrap();
        let plane = scene.frames[0].luma_plane();
        let (gx, gy) = plane.gradients();
        for gt in &scene.ground_truth {
            let c = gt.points[0];
            let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
            for j in -10..=10 {
                for i in -10..=10 {
                    let (x, y) = (c.x + i as f64, c.y + j as f64);
                    let (ix, iy) = (gx.sample(x, y), gy.sample(x, y));
                    a += ix * ix;
                    b += ix * iy;
                    d += iy * iy;
                }
            }
            let disc = ((a - d).powi(2) + 4.0 * b * b).sqrt();
            let (lmax, lmin) = (0.5 * (a + d + disc), 0.5 * (a + d - disc));
            assert!(lmin > 0.0 && lmax / lmin < 5.0, "condition {}", lmax / lmin);
        }
    }

    #[test]
    fn contract_errors() {
        let s = linear_script();
        let t = timing();
        let model = synth_model(&s, &t, 23.7, 37.9, 100.0, 28.3).unwrap();
        let other = ClipTiming::new(0.0, 7.0, 10, 320, 192).unwrap();
        assert!(matches!(generate_scene(&s, &other, &model), Err(SynthError::Contract(_))));
        let mut extra = s.clone();
        extra.vessels.push(VesselScript { id: 9, ..s.vessels[0].clone() });
        assert!(matches!(generate_scene(&extra, &t, &model), Err(SynthError::Contract(_))));
        let mut short = s;
        short.vessels[0].waypoints[1].t = 1.0;
        assert!(matches!(generate_scene(&short, &t, &model), Err(SynthError::OutOfRange { .. })));
    }

    #[test]
    fn noise_is_bounded_and_drifts() {
        let bg = Background { seed: 3, octaves: 5, drift: [1.5, -0.5], amplitude: 0.1 };
        for k in 0..200 {
            let (x, y) = (k as f64 * 3.7, k as f64 * 1.3);
            let n = value_noise(&bg, x, y);
            assert!((-0.5..=0.5).contains(&n));
            assert_eq!(water(&bg, x + 3.0, y - 1.0, 2), water(&bg, x, y, 0));
        }
    }
}
