//! GPS-to-pixel mapping for a near-nadir, near-stationary camera.
//!
//! A fix is taken to a local East-North offset with an equirectangular
//! approximation around the mean log position, rotated by the camera yaw
//! into image axes, scaled by a pixels-per-metre factor and offset from a
//! hand-annotated anchor pixel. Image `y` grows downward, so the metric
//! "up" component enters with a flipped sign. [`inverse_project`] is the
//! exact algebraic inverse of that chain.

use std::collections::BTreeMap;
use std::ops::Sub;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::telemetry::{self, GeoFix, TelemetryError, TelemetryLog, VesselId};

/// Metres per degree along a meridian.
pub const METRES_PER_DEG_LAT: f64 = 111_320.0;

/// Smallest inter-vessel distance that can support a scale estimate.
pub const MIN_SCALE_BASELINE_M: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("cannot build an origin from an empty log")]
    EmptyLog,
    #[error("origin latitude {0} must satisfy |lat| < 90")]
    InvalidOrigin(f64),
    #[error("inter-vessel distance {metres} m is below {epsilon} m; scale undefined")]
    ScaleUndefined { metres: f64, epsilon: f64 },
    #[error("annotated vessel centres coincide; scale would be zero")]
    DegenerateAnnotation,
    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("anchor for vessel {vessel} at ({x}, {y}) lies outside the {width}x{height} frame")]
    AnchorOutsideFrame {
        vessel: VesselId,
        x: f64,
        y: f64,
        width: u32,
        height: u32,
    },
    #[error("invalid clip timing: {0}")]
    InvalidTiming(String),
    #[error("no anchor for vessel {0}")]
    UnknownVessel(VesselId),
    #[error("scale estimation needs exactly two annotated vessels, got {0}")]
    NeedTwoVessels(usize),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
}

/// A point in image coordinates (`x` right, `y` down), pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Pixel {
    pub x: f64,
    pub y: f64,
}

impl Pixel {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Pixel) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Pixel {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Pixel> for [f64; 2] {
    fn from(p: Pixel) -> Self {
        [p.x, p.y]
    }
}

/// Reference point of the local metric frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOrigin {
    lon_bar: f64,
    lat_bar: f64,
    m_lat: f64,
    m_lon: f64,
}

impl LocalOrigin {
    pub fn new(lon_bar: f64, lat_bar: f64) -> Result<Self, GeoError> {
        if !(lat_bar.abs() < 90.0) || !lon_bar.is_finite() {
            return Err(GeoError::InvalidOrigin(lat_bar));
        }
        Ok(Self {
            lon_bar,
            lat_bar,
            m_lat: METRES_PER_DEG_LAT,
            m_lon: METRES_PER_DEG_LAT * lat_bar.to_radians().cos(),
        })
    }

    pub fn lon(&self) -> f64 {
        self.lon_bar
    }

    pub fn lat(&self) -> f64 {
        self.lat_bar
    }

    /// Metres per degree of latitude.
    pub fn m_lat(&self) -> f64 {
        self.m_lat
    }

    /// Metres per degree of longitude at the origin latitude.
    pub fn m_lon(&self) -> f64 {
        self.m_lon
    }
}

/// Metres east and north of a [`LocalOrigin`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EastNorth {
    pub e: f64,
    pub n: f64,
}

impl EastNorth {
    pub fn norm(self) -> f64 {
        self.e.hypot(self.n)
    }
}

impl Sub for EastNorth {
    type Output = EastNorth;
    fn sub(self, rhs: EastNorth) -> EastNorth {
        EastNorth {
            e: self.e - rhs.e,
            n: self.n - rhs.n,
        }
    }
}

/// Metres along the image `x` axis and the image "up" axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameVec {
    pub fx: f64,
    pub fy: f64,
}

impl FrameVec {
    pub fn norm(self) -> f64 {
        self.fx.hypot(self.fy)
    }
}

/// Frame sampling of the clip being conditioned or evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipTiming {
    /// Video-clock time of frame 0, seconds.
    pub t_start: f64,
    pub fps: f64,
    pub n_frames: usize,
    pub width: u32,
    pub height: u32,
}

impl ClipTiming {
    pub fn new(t_start: f64, fps: f64, n_frames: usize, width: u32, height: u32) -> Result<Self, GeoError> {
        let timing = Self {
            t_start,
            fps,
            n_frames,
            width,
            height,
        };
        timing.validate()?;
        Ok(timing)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let bad = |m: &str| Err(GeoError::InvalidTiming(m.to_owned()));
        if !self.t_start.is_finite() {
            return bad("t_start must be finite");
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return bad("fps must be positive");
        }
        if self.n_frames == 0 {
            return bad("n_frames must be at least 1");
        }
        if self.width == 0 || self.height == 0 {
            return bad("frame dimensions must be positive");
        }
        Ok(())
    }

    /// `t_i = t_start + i / fps`.
    pub fn frame_time(&self, i: usize) -> f64 {
        self.t_start + i as f64 / self.fps
    }

    /// Time of the last frame.
    pub fn t_end(&self) -> f64 {
        self.frame_time(self.n_frames - 1)
    }

    pub fn contains(&self, p: Pixel) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= f64::from(self.width) && p.y <= f64::from(self.height)
    }
}

/// An annotated vessel centre tied to the vessel's fix at the anchor time.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub center: Pixel,
    pub fix: GeoFix,
}

/// Everything needed to map geography to pixels for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraFrameModel {
    origin: LocalOrigin,
    theta_deg: f64,
    scale: f64,
    anchors: BTreeMap<VesselId, Anchor>,
    timing: ClipTiming,
}

impl CameraFrameModel {
    pub fn new(
        origin: LocalOrigin,
        theta_deg: f64,
        scale: f64,
        anchors: BTreeMap<VesselId, Anchor>,
        timing: ClipTiming,
    ) -> Result<Self, GeoError> {
        timing.validate()?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GeoError::InvalidScale(scale));
        }
        for (&vessel, anchor) in &anchors {
            if !timing.contains(anchor.center) {
                return Err(GeoError::AnchorOutsideFrame {
                    vessel,
                    x: anchor.center.x,
                    y: anchor.center.y,
                    width: timing.width,
                    height: timing.height,
                });
            }
        }
        Ok(Self {
            origin,
            theta_deg,
            scale,
            anchors,
            timing,
        })
    }

    /// Builds a model from an (already aligned and windowed) log.
    ///
    /// The origin is the mean of every fix in `log`; each anchor fix is the
    /// vessel's interpolated fix at `timing.t_start`. When `scale` is `None`
    /// it is estimated from exactly two annotated centres.
    pub fn from_log(
        log: &TelemetryLog,
        theta_deg: f64,
        scale: Option<f64>,
        timing: ClipTiming,
        centres: &[(VesselId, Pixel)],
    ) -> Result<(Self, Option<ScaleEstimate>), GeoError> {
        timing.validate()?;
        let origin = make_origin(log)?;
        let mut anchors = BTreeMap::new();
        for &(vessel, center) in centres {
            let fix = telemetry::interpolate(log, vessel, timing.t_start)?;
            anchors.insert(vessel, Anchor { center, fix });
        }
        let (scale, estimate) = match scale {
            Some(s) => (s, None),
            None => {
                let [(a, pa), (b, pb)] = centres else {
                    return Err(GeoError::NeedTwoVessels(centres.len()));
                };
                let est = estimate_scale(&anchors[a].fix, &anchors[b].fix, *pa, *pb, &origin)?;
                if est.degenerate {
                    return Err(GeoError::DegenerateAnnotation);
                }
                (est.px_per_m, Some(est))
            }
        };
        Ok((Self::new(origin, theta_deg, scale, anchors, timing)?, estimate))
    }

    pub fn origin(&self) -> &LocalOrigin {
        &self.origin
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta_deg
    }

    /// Pixels per metre.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn timing(&self) -> &ClipTiming {
        &self.timing
    }

    pub fn anchors(&self) -> &BTreeMap<VesselId, Anchor> {
        &self.anchors
    }

    pub fn anchor(&self, vessel: VesselId) -> Result<&Anchor, GeoError> {
        self.anchors.get(&vessel).ok_or(GeoError::UnknownVessel(vessel))
    }

    /// Maps one fix to pixels relative to `vessel`'s anchor.
    pub fn project_fix(&self, fix: &GeoFix, vessel: VesselId) -> Result<Pixel, GeoError> {
        let anchor = self.anchor(vessel)?;
        let delta = to_local_metric(fix, &self.origin) - to_local_metric(&anchor.fix, &self.origin);
        let f = rotate(delta, self.theta_deg);
        Ok(Pixel::new(
            anchor.center.x + f.fx * self.scale,
            anchor.center.y - f.fy * self.scale,
        ))
    }
}

/// Pixel positions of one vessel at the clip's frame times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelTrajectory {
    pub vessel_id: VesselId,
    pub points: Vec<Pixel>,
    pub timestamps: Vec<f64>,
}

impl PixelTrajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Mean position of every fix in the log.
pub fn make_origin(log: &TelemetryLog) -> Result<LocalOrigin, GeoError> {
    let n = log.len();
    if n == 0 {
        return Err(GeoError::EmptyLog);
    }
    let (lon, lat) = log
        .iter()
        .fold((0.0, 0.0), |(lon, lat), f| (lon + f.lon, lat + f.lat));
    LocalOrigin::new(lon / n as f64, lat / n as f64)
}

pub fn to_local_metric(fix: &GeoFix, origin: &LocalOrigin) -> EastNorth {
    EastNorth {
        e: (fix.lon - origin.lon_bar) * origin.m_lon,
        n: (fix.lat - origin.lat_bar) * origin.m_lat,
    }
}

/// Rotates an East-North vector into image axes by `theta_deg`.
pub fn rotate(v: EastNorth, theta_deg: f64) -> FrameVec {
    let (sin, cos) = theta_deg.to_radians().sin_cos();
    FrameVec {
        fx: v.e * cos - v.n * sin,
        fy: v.e * sin + v.n * cos,
    }
}

/// Inverse of [`rotate`] for image-axis components `(fx, fy)`.
pub fn unrotate_frame(fx: f64, fy: f64, theta_deg: f64) -> EastNorth {
    unrotate(FrameVec { fx, fy }, theta_deg)
}

fn unrotate(f: FrameVec, theta_deg: f64) -> EastNorth {
    let (sin, cos) = theta_deg.to_radians().sin_cos();
    EastNorth {
        e: f.fx * cos + f.fy * sin,
        n: -f.fx * sin + f.fy * cos,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleEstimate {
    pub px_per_m: f64,
    pub metre_distance: f64,
    pub pixel_distance: f64,
    /// Set when the two annotated centres coincide (scale 0).
    pub degenerate: bool,
}

/// Ratio of annotated pixel distance to metric distance of two vessels.
pub fn estimate_scale(
    fix_a: &GeoFix,
    fix_b: &GeoFix,
    px_a: Pixel,
    px_b: Pixel,
    origin: &LocalOrigin,
) -> Result<ScaleEstimate, GeoError> {
    estimate_scale_with_epsilon(fix_a, fix_b, px_a, px_b, origin, MIN_SCALE_BASELINE_M)
}

pub fn estimate_scale_with_epsilon(
    fix_a: &GeoFix,
    fix_b: &GeoFix,
    px_a: Pixel,
    px_b: Pixel,
    origin: &LocalOrigin,
    epsilon_m: f64,
) -> Result<ScaleEstimate, GeoError> {
    let metre_distance = (to_local_metric(fix_a, origin) - to_local_metric(fix_b, origin)).norm();
    if !(metre_distance >= epsilon_m) {
        return Err(GeoError::ScaleUndefined {
            metres: metre_distance,
            epsilon: epsilon_m,
        });
    }
    let pixel_distance = px_a.distance(px_b);
    Ok(ScaleEstimate {
        px_per_m: pixel_distance / metre_distance,
        metre_distance,
        pixel_distance,
        degenerate: pixel_distance == 0.0,
    })
}

/// Projects `vessel`'s interpolated track onto every frame of the clip.
pub fn project_trajectory(
    log: &TelemetryLog,
    vessel: VesselId,
    model: &CameraFrameModel,
) -> Result<PixelTrajectory, GeoError> {
    model.anchor(vessel)?;
    let timing = model.timing;
    let mut points = Vec::with_capacity(timing.n_frames);
    let mut timestamps = Vec::with_capacity(timing.n_frames);
    for i in 0..timing.n_frames {
        let t = timing.frame_time(i);
        let fix = telemetry::interpolate(log, vessel, t)?;
        points.push(model.project_fix(&fix, vessel)?);
        timestamps.push(t);
    }
    Ok(PixelTrajectory {
        vessel_id: vessel,
        points,
        timestamps,
    })
}

/// The fix at time `t` that [`CameraFrameModel::project_fix`] maps to `p`.
pub fn inverse_project(
    p: Pixel,
    t: f64,
    model: &CameraFrameModel,
    vessel: VesselId,
) -> Result<GeoFix, GeoError> {
    let anchor = model.anchor(vessel)?;
    let f = FrameVec {
        fx: (p.x - anchor.center.x) / model.scale,
        fy: -(p.y - anchor.center.y) / model.scale,
    };
    let delta = unrotate(f, model.theta_deg);
    let base = to_local_metric(&anchor.fix, &model.origin);
    let origin = &model.origin;
    Ok(GeoFix::new(
        vessel,
        t,
        (base.e + delta.e) / origin.m_lon + origin.lon_bar,
        (base.n + delta.n) / origin.m_lat + origin.lat_bar,
    ))
}
