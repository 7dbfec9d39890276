//! Six-entry trajectory-conditioning payloads: two vessel boxes with their
//! projected tracks, plus four constant corner anchors that tell the video
//! model the camera is not moving.
//!
//! Wire format (UTF-8 JSON, keys in this order):
//!
//! ```json
//! {"version": 1, "reference_frame": "...", "width": 1024, "height": 576,
//!  "fps": 7.0, "n_frames": 14,
//!  "entries": [{"role": "vessel", "id": 99999, "bbox": [x, y, w, h],
//!               "trajectory": [[x, y], ...]}, ...]}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flowlab::Frame;
use crate::geoproject::{ClipTiming, Pixel, PixelTrajectory};
use crate::telemetry::VesselId;

pub const PAYLOAD_VERSION: u32 = 1;
pub const DEFAULT_VESSEL_BOX_PX: f64 = 40.0;
pub const DEFAULT_CORNER_BOX_PX: f64 = 35.0;
pub const DEFAULT_CORNER_INSET_PX: f64 = 30.0;
/// Allowed gap between a vessel's first trajectory point and its box centre.
pub const ANCHOR_TOLERANCE_PX: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ConditioningError {
    #[error("annotation: {0}")]
    Annotation(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("contract: {0}")]
    Contract(String),
    #[error("vessel {vessel}: first trajectory point is {distance} px from its box centre")]
    Anchoring { vessel: VesselId, distance: f64 },
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ConditioningError {
    ConditioningError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Axis-aligned box, top-left corner plus size, pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn center(&self) -> Pixel {
        Pixel::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    fn intersects_frame(&self, width: f64, height: f64) -> bool {
        self.x < width && self.y < height && self.x + self.w > 0.0 && self.y + self.h > 0.0
    }
}

impl From<[f64; 4]> for BBox {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Vessel,
    CornerTl,
    CornerTr,
    CornerBl,
    CornerBr,
}

const CORNER_ROLES: [Role; 4] = [Role::CornerTl, Role::CornerTr, Role::CornerBl, Role::CornerBr];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadEntry {
    pub role: Role,
    /// Vessel id; `None` for corner anchors.
    pub id: Option<VesselId>,
    pub bbox: BBox,
    pub trajectory: Vec<Pixel>,
}

/// Validated payload; entries ordered `[vessel, vessel, TL, TR, BL, BR]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningPayload {
    version: u32,
    reference_frame: String,
    width: u32,
    height: u32,
    fps: f64,
    n_frames: usize,
    entries: Vec<PayloadEntry>,
}

impl ConditioningPayload {
    pub fn reference_frame(&self) -> &str {
        &self.reference_frame
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn entries(&self) -> &[PayloadEntry] {
        &self.entries
    }

    /// `(entry index, frame index)` of trajectory points outside the frame.
    /// These are allowed; callers may want to warn about them.
    pub fn out_of_frame_points(&self) -> Vec<(usize, usize)> {
        let (w, h) = (f64::from(self.width), f64::from(self.height));
        let mut out = Vec::new();
        for (e, entry) in self.entries.iter().enumerate() {
            for (i, p) in entry.trajectory.iter().enumerate() {
                if !(p.x >= 0.0 && p.y >= 0.0 && p.x <= w && p.y <= h) {
                    out.push((e, i));
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<(), ConditioningError> {
        if self.version != PAYLOAD_VERSION {
            return Err(schema("version", format!("unsupported version {}", self.version)));
        }
        if self.width == 0 || self.height == 0 || !(self.fps > 0.0) || self.n_frames == 0 {
            return Err(schema("", "width, height, fps and n_frames must be positive"));
        }
        if self.entries.len() != 6 {
            return Err(schema(
                "entries",
                format!("expected exactly 6 entries, got {}", self.entries.len()),
            ));
        }
        let (w, h) = (f64::from(self.width), f64::from(self.height));
        let vessels = self.entries.iter().filter(|e| e.role == Role::Vessel).count();
        if vessels != 2 {
            return Err(schema("entries", format!("expected 2 vessel entries, got {vessels}")));
        }
        for role in CORNER_ROLES {
            let n = self.entries.iter().filter(|e| e.role == role).count();
            if n != 1 {
                return Err(schema("entries", format!("expected one {role:?} entry, got {n}")));
            }
        }
        for (i, e) in self.entries.iter().enumerate() {
            let path = |field: &str| format!("entries[{i}].{field}");
            let b = e.bbox;
            if !(b.w > 0.0 && b.h > 0.0) || !b.intersects_frame(w, h) {
                return Err(schema(path("bbox"), "box must have positive size and intersect the frame"));
            }
            if e.trajectory.len() != self.n_frames {
                return Err(schema(
                    path("trajectory"),
                    format!("expected {} points, got {}", self.n_frames, e.trajectory.len()),
                ));
            }
            if e.trajectory.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(schema(path("trajectory"), "non-finite point"));
            }
            match e.role {
                Role::Vessel => {
                    let Some(id) = e.id else {
                        return Err(schema(path("id"), "vessel entries need an id"));
                    };
                    let d = e.trajectory[0].distance(b.center());
                    if d > ANCHOR_TOLERANCE_PX {
                        return Err(ConditioningError::Anchoring { vessel: id, distance: d });
                    }
                }
                _ => {
                    if e.id.is_some() {
                        return Err(schema(path("id"), "corner entries carry a null id"));
                    }
                    if e.trajectory.iter().any(|&p| p != e.trajectory[0]) {
                        return Err(schema(path("trajectory"), "corner trajectory must be constant"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Square box of side `size` centred on `center`.
pub fn vessel_box(center: Pixel, size: f64, timing: &ClipTiming) -> Result<BBox, ConditioningError> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(ConditioningError::Annotation(format!("box size must be positive, got {size}")));
    }
    if !timing.contains(center) {
        return Err(ConditioningError::Annotation(format!(
            "centre ({}, {}) lies outside the {}x{} frame",
            center.x, center.y, timing.width, timing.height
        )));
    }
    Ok(BBox {
        x: center.x - size / 2.0,
        y: center.y - size / 2.0,
        w: size,
        h: size,
    })
}

/// Four constant anchors whose outer corners sit `inset` px from the two
/// nearest frame edges, ordered TL, TR, BL, BR.
pub fn corner_anchors(timing: &ClipTiming, box_size: f64, inset: f64) -> Result<Vec<PayloadEntry>, ConditioningError> {
    let (w, h) = (f64::from(timing.width), f64::from(timing.height));
    if !(box_size > 0.0) || !(inset >= 0.0) {
        return Err(ConditioningError::Geometry(format!(
            "corner box {box_size} px / inset {inset} px must be positive"
        )));
    }
    let need = 2.0 * inset + box_size;
    if !(w > need && h > need) {
        return Err(ConditioningError::Geometry(format!(
            "{}x{} frame cannot hold {box_size} px corner boxes {inset} px from the edges",
            timing.width, timing.height
        )));
    }
    let (left, top) = (inset, inset);
    let (right, bottom) = (w - inset - box_size, h - inset - box_size);
    let corners = [(left, top), (right, top), (left, bottom), (right, bottom)];
    Ok(CORNER_ROLES
        .iter()
        .zip(corners)
        .map(|(&role, (x, y))| {
            let bbox = BBox {
                x,
                y,
                w: box_size,
                h: box_size,
            };
            PayloadEntry {
                role,
                id: None,
                bbox,
                trajectory: vec![bbox.center(); timing.n_frames],
            }
        })
        .collect())
}

/// Assembles and validates the six-entry payload.
pub fn build_payload(
    timing: &ClipTiming,
    vessels: [(BBox, &PixelTrajectory); 2],
    corner_size: f64,
    inset: f64,
    reference: &str,
) -> Result<ConditioningPayload, ConditioningError> {
    let mut entries = Vec::with_capacity(6);
    for (bbox, traj) in vessels {
        if traj.points.len() != timing.n_frames {
            return Err(ConditioningError::Contract(format!(
                "vessel {} trajectory has {} points, clip has {} frames",
                traj.vessel_id,
                traj.points.len(),
                timing.n_frames
            )));
        }
        let d = traj.points[0].distance(bbox.center());
        if d > ANCHOR_TOLERANCE_PX {
            return Err(ConditioningError::Anchoring {
                vessel: traj.vessel_id,
                distance: d,
            });
        }
        entries.push(PayloadEntry {
            role: Role::Vessel,
            id: Some(traj.vessel_id),
            bbox,
            trajectory: traj.points.clone(),
        });
    }
    entries.extend(corner_anchors(timing, corner_size, inset)?);
    let payload = ConditioningPayload {
        version: PAYLOAD_VERSION,
        reference_frame: reference.to_owned(),
        width: timing.width,
        height: timing.height,
        fps: timing.fps,
        n_frames: timing.n_frames,
        entries,
    };
    payload.validate()?;
    Ok(payload)
}

/// Pretty-printed JSON with LF line endings and a trailing newline.
pub fn serialize_payload(payload: &ConditioningPayload) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(payload).expect("payload is always serialisable");
    out.push(b'\n');
    out
}

pub fn parse_payload(bytes: &[u8]) -> Result<ConditioningPayload, ConditioningError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let payload: ConditioningPayload = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    payload.validate()?;
    Ok(payload)
}

const VESSEL_COLOURS: [[f64; 3]; 2] = [[0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
const CORNER_COLOUR: [f64; 3] = [1.0, 0.0, 0.0];
/// Length of each arrowhead barb, pixels.
pub const ARROW_BARB_PX: f64 = 8.0;

/// Copy of `frame` with every box outlined and every moving trajectory
/// drawn as a polyline ending in an arrowhead.
pub fn render_overlay(frame: &Frame, payload: &ConditioningPayload) -> Result<Frame, ConditioningError> {
    if frame.width() != payload.width as usize || frame.height() != payload.height as usize {
        return Err(ConditioningError::Contract(format!(
            "frame is {}x{}, payload expects {}x{}",
            frame.width(),
            frame.height(),
            payload.width,
            payload.height
        )));
    }
    let mut out = frame.clone();
    let mut vessel_idx = 0;
    for entry in &payload.entries {
        let colour = match entry.role {
            Role::Vessel => {
                let c = VESSEL_COLOURS[vessel_idx % 2];
                vessel_idx += 1;
                c
            }
            _ => CORNER_COLOUR,
        };
        let mut pen = Pen {
            frame: &mut out,
            colour,
        };
        let b = entry.bbox;
        let (x0, y0) = (b.x.round(), b.y.round());
        let (x1, y1) = ((b.x + b.w).round() - 1.0, (b.y + b.h).round() - 1.0);
        pen.line(x0, y0, x1, y0);
        pen.line(x1, y0, x1, y1);
        pen.line(x1, y1, x0, y1);
        pen.line(x0, y1, x0, y0);

        let pts = &entry.trajectory;
        let mut last_dir = None;
        for seg in pts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            if (a.x.round(), a.y.round()) != (b.x.round(), b.y.round()) {
                pen.line(a.x.round(), a.y.round(), b.x.round(), b.y.round());
            }
            if a != b {
                last_dir = Some((b.x - a.x, b.y - a.y));
            }
        }
        if let (Some((dx, dy)), Some(tip)) = (last_dir, pts.last()) {
            let heading = dy.atan2(dx);
            for barb in [150f64.to_radians(), -150f64.to_radians()] {
                let a = heading + barb;
                pen.line(
                    tip.x.round(),
                    tip.y.round(),
                    (tip.x + ARROW_BARB_PX * a.cos()).round(),
                    (tip.y + ARROW_BARB_PX * a.sin()).round(),
                );
            }
        }
    }
    Ok(out)
}

struct Pen<'a> {
    frame: &'a mut Frame,
    colour: [f64; 3],
}

impl Pen<'_> {
    fn plot(&mut self, x: i64, y: i64) {
        if x < 0 || y < 0 || x >= self.frame.width() as i64 || y >= self.frame.height() as i64 {
            return;
        }
        let (x, y) = (x as usize, y as usize);
        match self.frame.channels() {
            1 => self.frame.set(x, y, 0, 1.0),
            _ => {
                for c in 0..3 {
                    self.frame.set(x, y, c, self.colour[c]);
                }
            }
        }
    }

    /// Bresenham between integer endpoints.
    fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) {
        let (mut x, mut y) = (x0 as i64, y0 as i64);
        let (x1, y1) = (x1 as i64, y1 as i64);
        let dx = (x1 - x).abs();
        let dy = -(y1 - y).abs();
        let sx = if x < x1 { 1 } else { -1 };
        let sy = if y < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.plot(x, y);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }
}
