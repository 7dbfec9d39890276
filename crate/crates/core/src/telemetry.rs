//! Vessel GPS telemetry: CSV parsing, clock alignment, windowing and
//! temporal interpolation.
//!
//! Logs use the column set `timestamp,id,lon,lat,sog,cog,heading,phase`
//! (matched case-insensitively, extra columns ignored). Timestamps may be
//! raw epoch seconds or ISO-8601 UTC strings and are normalised to
//! fractional epoch seconds.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VesselId = u64;

#[derive(Debug, Error, PartialEq)]
pub enum TelemetryError {
    #[error("empty input")]
    EmptyInput,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: {message}")]
    Validation { line: u64, message: String },
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("vessel {vessel}: duplicate timestamp {timestamp}")]
    DuplicateTimestamp { vessel: VesselId, timestamp: f64 },
    #[error("invalid window [{start}, {end}]")]
    InvalidWindow { start: f64, end: f64 },
    #[error("window [{start}, {end}] excludes every fix of vessel {vessel}")]
    EmptyWindow { vessel: VesselId, start: f64, end: f64 },
    #[error("vessel {vessel}: time {t} outside log span [{first}, {last}]")]
    OutOfRange {
        vessel: VesselId,
        t: f64,
        first: f64,
        last: f64,
    },
    #[error("unknown vessel {0}")]
    UnknownVessel(VesselId),
}

/// One GPS position report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoFix {
    /// Epoch seconds.
    pub timestamp: f64,
    pub vessel_id: VesselId,
    /// Degrees.
    pub lon: f64,
    /// Degrees.
    pub lat: f64,
    /// Speed over ground, knots.
    pub sog: Option<f64>,
    /// Course over ground, degrees clockwise from North in `[0, 360)`.
    pub cog: Option<f64>,
    pub heading: Option<f64>,
    pub phase_id: Option<String>,
}

impl GeoFix {
    /// A bare position fix with no kinematic extras.
    pub fn new(vessel_id: VesselId, timestamp: f64, lon: f64, lat: f64) -> Self {
        Self {
            timestamp,
            vessel_id,
            lon,
            lat,
            sog: None,
            cog: None,
            heading: None,
            phase_id: None,
        }
    }

    fn validate(&self) -> Result<(), String> {
        if !self.timestamp.is_finite() {
            return Err("timestamp is not finite".into());
        }
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(format!("latitude {} outside [-90, 90]", self.lat));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(format!("longitude {} outside [-180, 180]", self.lon));
        }
        if let Some(cog) = self.cog {
            if !(0.0..360.0).contains(&cog) {
                return Err(format!("cog {cog} outside [0, 360)"));
            }
        }
        Ok(())
    }
}

/// Fixes grouped by vessel, each group sorted by strictly increasing time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TelemetryLog {
    vessels: BTreeMap<VesselId, Vec<GeoFix>>,
}

impl TelemetryLog {
    /// Groups and sorts `fixes`. Repeated timestamps within a vessel are an
    /// error; fixes are range-checked.
    pub fn from_fixes(fixes: impl IntoIterator<Item = GeoFix>) -> Result<Self, TelemetryError> {
        let mut vessels: BTreeMap<VesselId, Vec<GeoFix>> = BTreeMap::new();
        for (i, fix) in fixes.into_iter().enumerate() {
            fix.validate().map_err(|message| TelemetryError::Validation {
                line: i as u64 + 1,
                message,
            })?;
            vessels.entry(fix.vessel_id).or_default().push(fix);
        }
        for (&vessel, group) in vessels.iter_mut() {
            group.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
            if let Some(w) = group.windows(2).find(|w| w[0].timestamp == w[1].timestamp) {
                return Err(TelemetryError::DuplicateTimestamp {
                    vessel,
                    timestamp: w[0].timestamp,
                });
            }
        }
        Ok(Self { vessels })
    }

    pub fn is_empty(&self) -> bool {
        self.vessels.is_empty()
    }

    /// Total number of fixes across vessels.
    pub fn len(&self) -> usize {
        self.vessels.values().map(Vec::len).sum()
    }

    pub fn vessel_ids(&self) -> impl Iterator<Item = VesselId> + '_ {
        self.vessels.keys().copied()
    }

    pub fn fixes(&self, vessel: VesselId) -> Option<&[GeoFix]> {
        self.vessels.get(&vessel).map(Vec::as_slice)
    }

    /// All fixes, vessel by vessel in id order.
    pub fn iter(&self) -> impl Iterator<Item = &GeoFix> {
        self.vessels.values().flatten()
    }

    /// `(first, last)` timestamps of a vessel.
    pub fn span(&self, vessel: VesselId) -> Option<(f64, f64)> {
        let fixes = self.vessels.get(&vessel)?;
        Some((fixes.first()?.timestamp, fixes.last()?.timestamp))
    }
}

const COLUMNS: [&str; 8] = ["timestamp", "id", "lon", "lat", "sog", "cog", "heading", "phase"];

/// Parses CSV telemetry.
pub fn parse_log<R: Read>(raw: R) -> Result<TelemetryLog, TelemetryError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(raw);

    let headers = match reader.headers() {
        Ok(h) if h.iter().any(|f| !f.is_empty()) => h.clone(),
        Ok(_) => return Err(TelemetryError::EmptyInput),
        Err(e) => {
            return Err(TelemetryError::Parse {
                line: 1,
                message: e.to_string(),
            })
        }
    };
    let mut index = [None; COLUMNS.len()];
    for (col, name) in COLUMNS.iter().enumerate() {
        index[col] = headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    }
    for required in 0..4 {
        if index[required].is_none() {
            return Err(TelemetryError::MissingColumn(COLUMNS[required]));
        }
    }

    let mut fixes = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| TelemetryError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |col: usize| index[col].and_then(|i| record.get(i)).unwrap_or("");
        let parse_err = |message: String| TelemetryError::Parse { line, message };

        let timestamp = parse_timestamp(field(0)).map_err(parse_err)?;
        let vessel_id = field(1)
            .parse::<VesselId>()
            .map_err(|e| parse_err(format!("id `{}`: {e}", field(1))))?;
        let lon = parse_number("lon", field(2)).map_err(parse_err)?;
        let lat = parse_number("lat", field(3)).map_err(parse_err)?;
        let optional = |col: usize| -> Result<Option<f64>, TelemetryError> {
            let s = field(col);
            if s.is_empty() {
                Ok(None)
            } else {
                parse_number(COLUMNS[col], s).map(Some).map_err(parse_err)
            }
        };
        let fix = GeoFix {
            timestamp,
            vessel_id,
            lon,
            lat,
            sog: optional(4)?,
            cog: optional(5)?,
            heading: optional(6)?,
            phase_id: Some(field(7)).filter(|s| !s.is_empty()).map(str::to_owned),
        };
        fix.validate()
            .map_err(|message| TelemetryError::Validation { line, message })?;
        fixes.push(fix);
    }
    if fixes.is_empty() {
        return Err(TelemetryError::EmptyInput);
    }
    TelemetryLog::from_fixes(fixes)
}

fn parse_number(name: &str, s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("{name} `{s}` is not a finite number")),
    }
}

fn parse_timestamp(s: &str) -> Result<f64, String> {
    if let Ok(v) = s.parse::<f64>() {
        if v.is_finite() {
            return Ok(v);
        }
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            let utc = dt.and_utc();
            return Ok(utc.timestamp() as f64 + f64::from(utc.timestamp_subsec_nanos()) * 1e-9);
        }
    }
    Err(format!("unparseable timestamp `{s}`"))
}

/// Writes a log in the same schema [`parse_log`] reads. Numbers use the
/// shortest representation that parses back to the same value.
pub fn write_log(log: &TelemetryLog) -> String {
    let mut out = String::from("timestamp,id,lon,lat,sog,cog,heading,phase\n");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for fix in log.iter() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fix.timestamp,
            fix.vessel_id,
            fix.lon,
            fix.lat,
            opt(fix.sog),
            opt(fix.cog),
            opt(fix.heading),
            fix.phase_id.as_deref().unwrap_or("")
        ));
    }
    out
}

/// Shifts the log onto the video clock, where `t_log = t_video + offset`.
pub fn align(log: &TelemetryLog, offset: f64) -> TelemetryLog {
    let vessels = log
        .vessels
        .iter()
        .map(|(&id, fixes)| {
            let shifted = fixes
                .iter()
                .map(|f| GeoFix {
                    timestamp: f.timestamp - offset,
                    ..f.clone()
                })
                .collect();
            (id, shifted)
        })
        .collect();
    TelemetryLog { vessels }
}

/// Keeps fixes inside `[start, end]` plus, per vessel, the nearest fix on
/// either side so that interpolation at the edges stays defined.
pub fn window(log: &TelemetryLog, start: f64, end: f64) -> Result<TelemetryLog, TelemetryError> {
    if !(start < end) {
        return Err(TelemetryError::InvalidWindow { start, end });
    }
    let mut vessels = BTreeMap::new();
    for (&vessel, fixes) in &log.vessels {
        let lo = fixes.partition_point(|f| f.timestamp < start);
        let hi = fixes.partition_point(|f| f.timestamp <= end);
        let interior = hi > lo;
        let bracketed = lo > 0 && hi < fixes.len();
        if !interior && !bracketed {
            return Err(TelemetryError::EmptyWindow { vessel, start, end });
        }
        let from = lo.saturating_sub(1);
        let to = (hi + 1).min(fixes.len());
        vessels.insert(vessel, fixes[from..to].to_vec());
    }
    if vessels.is_empty() {
        return Err(TelemetryError::EmptyInput);
    }
    Ok(TelemetryLog { vessels })
}

/// Linear interpolation of a vessel's fix at time `t`. Angles (`cog`,
/// `heading`) follow the shorter arc; no extrapolation past the log span.
pub fn interpolate(log: &TelemetryLog, vessel: VesselId, t: f64) -> Result<GeoFix, TelemetryError> {
    let fixes = log
        .vessels
        .get(&vessel)
        .ok_or(TelemetryError::UnknownVessel(vessel))?;
    let (first, last) = (fixes[0].timestamp, fixes[fixes.len() - 1].timestamp);
    if !(t >= first && t <= last) {
        return Err(TelemetryError::OutOfRange {
            vessel,
            t,
            first,
            last,
        });
    }
    let idx = fixes.partition_point(|f| f.timestamp < t);
    if fixes[idx].timestamp == t {
        return Ok(fixes[idx].clone());
    }
    let (a, b) = (&fixes[idx - 1], &fixes[idx]);
    let u = (t - a.timestamp) / (b.timestamp - a.timestamp);

    let both = |x: Option<f64>, y: Option<f64>| x.zip(y);
    Ok(GeoFix {
        timestamp: t,
        vessel_id: vessel,
        lon: lerp_bounded(a.lon, b.lon, u),
        lat: lerp_bounded(a.lat, b.lat, u),
        sog: both(a.sog, b.sog).map(|(x, y)| lerp_bounded(x, y, u)),
        cog: both(a.cog, b.cog).map(|(x, y)| lerp_angle_deg(x, y, u)),
        heading: both(a.heading, b.heading).map(|(x, y)| lerp_angle_deg(x, y, u)),
        phase_id: a.phase_id.clone(),
    })
}

fn lerp_bounded(a: f64, b: f64, u: f64) -> f64 {
    (a + (b - a) * u).clamp(a.min(b), a.max(b))
}

/// Interpolates along the shorter arc, result in `[0, 360)`.
pub fn lerp_angle_deg(a: f64, b: f64, u: f64) -> f64 {
    let delta = (b - a + 540.0).rem_euclid(360.0) - 180.0;
    let v = (a + u * delta).rem_euclid(360.0);
    if v >= 360.0 {
        0.0
    } else {
        v
    }
}
