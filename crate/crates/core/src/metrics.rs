//! Evaluation of generated frame sequences: temporal smoothness, tracked
//! trajectory error against GPS-projected positions, PSNR, and report
//! rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flowlab::{self, FlowError, FlowParams, Frame, Track, TrackParams};
use crate::geoproject::{Pixel, PixelTrajectory};
use crate::par;
use crate::telemetry::VesselId;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{0}")]
    Contract(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Mean dense-flow magnitude over all consecutive frame pairs, px/frame.
pub fn temporal_smoothness(frames: &[Frame], params: &FlowParams) -> Result<f64, MetricsError> {
    Ok(pair_magnitudes(frames, params)?.iter().sum::<f64>() / (frames.len() - 1) as f64)
}

fn pair_magnitudes(frames: &[Frame], params: &FlowParams) -> Result<Vec<f64>, MetricsError> {
    if frames.len() < 2 {
        return Err(MetricsError::Contract(format!(
            "temporal smoothness needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    params.validate()?;
    check_same_shape(frames)?;
    let luma: Vec<_> = frames.iter().map(|f| f.luma_plane()).collect();
    Ok(par::map_indices(frames.len() - 1, |i| {
        flowlab::farneback::flow_planes(&luma[i], &luma[i + 1], params).mean_magnitude()
    }))
}

fn check_same_shape(frames: &[Frame]) -> Result<(), MetricsError> {
    let first = &frames[0];
    for f in frames {
        if f.width() != first.width() || f.height() != first.height() {
            return Err(FlowError::DimensionMismatch {
                expected: (first.width(), first.height()),
                got: (f.width(), f.height()),
            }
            .into());
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryError {
    /// Mean distance over valid frames; `None` when no frame was valid.
    pub per_vessel: BTreeMap<VesselId, Option<f64>>,
    /// Unweighted mean of the per-vessel means that exist.
    pub mean: Option<f64>,
    /// Valid (vessel, frame) pairs over all pairs.
    pub validity: f64,
}

/// Compares tracked points with reference trajectories frame by frame.
/// `tracked` and `reference` must list the same vessels in the same order.
pub fn trajectory_error(
    tracked: &[(VesselId, Track)],
    reference: &[PixelTrajectory],
) -> Result<TrajectoryError, MetricsError> {
    if tracked.len() != reference.len() {
        return Err(MetricsError::Contract(format!(
            "{} tracked vessels but {} reference trajectories",
            tracked.len(),
            reference.len()
        )));
    }
    if tracked.is_empty() {
        return Err(MetricsError::Contract("no vessels to evaluate".into()));
    }
    let mut per_vessel = BTreeMap::new();
    let (mut valid, mut total) = (0usize, 0usize);
    for ((id, track), r) in tracked.iter().zip(reference) {
        if *id != r.vessel_id {
            return Err(MetricsError::Contract(format!(
                "tracked vessel {id} paired with reference vessel {}",
                r.vessel_id
            )));
        }
        if track.points.len() != r.points.len() || track.valid.len() != r.points.len() {
            return Err(MetricsError::Contract(format!(
                "vessel {id}: {} tracked frames vs {} reference frames",
                track.points.len(),
                r.points.len()
            )));
        }
        let errors: Vec<f64> = track
            .points
            .iter()
            .zip(&track.valid)
            .zip(&r.points)
            .filter(|((_, &ok), _)| ok)
            .map(|((p, _), q)| p.distance(*q))
            .collect();
        valid += errors.len();
        total += r.points.len();
        let mean = (!errors.is_empty()).then(|| errors.iter().sum::<f64>() / errors.len() as f64);
        if per_vessel.insert(*id, mean).is_some() {
            return Err(MetricsError::Contract(format!("vessel {id} listed twice")));
        }
    }
    let means: Vec<f64> = per_vessel.values().flatten().copied().collect();
    Ok(TrajectoryError {
        mean: (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64),
        per_vessel,
        validity: if total == 0 { 0.0 } else { valid as f64 / total as f64 },
    })
}

/// Peak signal-to-noise ratio in dB for intensities in `[0, 1]`;
/// identical frames give `f64::INFINITY`.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64, MetricsError> {
    if !a.same_shape(b) {
        return Err(MetricsError::Contract(format!(
            "psnr of {}x{}x{} against {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    let row = a.width() * a.channels();
    let (sa, sb) = (a.samples(), b.samples());
    let sse = par::row_sums(a.height(), |y| {
        sa[y * row..(y + 1) * row]
            .iter()
            .zip(&sb[y * row..(y + 1) * row])
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    });
    let mse = sse / sa.len() as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { -10.0 * mse.log10() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method_name: String,
    /// px/frame
    pub temporal_smoothness: f64,
    pub trajectory_error_per_vessel: BTreeMap<VesselId, Option<f64>>,
    pub trajectory_error_mean: Option<f64>,
    /// Only for runs with reference frames; `"inf"` in JSON for exact matches.
    #[serde(with = "psnr_serde", default)]
    pub psnr_mean: Option<f64>,
    pub frames_evaluated: usize,
    pub tracking_validity: f64,
    /// Reserved; learned perceptual metrics are not computed here.
    pub lpips: Option<f64>,
    /// Reserved; learned perceptual metrics are not computed here.
    pub brisque: Option<f64>,
}

mod psnr_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_infinite() => s.serialize_some("inf"),
            Some(x) => s.serialize_some(x),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Repr::Text(t)) => Err(serde::de::Error::custom(format!("bad psnr value {t:?}"))),
        }
    }
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is always serialisable");
        s.push('\n');
        s
    }
}

/// Tracks `seeds` through `generated`, compares the tracks with
/// `reference`, measures temporal smoothness and, when `reference_frames`
/// is given, the mean PSNR against it.
pub fn evaluate_method(
    method_name: &str,
    generated: &[Frame],
    reference: &[PixelTrajectory],
    seeds: &[(VesselId, Pixel)],
    reference_frames: Option<&[Frame]>,
    flow_params: &FlowParams,
    track_params: &TrackParams,
) -> Result<EvaluationReport, MetricsError> {
    if generated.is_empty() {
        return Err(MetricsError::Contract("no generated frames".into()));
    }
    let ids: Vec<VesselId> = seeds.iter().map(|s| s.0).collect();
    let ref_ids: Vec<VesselId> = reference.iter().map(|r| r.vessel_id).collect();
    if ids != ref_ids {
        return Err(MetricsError::Contract(format!(
            "seed vessels {ids:?} do not match reference vessels {ref_ids:?}"
        )));
    }
    for r in reference {
        if r.points.len() != generated.len() {
            return Err(MetricsError::Contract(format!(
                "vessel {} reference has {} points for {} frames",
                r.vessel_id,
                r.points.len(),
                generated.len()
            )));
        }
    }
    let points: Vec<Pixel> = seeds.iter().map(|s| s.1).collect();
    let tracks = flowlab::lk_track(generated, &points, track_params)?;
    let tracked: Vec<(VesselId, Track)> = ids.into_iter().zip(tracks).collect();
    let traj = trajectory_error(&tracked, reference)?;
    let smooth = temporal_smoothness(generated, flow_params)?;

    let psnr_mean = match reference_frames {
        None => None,
        Some(refs) => {
            if refs.len() != generated.len() {
                return Err(MetricsError::Contract(format!(
                    "{} reference frames for {} generated frames",
                    refs.len(),
                    generated.len()
                )));
            }
            let values = par::map_indices(refs.len(), |i| psnr(&generated[i], &refs[i]));
            let values = values.into_iter().collect::<Result<Vec<_>, _>>()?;
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    };

    Ok(EvaluationReport {
        method_name: method_name.to_owned(),
        temporal_smoothness: smooth,
        trajectory_error_per_vessel: traj.per_vessel,
        trajectory_error_mean: traj.mean,
        psnr_mean,
        frames_evaluated: generated.len(),
        tracking_validity: traj.validity,
        lpips: None,
        brisque: None,
    })
}

fn cell(v: Option<f64>, decimals: usize) -> String {
    match v {
        None => "---".into(),
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.decimals$}"),
    }
}

/// Fixed-width comparison table, one row per report.
pub fn render_table(reports: &[EvaluationReport]) -> String {
    let vessels: BTreeSet<VesselId> = reports
        .iter()
        .flat_map(|r| r.trajectory_error_per_vessel.keys().copied())
        .collect();
    let mut header = vec![
        "Method".to_owned(),
        "LPIPS".into(),
        "Temp. smooth".into(),
        "BRISQUE".into(),
        "Traj err px".into(),
    ];
    header.extend(vessels.iter().map(|v| format!("Traj {v}")));
    header.push("Validity".into());
    header.push("PSNR dB".into());

    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![
                r.method_name.clone(),
                cell(r.lpips, 3),
                cell(Some(r.temporal_smoothness), 2),
                cell(r.brisque, 2),
                cell(r.trajectory_error_mean, 2),
            ];
            row.extend(
                vessels
                    .iter()
                    .map(|v| cell(r.trajectory_error_per_vessel.get(v).copied().flatten(), 2)),
            );
            row.push(format!("{:.2}", r.tracking_validity));
            row.push(cell(r.psnr_mean, 2));
            row
        })
        .collect();

    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", parts.join(" | ").trim_end());
    };
    line(&mut out, &header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "{}", rule.join("-+-"));
    for r in &rows {
        line(&mut out, r);
    }
    out
}
