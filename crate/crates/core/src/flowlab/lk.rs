//! Pyramidal Lucas-Kanade point tracking, chained frame to frame.

use serde::{Deserialize, Serialize};

use super::frame::Frame;
use super::plane::Plane;
use super::FlowError;
use crate::geoproject::Pixel;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackParams {
    /// Side of the integration window (odd).
    pub window: usize,
    /// Total pyramid levels including full resolution.
    pub pyramid_levels: usize,
    pub max_iterations: usize,
    /// Stop once the update norm drops below this, pixels.
    pub epsilon: f64,
    /// Smallest accepted eigenvalue of the structure tensor, per window pixel.
    pub min_eigen: f64,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            window: 21,
            pyramid_levels: 3,
            max_iterations: 30,
            epsilon: 0.01,
            min_eigen: 1e-6,
        }
    }
}

impl TrackParams {
    pub fn validate(&self) -> Result<(), FlowError> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(FlowError::InvalidParams(format!("window must be odd and >= 3, got {}", self.window)));
        }
        if self.pyramid_levels == 0 || self.max_iterations == 0 {
            return Err(FlowError::InvalidParams("pyramid_levels and max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// One tracked point per frame; `valid[i]` is false from the first frame
/// where tracking diverged or the structure tensor was near-singular.
/// Invalid points stay frozen at their last valid position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub points: Vec<Pixel>,
    pub valid: Vec<bool>,
}

struct Level {
    image: Plane,
    gx: Plane,
    gy: Plane,
}

fn pyramid(frame: &Frame, levels: usize) -> Vec<Level> {
    let mut out = Vec::with_capacity(levels);
    let mut image = frame.luma_plane();
    for k in 0..levels {
        if k > 0 {
            image = image.pyr_down();
        }
        let (gx, gy) = image.gradients();
        out.push(Level {
            image: image.clone(),
            gx,
            gy,
        });
    }
    out
}

/// Tracks `seeds` through `frames`.
pub fn lk_track(frames: &[Frame], seeds: &[Pixel], params: &TrackParams) -> Result<Vec<Track>, FlowError> {
    params.validate()?;
    if frames.len() < 2 {
        return Err(FlowError::Contract(format!("tracking needs at least 2 frames, got {}", frames.len())));
    }
    if seeds.is_empty() {
        return Err(FlowError::Contract("empty seed set".into()));
    }
    let first = &frames[0];
    for f in &frames[1..] {
        if f.width() != first.width() || f.height() != first.height() {
            return Err(FlowError::DimensionMismatch {
                expected: (first.width(), first.height()),
                got: (f.width(), f.height()),
            });
        }
    }
    let (w, h) = (first.width() as f64, first.height() as f64);
    for s in seeds {
        if !(s.x >= 0.0 && s.y >= 0.0 && s.x <= w - 1.0 && s.y <= h - 1.0) {
            return Err(FlowError::SeedOutsideFrame { x: s.x, y: s.y });
        }
    }

    // Never build levels smaller than the window.
    let min_side = first.width().min(first.height());
    let mut levels = params.pyramid_levels;
    while levels > 1 && (min_side >> (levels - 1)) < params.window {
        levels -= 1;
    }
    let pyramids = par::map_indices(frames.len(), |i| pyramid(&frames[i], levels));

    let tracks = par::map_indices(seeds.len(), |s| {
        let mut pos = seeds[s];
        let mut ok = structure_ok(&pyramids[0][0], pos, params);
        let mut points = vec![pos];
        let mut valid = vec![ok];
        for pair in pyramids.windows(2) {
            if ok {
                match track_step(&pair[0], &pair[1], pos, params) {
                    Some(next) if next.x >= 0.0 && next.y >= 0.0 && next.x <= w - 1.0 && next.y <= h - 1.0 => {
                        pos = next
                    }
                    _ => ok = false,
                }
            }
            points.push(pos);
            valid.push(ok);
        }
        Track { points, valid }
    });
    Ok(tracks)
}

/// Structure tensor over the window at `p`, or `None` when its smaller
/// eigenvalue is below the threshold.
fn structure(level: &Level, p: Pixel, params: &TrackParams) -> Option<[f64; 3]> {
    let r = (params.window / 2) as isize;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for j in -r..=r {
        for i in -r..=r {
            let (x, y) = (p.x + i as f64, p.y + j as f64);
            let ix = level.gx.sample(x, y);
            let iy = level.gy.sample(x, y);
            a += ix * ix;
            b += ix * iy;
            c += iy * iy;
        }
    }
    let n = (params.window * params.window) as f64;
    let min_eig = 0.5 * ((a + c) - ((a - c).powi(2) + 4.0 * b * b).sqrt());
    (min_eig / n >= params.min_eigen).then_some([a, b, c])
}

fn structure_ok(level: &Level, p: Pixel, params: &TrackParams) -> bool {
    structure(level, p, params).is_some()
}

fn track_step(prev: &[Level], next: &[Level], p: Pixel, params: &TrackParams) -> Option<Pixel> {
    let r = (params.window / 2) as isize;
    let mut guess = [0.0f64; 2];
    for level in (0..prev.len()).rev() {
        let scale = (1u32 << level) as f64;
        let u = Pixel::new(p.x / scale, p.y / scale);
        let (lp, ln) = (&prev[level], &next[level]);
        let [a, b, c] = structure(lp, u, params)?;
        let det = a * c - b * b;

        let mut nu = [0.0f64; 2];
        for _ in 0..params.max_iterations {
            let (mut bx, mut by) = (0.0, 0.0);
            for j in -r..=r {
                for i in -r..=r {
                    let (x, y) = (u.x + i as f64, u.y + j as f64);
                    let diff = lp.image.sample(x, y) - ln.image.sample(x + guess[0] + nu[0], y + guess[1] + nu[1]);
                    bx += diff * lp.gx.sample(x, y);
                    by += diff * lp.gy.sample(x, y);
                }
            }
            let eta = [(c * bx - b * by) / det, (a * by - b * bx) / det];
            nu[0] += eta[0];
            nu[1] += eta[1];
            if !nu[0].is_finite() || !nu[1].is_finite() {
                return None;
            }
            if eta[0].hypot(eta[1]) < params.epsilon {
                break;
            }
        }
        guess = if level > 0 {
            [2.0 * (guess[0] + nu[0]), 2.0 * (guess[1] + nu[1])]
        } else {
            [guess[0] + nu[0], guess[1] + nu[1]]
        };
    }
    Some(Pixel::new(p.x + guess[0], p.y + guess[1]))
}
