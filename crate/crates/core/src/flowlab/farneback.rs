//! Dense two-frame motion estimation by polynomial expansion.
//!
//! Both frames are expanded into local quadratics. A displacement `d`
//! between them satisfies `A d = -½ (b₂ - b₁)`; with a prior estimate `d̃`
//! the second frame's coefficients are sampled at `x + d̃` and the system
//! becomes `A d = -½ (b₂(x + d̃) - b₁(x)) + A d̃`. The per-pixel normal
//! equations `AᵀA d = AᵀΔb` are averaged over a Gaussian window before
//! solving, coarse to fine over an image pyramid.

use serde::{Deserialize, Serialize};

use super::frame::Frame;
use super::plane::{gaussian_kernel, Plane};
use super::poly::{check_poly_params, expand, QuadraticField};
use super::FlowError;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowParams {
    pub pyramid_levels: usize,
    pub pyramid_scale: f64,
    /// Side of the averaging window, pixels (odd).
    pub window: usize,
    pub poly_n: usize,
    pub poly_sigma: f64,
    pub iterations: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            pyramid_levels: 3,
            pyramid_scale: 0.5,
            window: 15,
            poly_n: 5,
            poly_sigma: 1.1,
            iterations: 3,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<(), FlowError> {
        if self.pyramid_levels == 0 {
            return Err(FlowError::InvalidParams("pyramid_levels must be >= 1".into()));
        }
        if !(self.pyramid_scale > 0.0 && self.pyramid_scale < 1.0) {
            return Err(FlowError::InvalidParams(format!(
                "pyramid_scale must lie in (0, 1), got {}",
                self.pyramid_scale
            )));
        }
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(FlowError::InvalidParams(format!("window must be odd and >= 3, got {}", self.window)));
        }
        if self.iterations == 0 {
            return Err(FlowError::InvalidParams("iterations must be >= 1".into()));
        }
        check_poly_params(self.poly_n, self.poly_sigma)
    }
}

/// Per-pixel displacement `(dx, dy)` from the first frame to the second.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    vectors: Vec<[f64; 2]>,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            vectors: vec![[0.0; 2]; width * height],
        }
    }

    /// Every pixel carries the same vector.
    pub fn constant(width: usize, height: usize, v: [f64; 2]) -> Self {
        Self {
            width,
            height,
            vectors: vec![v; width * height],
        }
    }

    pub fn from_vectors(width: usize, height: usize, vectors: Vec<[f64; 2]>) -> Result<Self, FlowError> {
        if vectors.len() != width * height {
            return Err(FlowError::InvalidParams(format!(
                "flow needs {} vectors, got {}",
                width * height,
                vectors.len()
            )));
        }
        if vectors.iter().flatten().any(|v| !v.is_finite()) {
            return Err(FlowError::InvalidParams("flow vectors must be finite".into()));
        }
        Ok(Self { width, height, vectors })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vectors(&self) -> &[[f64; 2]] {
        &self.vectors
    }

    pub fn at(&self, x: usize, y: usize) -> [f64; 2] {
        self.vectors[y * self.width + x]
    }

    /// Mean vector over the rectangle `[x0, x1) x [y0, y1)`.
    pub fn mean_in(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> [f64; 2] {
        let mut acc = [0.0; 2];
        let mut n = 0.0;
        for y in y0..y1 {
            for x in x0..x1 {
                let v = self.at(x, y);
                acc[0] += v[0];
                acc[1] += v[1];
                n += 1.0;
            }
        }
        [acc[0] / n, acc[1] / n]
    }

    /// Mean of per-pixel magnitudes, summed row by row in order.
    pub fn mean_magnitude(&self) -> f64 {
        let w = self.width;
        let total = par::row_sums(self.height, |y| {
            self.vectors[y * w..(y + 1) * w]
                .iter()
                .map(|v| v[0].hypot(v[1]))
                .sum()
        });
        total / (self.width * self.height) as f64
    }

    pub fn max_magnitude(&self) -> f64 {
        self.vectors.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max)
    }

    fn resize(&self, width: usize, height: usize) -> FlowField {
        let fx = width as f64 / self.width as f64;
        let fy = height as f64 / self.height as f64;
        let split = |k: usize| Plane::new(self.width, self.height, self.vectors.iter().map(|v| v[k]).collect());
        let u = split(0).resize(width, height);
        let v = split(1).resize(width, height);
        FlowField {
            width,
            height,
            vectors: u.data.iter().zip(&v.data).map(|(a, b)| [a * fx, b * fy]).collect(),
        }
    }
}

/// Dense flow from `prev` to `next` (both one-channel).
pub fn farneback_flow(prev: &Frame, next: &Frame, params: &FlowParams) -> Result<FlowField, FlowError> {
    params.validate()?;
    for f in [prev, next] {
        if f.channels() != 1 {
            return Err(FlowError::ChannelMismatch {
                expected: 1,
                got: f.channels(),
            });
        }
    }
    if prev.width() != next.width() || prev.height() != next.height() {
        return Err(FlowError::DimensionMismatch {
            expected: (prev.width(), prev.height()),
            got: (next.width(), next.height()),
        });
    }
    Ok(flow_planes(&prev.channel_plane(0), &next.channel_plane(0), params))
}

/// Smallest pyramid side still worth estimating on.
const MIN_LEVEL_SIDE: usize = 16;

pub(crate) fn flow_planes(prev: &Plane, next: &Plane, params: &FlowParams) -> FlowField {
    let (w0, h0) = (prev.width, prev.height);
    let mut sizes = vec![(w0, h0)];
    for k in 1..params.pyramid_levels {
        let s = params.pyramid_scale.powi(k as i32);
        let (w, h) = ((w0 as f64 * s).round() as usize, (h0 as f64 * s).round() as usize);
        if w.min(h) < MIN_LEVEL_SIDE {
            break;
        }
        sizes.push((w, h));
    }

    let mut flow: Option<FlowField> = None;
    for (level, &(w, h)) in sizes.iter().enumerate().rev() {
        let (p, n) = if level == 0 {
            (prev.clone(), next.clone())
        } else {
            let sigma = (1.0 / params.pyramid_scale.powi(level as i32) - 1.0) * 0.5;
            (prev.blur(sigma).resize(w, h), next.blur(sigma).resize(w, h))
        };
        let r1 = expand(&p, params.poly_n, params.poly_sigma);
        let r2 = expand(&n, params.poly_n, params.poly_sigma);
        let mut current = match flow.take() {
            Some(coarse) => coarse.resize(w, h),
            None => FlowField::zeros(w, h),
        };
        for _ in 0..params.iterations {
            current = refine(&r1, &r2, &current, params.window);
        }
        flow = Some(current);
    }
    flow.expect("at least one pyramid level")
}

/// One refinement pass: build per-pixel normal equations around the
/// current estimate, average them over the window, solve.
fn refine(r1: &QuadraticField, r2: &QuadraticField, flow: &FlowField, window: usize) -> FlowField {
    let (w, h) = (r1.width, r1.height);
    // g11, g12, g22, h1, h2
    let mut terms = vec![[0.0; 5]; w * h];
    par::for_each_row(&mut terms, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let [dx, dy] = flow.at(x, y);
            let c1 = r1.coeffs[y * w + x];
            let c2 = r2.sample(x as f64 + dx, y as f64 + dy);
            let a11 = 0.5 * (c1[3] + c2[3]);
            let a22 = 0.5 * (c1[4] + c2[4]);
            let a12 = 0.5 * (c1[5] + c2[5]);
            let db1 = -0.5 * (c2[1] - c1[1]) + a11 * dx + a12 * dy;
            let db2 = -0.5 * (c2[2] - c1[2]) + a12 * dx + a22 * dy;
            *out = [
                a11 * a11 + a12 * a12,
                a12 * (a11 + a22),
                a12 * a12 + a22 * a22,
                a11 * db1 + a12 * db2,
                a12 * db1 + a22 * db2,
            ];
        }
    });

    let half = window / 2;
    let kernel = gaussian_kernel(0.3 * half as f64, half);
    let blurred: Vec<Plane> = (0..5)
        .map(|k| Plane::new(w, h, terms.iter().map(|t| t[k]).collect()).convolve_separable(&kernel))
        .collect();

    // Ridge term scaled to the image's own structure strength so flat
    // areas resolve to zero motion instead of noise.
    let mean_trace = (blurred[0].data.iter().sum::<f64>() + blurred[2].data.iter().sum::<f64>()) / (w * h) as f64;
    let ridge = 1e-3 * mean_trace + 1e-30;

    let mut vectors = vec![[0.0; 2]; w * h];
    par::for_each_row(&mut vectors, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let i = y * w + x;
            let g11 = blurred[0].data[i] + ridge;
            let g12 = blurred[1].data[i];
            let g22 = blurred[2].data[i] + ridge;
            let (h1, h2) = (blurred[3].data[i], blurred[4].data[i]);
            let det = g11 * g22 - g12 * g12;
            *out = [(g22 * h1 - g12 * h2) / det, (g11 * h2 - g12 * h1) / det];
        }
    });
    FlowField {
        width: w,
        height: h,
        vectors,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Smooth band-limited texture: a fixed sum of sinusoids.
    pub(crate) fn texture(x: f64, y: f64) -> f64 {
        const WAVES: [(f64, f64, f64); 6] = [
            (0.21, 0.05, 0.3),
            (-0.07, 0.18, 1.1),
            (0.13, -0.16, 2.0),
            (0.31, 0.11, 0.7),
            (-0.19, -0.24, 2.9),
            (0.05, 0.29, 4.1),
        ];
        0.5 + WAVES.iter().map(|(kx, ky, ph)| 0.07 * (kx * x + ky * y + ph).sin()).sum::<f64>()
    }

    fn shifted(w: usize, h: usize, dx: f64, dy: f64) -> Frame {
        Frame::from_fn(w, h, 1, |x, y, _| texture(x as f64 - dx, y as f64 - dy)).unwrap()
    }

    #[test]
    fn identical_frames_give_zero_flow() {
        let f = shifted(64, 48, 0.0, 0.0);
        let flow = farneback_flow(&f, &f, &FlowParams::default()).unwrap();
        assert!(flow.max_magnitude() < 1e-3);
    }

    #[test]
    fn recovers_integer_shift() {
        let a = shifted(96, 96, 0.0, 0.0);
        let b = shifted(96, 96, 3.0, 0.0);
        let flow = farneback_flow(&a, &b, &FlowParams::default()).unwrap();
        let m = flow.mean_in(16, 16, 80, 80);
        assert!((m[0] - 3.0).abs() < 0.25 && m[1].abs() < 0.25, "{m:?}");
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let a = Frame::filled(8, 8, 1, 0.0).unwrap();
        let b = Frame::filled(8, 9, 1, 0.0).unwrap();
        assert!(matches!(
            farneback_flow(&a, &b, &FlowParams::default()),
            Err(FlowError::DimensionMismatch { .. })
        ));
        let bad = FlowParams {
            window: 4,
            ..FlowParams::default()
        };
        assert!(farneback_flow(&a, &a, &bad).is_err());
    }
}
