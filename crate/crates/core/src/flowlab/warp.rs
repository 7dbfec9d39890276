use super::farneback::{flow_planes, FlowField, FlowParams};
use super::frame::Frame;
use super::plane::sample_grid;
use super::FlowError;
use crate::par;

/// Backward warp: `out(p) = frame(p - factor * flow(p))`, bilinear, with
/// edge replication outside the frame.
pub fn warp(frame: &Frame, flow: &FlowField, factor: f64) -> Result<Frame, FlowError> {
    if frame.width() != flow.width() || frame.height() != flow.height() {
        return Err(FlowError::DimensionMismatch {
            expected: (frame.width(), frame.height()),
            got: (flow.width(), flow.height()),
        });
    }
    if factor == 0.0 {
        return Ok(frame.clone());
    }
    let (w, h, ch) = (frame.width(), frame.height(), frame.channels());
    let src = frame.samples();
    let mut out = vec![0.0; w * h * ch];
    par::for_each_row(&mut out, w * ch, |y, row| {
        for x in 0..w {
            let [dx, dy] = flow.at(x, y);
            let sx = x as f64 - factor * dx;
            let sy = y as f64 - factor * dy;
            for c in 0..ch {
                row[x * ch + c] = sample_grid(src, w, h, ch, c, sx, sy).clamp(0.0, 1.0);
            }
        }
    });
    Frame::new(w, h, ch, out)
}

/// Synthesises the `n_missing` frames between `first` and `last` by warping
/// `first` along the first-to-last flow scaled by `i / (n_missing + 1)`.
pub fn extrapolate_sequence(
    first: &Frame,
    last: &Frame,
    n_missing: usize,
    params: &FlowParams,
) -> Result<Vec<Frame>, FlowError> {
    if n_missing == 0 {
        return Err(FlowError::Contract("n_missing must be at least 1".into()));
    }
    if !first.same_shape(last) {
        return Err(FlowError::DimensionMismatch {
            expected: (first.width(), first.height()),
            got: (last.width(), last.height()),
        });
    }
    params.validate()?;
    let flow = flow_planes(&first.luma_plane(), &last.luma_plane(), params);
    let steps = (n_missing + 1) as f64;
    (1..=n_missing)
        .map(|i| warp(first, &flow, i as f64 / steps))
        .collect()
}
