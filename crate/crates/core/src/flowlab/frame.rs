use super::FlowError;

/// A raster with 1 (luma) or 3 (RGB) interleaved channels, row-major,
/// samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<f64>) -> Result<Self, FlowError> {
        if width == 0 || height == 0 {
            return Err(FlowError::InvalidFrame("dimensions must be positive".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(FlowError::InvalidFrame(format!("unsupported channel count {channels}")));
        }
        if samples.len() != width * height * channels {
            return Err(FlowError::InvalidFrame(format!(
                "expected {} samples, got {}",
                width * height * channels,
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(FlowError::InvalidFrame(format!("sample {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    /// Builds a frame by evaluating `f(x, y, channel)` and clamping to `[0, 1]`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self, FlowError> {
        let mut samples = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    samples.push(f(x, y, c).clamp(0.0, 1.0));
                }
            }
        }
        Self::new(width, height, channels, samples)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self, FlowError> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.samples[(y * self.width + x) * self.channels + c]
    }

    /// Writes a sample, clamped to `[0, 1]`.
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.samples[(y * self.width + x) * self.channels + c] = v.clamp(0.0, 1.0);
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Rec.601 luma. One-channel frames are returned unchanged.
    pub fn to_luma(&self) -> Frame {
        if self.channels == 1 {
            return self.clone();
        }
        let samples = self
            .samples
            .chunks_exact(3)
            .map(|p| (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).clamp(0.0, 1.0))
            .collect();
        Frame {
            width: self.width,
            height: self.height,
            channels: 1,
            samples,
        }
    }

    pub(crate) fn channel_plane(&self, c: usize) -> super::plane::Plane {
        let data = self
            .samples
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect();
        super::plane::Plane::new(self.width, self.height, data)
    }

    pub(crate) fn luma_plane(&self) -> super::plane::Plane {
        self.to_luma().channel_plane(0)
    }
}

/// Rec.601 luma of an RGB frame.
pub fn to_luma(frame: &Frame) -> Result<Frame, FlowError> {
    if frame.channels != 3 {
        return Err(FlowError::ChannelMismatch {
            expected: 3,
            got: frame.channels,
        });
    }
    Ok(frame.to_luma())
}
