//! Single-channel `f64` grids with edge-replicated borders.

use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn at_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Bilinear sample; coordinates outside the grid take the edge value.
    #[inline]
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        sample_grid(&self.data, self.width, self.height, 1, 0, x, y)
    }

    /// Separable Gaussian blur with edge replication.
    pub fn blur(&self, sigma: f64) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let radius = (3.0 * sigma).ceil() as usize;
        self.convolve_separable(&gaussian_kernel(sigma, radius))
    }

    /// Correlates rows then columns with a symmetric odd-length kernel.
    pub fn convolve_separable(&self, kernel: &[f64]) -> Plane {
        let r = (kernel.len() / 2) as isize;
        let (w, h) = (self.width, self.height);
        let mut tmp = vec![0.0; w * h];
        par::for_each_row(&mut tmp, w, |y, row| {
            for (x, out) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, kv) in kernel.iter().enumerate() {
                    acc += kv * self.at_clamped(x as isize + k as isize - r, y as isize);
                }
                *out = acc;
            }
        });
        let tmp = Plane::new(w, h, tmp);
        let mut out = vec![0.0; w * h];
        par::for_each_row(&mut out, w, |y, row| {
            for (x, o) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, kv) in kernel.iter().enumerate() {
                    acc += kv * tmp.at_clamped(x as isize, y as isize + k as isize - r);
                }
                *o = acc;
            }
        });
        Plane::new(w, h, out)
    }

    /// Binomial 5-tap smoothing followed by 2x decimation.
    pub fn pyr_down(&self) -> Plane {
        const K: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
        let smooth = self.convolve_separable(&K);
        let (w, h) = (self.width.div_ceil(2), self.height.div_ceil(2));
        let mut out = vec![0.0; w * h];
        par::for_each_row(&mut out, w, |y, row| {
            for (x, o) in row.iter_mut().enumerate() {
                *o = smooth.at(2 * x, 2 * y);
            }
        });
        Plane::new(w, h, out)
    }

    /// Bilinear resize with pixel-centre alignment.
    pub fn resize(&self, width: usize, height: usize) -> Plane {
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut out = vec![0.0; width * height];
        par::for_each_row(&mut out, width, |y, row| {
            let fy = (y as f64 + 0.5) * sy - 0.5;
            for (x, o) in row.iter_mut().enumerate() {
                *o = self.sample((x as f64 + 0.5) * sx - 0.5, fy);
            }
        });
        Plane::new(width, height, out)
    }

    /// Central-difference gradients `(d/dx, d/dy)` with edge replication.
    pub fn gradients(&self) -> (Plane, Plane) {
        let (w, h) = (self.width, self.height);
        let mut gx = vec![0.0; w * h];
        let mut gy = vec![0.0; w * h];
        par::for_each_row(&mut gx, w, |y, row| {
            for (x, o) in row.iter_mut().enumerate() {
                let (x, y) = (x as isize, y as isize);
                *o = 0.5 * (self.at_clamped(x + 1, y) - self.at_clamped(x - 1, y));
            }
        });
        par::for_each_row(&mut gy, w, |y, row| {
            for (x, o) in row.iter_mut().enumerate() {
                let (x, y) = (x as isize, y as isize);
                *o = 0.5 * (self.at_clamped(x, y + 1) - self.at_clamped(x, y - 1));
            }
        });
        (Plane::new(w, h, gx), Plane::new(w, h, gy))
    }
}

/// Normalised Gaussian taps over `-radius..=radius`.
pub(crate) fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Bilinear sample of channel `c` of an interleaved grid, clamped to edges.
#[inline]
pub(crate) fn sample_grid(data: &[f64], width: usize, height: usize, channels: usize, c: usize, x: f64, y: f64) -> f64 {
    let xf = x.clamp(0.0, (width - 1) as f64);
    let yf = y.clamp(0.0, (height - 1) as f64);
    let x0 = xf.floor() as usize;
    let y0 = yf.floor() as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let ax = xf - x0 as f64;
    let ay = yf - y0 as f64;
    let idx = |x: usize, y: usize| data[(y * width + x) * channels + c];
    let top = idx(x0, y0) + ax * (idx(x1, y0) - idx(x0, y0));
    let bottom = idx(x0, y1) + ax * (idx(x1, y1) - idx(x0, y1));
    top + ay * (bottom - top)
}
