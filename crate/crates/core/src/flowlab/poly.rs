//! Per-pixel quadratic fits `f(p) ≈ pᵀAp + bᵀp + c` over a Gaussian-weighted
//! neighbourhood, `p` measured from the pixel centre (`x` right, `y` down).
//!
//! With edge replication every pixel sees a full neighbourhood, so the
//! normal matrix is the same everywhere and is inverted once. The six
//! weighted moments are gathered with two separable passes.

use nalgebra::{Matrix6, Vector6};

use super::frame::Frame;
use super::plane::Plane;
use super::FlowError;
use crate::par;

/// Quadratic model of one pixel's neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quadratic {
    /// Symmetric 2x2 matrix.
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: f64,
}

/// Coefficients stored as `[c, bx, by, axx, ayy, axy]` per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticField {
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) coeffs: Vec<[f64; 6]>,
}

impl QuadraticField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn at(&self, x: usize, y: usize) -> Quadratic {
        let [c, bx, by, axx, ayy, axy] = self.coeffs[y * self.width + x];
        Quadratic {
            a: [[axx, axy], [axy, ayy]],
            b: [bx, by],
            c,
        }
    }

    /// Bilinear sample of all coefficients, clamped to edges.
    #[inline]
    pub(crate) fn sample(&self, x: f64, y: f64) -> [f64; 6] {
        let xf = x.clamp(0.0, (self.width - 1) as f64);
        let yf = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = xf.floor() as usize;
        let y0 = yf.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let (ax, ay) = (xf - x0 as f64, yf - y0 as f64);
        let w = self.width;
        let (p00, p10) = (&self.coeffs[y0 * w + x0], &self.coeffs[y0 * w + x1]);
        let (p01, p11) = (&self.coeffs[y1 * w + x0], &self.coeffs[y1 * w + x1]);
        let mut out = [0.0; 6];
        for k in 0..6 {
            let top = p00[k] + ax * (p10[k] - p00[k]);
            let bottom = p01[k] + ax * (p11[k] - p01[k]);
            out[k] = top + ay * (bottom - top);
        }
        out
    }
}

/// Polynomial expansion of a one-channel frame over a `poly_n` x `poly_n`
/// neighbourhood with Gaussian weights of std `poly_sigma`.
pub fn polynomial_expansion(frame: &Frame, poly_n: usize, poly_sigma: f64) -> Result<QuadraticField, FlowError> {
    if frame.channels() != 1 {
        return Err(FlowError::ChannelMismatch {
            expected: 1,
            got: frame.channels(),
        });
    }
    check_poly_params(poly_n, poly_sigma)?;
    Ok(expand(&frame.channel_plane(0), poly_n, poly_sigma))
}

pub(crate) fn check_poly_params(poly_n: usize, poly_sigma: f64) -> Result<(), FlowError> {
    if poly_n < 3 || poly_n.is_multiple_of(2) {
        return Err(FlowError::InvalidParams(format!("poly_n must be odd and >= 3, got {poly_n}")));
    }
    if !(poly_sigma > 0.0) {
        return Err(FlowError::InvalidParams(format!("poly_sigma must be positive, got {poly_sigma}")));
    }
    Ok(())
}

pub(crate) fn expand(plane: &Plane, poly_n: usize, poly_sigma: f64) -> QuadraticField {
    let r = (poly_n / 2) as isize;
    let weights: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * poly_sigma * poly_sigma)).exp())
        .collect();

    // Normal matrix over the basis [1, x, y, x², y², xy].
    let mut g = Matrix6::<f64>::zeros();
    for (j, wy) in (-r..=r).zip(&weights) {
        for (i, wx) in (-r..=r).zip(&weights) {
            let phi = basis(i as f64, j as f64);
            g += phi * phi.transpose() * (wx * wy);
        }
    }
    let g_inv = g.try_inverse().expect("polynomial normal matrix is positive definite");

    let (w, h) = (plane.width, plane.height);
    // Horizontal moments: Σ w f, Σ w x f, Σ w x² f.
    let mut horiz = vec![[0.0; 3]; w * h];
    par::for_each_row(&mut horiz, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let mut m = [0.0; 3];
            for (i, wx) in (-r..=r).zip(&weights) {
                let v = wx * plane.at_clamped(x as isize + i, y as isize);
                let fi = i as f64;
                m[0] += v;
                m[1] += v * fi;
                m[2] += v * fi * fi;
            }
            *out = m;
        }
    });

    let mut coeffs = vec![[0.0; 6]; w * h];
    par::for_each_row(&mut coeffs, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let mut m = Vector6::<f64>::zeros();
            for (j, wy) in (-r..=r).zip(&weights) {
                let yy = (y as isize + j).clamp(0, h as isize - 1) as usize;
                let hm = horiz[yy * w + x];
                let fj = j as f64;
                m[0] += wy * hm[0];
                m[1] += wy * hm[1];
                m[2] += wy * fj * hm[0];
                m[3] += wy * hm[2];
                m[4] += wy * fj * fj * hm[0];
                m[5] += wy * fj * hm[1];
            }
            let s = g_inv * m;
            *out = [s[0], s[1], s[2], s[3], s[4], 0.5 * s[5]];
        }
    });
    QuadraticField {
        width: w,
        height: h,
        coeffs,
    }
}

fn basis(x: f64, y: f64) -> Vector6<f64> {
    Vector6::new(1.0, x, y, x * x, y * y, x * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame(w: usize, h: usize, f: impl Fn(f64, f64) -> f64) -> Frame {
        Frame::from_fn(w, h, 1, |x, y, _| f(x as f64, y as f64)).unwrap()
    }

    #[test]
    fn constant_image() {
        let q = polynomial_expansion(&frame(12, 10, |_, _| 0.42), 5, 1.1).unwrap();
        for y in 0..10 {
            for x in 0..12 {
                let p = q.at(x, y);
                assert!((p.c - 0.42).abs() < 1e-12);
                assert!(p.b.iter().chain(p.a.iter().flatten()).all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn linear_ramp_interior() {
        let alpha = 0.03;
        let q = polynomial_expansion(&frame(20, 12, |x, _| alpha * x), 5, 1.1).unwrap();
        for y in 2..10 {
            for x in 2..18 {
                let p = q.at(x, y);
                assert!((p.b[0] - alpha).abs() < 1e-12 && p.b[1].abs() < 1e-12);
                assert!(p.a.iter().flatten().all(|v| v.abs() < 1e-12));
                assert!((p.c - alpha * x as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadratic_recovered() {
        // f = (x / 16)², so A[0][0] = 1 / 256 everywhere inside
        let q = polynomial_expansion(&frame(16, 8, |x, _| (x / 16.0).powi(2)), 5, 1.1).unwrap();
        for y in 2..6 {
            for x in 2..14 {
                let p = q.at(x, y);
                assert!((p.a[0][0] * 256.0 - 1.0).abs() < 1e-6, "{:?}", p);
                assert!(p.a[1][1].abs() < 1e-12 && p.a[0][1].abs() < 1e-12);
            }
        }
    }

    /// Direct weighted least squares at every pixel, no separability.
    fn brute_force(plane: &Plane, n: usize, sigma: f64, x: usize, y: usize) -> [f64; 6] {
        let r = (n / 2) as isize;
        let rows = n * n;
        let mut design = DMatrix::<f64>::zeros(rows, 6);
        let mut rhs = DVector::<f64>::zeros(rows);
        let mut k = 0;
        for j in -r..=r {
            for i in -r..=r {
                let w = (-((i * i + j * j) as f64) / (2.0 * sigma * sigma)).exp().sqrt();
                let phi = basis(i as f64, j as f64);
                for c in 0..6 {
                    design[(k, c)] = w * phi[c];
                }
                rhs[k] = w * plane.at_clamped(x as isize + i, y as isize + j);
                k += 1;
            }
        }
        let s = design.svd(true, true).solve(&rhs, 1e-14).unwrap();
        [s[0], s[1], s[2], s[3], s[4], 0.5 * s[5]]
    }

    #[test]
    fn matches_direct_least_squares_on_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let plane = Plane::new(11, 9, (0..99).map(|_| rng.gen::<f64>()).collect());
        for (n, sigma) in [(5, 1.1), (7, 1.5)] {
            let q = expand(&plane, n, sigma);
            for y in 0..9 {
                for x in 0..11 {
                    let oracle = brute_force(&plane, n, sigma, x, y);
                    let got = q.coeffs[y * 11 + x];
                    for k in 0..6 {
                        assert!((got[k] - oracle[k]).abs() < 1e-9, "({x},{y}) k={k}: {} vs {}", got[k], oracle[k]);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        let f = frame(4, 4, |_, _| 0.0);
        assert!(polynomial_expansion(&f, 4, 1.1).is_err());
        assert!(polynomial_expansion(&f, 5, 0.0).is_err());
        let rgb = Frame::filled(4, 4, 3, 0.5).unwrap();
        assert!(polynomial_expansion(&rgb, 5, 1.1).is_err());
    }
}
