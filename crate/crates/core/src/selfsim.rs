//! Exact fractional Brownian motion simulators.
//!
//! * 1-D: fractional Gaussian noise by circulant embedding of
//!   `gamma(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2`, cumulated into a path
//!   that starts at 0. Increment variance is 1.
//! * 2-D: isotropic fBm with covariance
//!   `(|u|^2H + |v|^2H - |u-v|^2H) / 2` on the unit grid. Small grids use a
//!   Cholesky factor of the covariance. Larger ones use Stein's intrinsic
//!   circulant embedding (a stationary field with covariance
//!   `c0 - r^2H + c2 r^2` near the origin, plus a random linear term).
//!
//! Randomness comes from `ChaCha20Rng::seed_from_u64(seed)` switched to
//! stream `stream`; replicate `i` of a batch uses stream `i`. Standard
//! normals are drawn with `rand_distr::StandardNormal` in a documented
//! order (real then imaginary part of each embedding frequency, row-major),
//! so a given `(seed, stream)` reproduces the same bytes everywhere.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{NdcwtError, Result};
use crate::linalg::{transpose, FftPair};
use crate::par;

/// Largest `m * n` accepted by [`simulate_fbm_2d`].
pub const MAX_2D_POINTS: usize = 1 << 18;
/// Grids up to this many points are sampled through a Cholesky factor.
pub const CHOLESKY_POINTS: usize = 1024;
/// Relative tolerance for negative embedding eigenvalues.
const EIGEN_TOL: f64 = 1e-9;
const MAX_DOUBLINGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FbmShape {
    Line(usize),
    Grid(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmSpec {
    pub hurst: f64,
    pub shape: FbmShape,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl FbmSpec {
    pub fn line(hurst: f64, m: usize, seed: u64) -> Self {
        Self {
            hurst,
            shape: FbmShape::Line(m),
            seed,
            stream: 0,
        }
    }

    pub fn grid(hurst: f64, m: usize, n: usize, seed: u64) -> Self {
        Self {
            hurst,
            shape: FbmShape::Grid(m, n),
            seed,
            stream: 0,
        }
    }

    /// Settings for replicate `i` of a batch.
    pub fn replicate(&self, i: u64) -> Self {
        Self { stream: i, ..*self }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    fn check_hurst(&self) -> Result<()> {
        if self.hurst > 0.0 && self.hurst < 1.0 {
            Ok(())
        } else {
            Err(NdcwtError::InvalidHurst(self.hurst))
        }
    }
}

fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Autocovariance of unit-variance fractional Gaussian noise.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let a = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(a) - 2.0 * k.powf(a) + (k - 1.0).abs().powf(a))
}

/// Exact fGn of length `n` by circulant embedding.
pub fn simulate_fgn(hurst: f64, n: usize, rng: &mut ChaCha20Rng) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut half = n.max(1);
    let mut min_eig = 0.0;
    for _ in 0..=MAX_DOUBLINGS {
        let size = 2 * half;
        let mut c: Vec<Complex64> = (0..size)
            .map(|k| {
                let lag = k.min(size - k);
                Complex64::new(fgn_autocovariance(hurst, lag), 0.0)
            })
            .collect();
        let fft = FftPair::new(size);
        let mut scratch = fft.scratch();
        fft.forward(&mut c, &mut scratch);
        let max = c.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        min_eig = c.iter().map(|z| z.re).fold(f64::MAX, f64::min);
        if min_eig < -EIGEN_TOL * max {
            half *= 2;
            continue;
        }
        let mut w: Vec<Complex64> = c
            .iter()
            .map(|lam| {
                let re = normal(rng);
                let im = normal(rng);
                Complex64::new(re, im) * (lam.re.max(0.0) / size as f64).sqrt()
            })
            .collect();
        fft.forward(&mut w, &mut scratch);
        return Ok(w[..n].iter().map(|z| z.re).collect());
    }
    Err(NdcwtError::EmbeddingFailed {
        min_eigenvalue: min_eig,
    })
}

/// fBm path of length `m` starting at 0 (built from `m - 1` increments).
pub fn simulate_fbm_1d(spec: &FbmSpec) -> Result<Vec<f64>> {
    spec.check_hurst()?;
    let FbmShape::Line(m) = spec.shape else {
        return Err(NdcwtError::InvalidInput("1-D simulation needs a line shape".into()));
    };
    let mut rng = spec.rng();
    let noise = simulate_fgn(spec.hurst, m.saturating_sub(1), &mut rng)?;
    let mut path = Vec::with_capacity(m);
    if m > 0 {
        path.push(0.0);
    }
    let mut acc = 0.0;
    for e in noise {
        acc += e;
        path.push(acc);
    }
    Ok(path)
}

/// `count` replicates, replicate `i` on stream `i`.
pub fn simulate_fbm_1d_batch(spec: &FbmSpec, count: usize) -> Result<Vec<Vec<f64>>> {
    par::map_range(count, |i| simulate_fbm_1d(&spec.replicate(i as u64)))
        .into_iter()
        .collect()
}

/// Row-major `m x n` fBm sample with `B(0, 0) = 0`.
pub fn simulate_fbm_2d(spec: &FbmSpec) -> Result<Vec<f64>> {
    spec.check_hurst()?;
    let FbmShape::Grid(m, n) = spec.shape else {
        return Err(NdcwtError::InvalidInput("2-D simulation needs a grid shape".into()));
    };
    if m * n > MAX_2D_POINTS {
        return Err(NdcwtError::SizeLimit {
            rows: m,
            cols: n,
            limit: MAX_2D_POINTS,
        });
    }
    if m == 0 || n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = spec.rng();
    if m * n <= CHOLESKY_POINTS {
        fbm_2d_cholesky(spec.hurst, m, n, &mut rng)
    } else {
        fbm_2d_stein(spec.hurst, m, n, &mut rng)
    }
}

pub fn simulate_fbm_2d_batch(spec: &FbmSpec, count: usize) -> Result<Vec<Vec<f64>>> {
    par::map_range(count, |i| simulate_fbm_2d(&spec.replicate(i as u64)))
        .into_iter()
        .collect()
}

/// Isotropic fBm covariance between grid points.
pub fn fbm_covariance(hurst: f64, u: (f64, f64), v: (f64, f64)) -> f64 {
    let a = 2.0 * hurst;
    let norm = |x: f64, y: f64| (x * x + y * y).sqrt().powf(a);
    0.5 * (norm(u.0, u.1) + norm(v.0, v.1) - norm(u.0 - v.0, u.1 - v.1))
}

fn fbm_2d_cholesky(hurst: f64, m: usize, n: usize, rng: &mut ChaCha20Rng) -> Result<Vec<f64>> {
    let points: Vec<(f64, f64)> = (0..m * n).skip(1).map(|i| ((i / n) as f64, (i % n) as f64)).collect();
    let k = points.len();
    let mut out = vec![0.0; m * n];
    if k == 0 {
        return Ok(out);
    }
    let cov = DMatrix::from_fn(k, k, |r, c| fbm_covariance(hurst, points[r], points[c]));
    let chol = cov.cholesky().ok_or(NdcwtError::EmbeddingFailed {
        min_eigenvalue: f64::NAN,
    })?;
    let z = DVector::from_fn(k, |_, _| normal(rng));
    let x = chol.l() * z;
    out[1..].copy_from_slice(x.as_slice());
    Ok(out)
}

struct SteinParams {
    radius: f64,
    beta: f64,
    c0: f64,
    c2: f64,
}

impl SteinParams {
    fn new(alpha: f64, radius: f64) -> Self {
        if alpha <= 1.5 {
            Self {
                radius,
                beta: 0.0,
                c2: alpha / 2.0,
                c0: 1.0 - alpha / 2.0,
            }
        } else {
            let beta = alpha * (2.0 - alpha) / (3.0 * radius * (radius * radius - 1.0));
            let c2 = (alpha - beta * (radius - 1.0).powi(2) * (radius + 2.0)) / 2.0;
            let c0 = beta * (radius - 1.0).powi(3) + 1.0 - c2;
            Self { radius, beta, c0, c2 }
        }
    }

    fn covariance(&self, r: f64, alpha: f64) -> f64 {
        if r <= 1.0 {
            self.c0 - r.powf(alpha) + self.c2 * r * r
        } else if r <= self.radius {
            self.beta * (self.radius - r).powi(3) / r
        } else {
            0.0
        }
    }
}

/// In-place 2-D FFT of a row-major `size x size` array.
fn fft2(data: &mut Vec<Complex64>, size: usize, fft: &FftPair) {
    par::for_each_chunk_mut(data, size, |_, row| {
        let mut scratch = fft.scratch();
        fft.forward(row, &mut scratch);
    });
    let mut t = transpose(data, size, size);
    par::for_each_chunk_mut(&mut t, size, |_, row| {
        let mut scratch = fft.scratch();
        fft.forward(row, &mut scratch);
    });
    *data = transpose(&t, size, size);
}

fn fbm_2d_stein(hurst: f64, m: usize, n: usize, rng: &mut ChaCha20Rng) -> Result<Vec<f64>> {
    let alpha = 2.0 * hurst;
    // grid spacing 1/scale keeps every pairwise distance within 1
    let scale = ((2f64.sqrt() * (m.max(n) - 1) as f64).ceil() as usize).max(1);
    let mut radius = if alpha <= 1.5 { 1.0 } else { 2.0 };
    let mut min_eig = 0.0;
    for _ in 0..=MAX_DOUBLINGS {
        let params = SteinParams::new(alpha, radius);
        let size = 2 * (radius as usize) * scale;
        let dist = |i: usize| i.min(size - i) as f64 / scale as f64;
        let mut lam: Vec<Complex64> = (0..size * size)
            .map(|idx| {
                let r = dist(idx / size).hypot(dist(idx % size));
                Complex64::new(params.covariance(r, alpha), 0.0)
            })
            .collect();
        let fft = FftPair::new(size);
        fft2(&mut lam, size, &fft);
        let max = lam.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        min_eig = lam.iter().map(|z| z.re).fold(f64::MAX, f64::min);
        if min_eig < -EIGEN_TOL * max {
            radius *= 2.0;
            continue;
        }
        let total = (size * size) as f64;
        let mut w: Vec<Complex64> = lam
            .iter()
            .map(|l| {
                let re = normal(rng);
                let im = normal(rng);
                Complex64::new(re, im) * (l.re.max(0.0) / total).sqrt()
            })
            .collect();
        fft2(&mut w, size, &fft);
        let slope = (2.0 * params.c2).sqrt();
        let (n1, n2) = (normal(rng), normal(rng));
        let origin = w[0].re;
        let norm = (scale as f64).powf(hurst) / 2f64.sqrt();
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                let t1 = i as f64 / scale as f64;
                let t2 = j as f64 / scale as f64;
                let field = w[i * size + j].re - origin + slope * (t1 * n1 + t2 * n2);
                out.push(field * norm);
            }
        }
        return Ok(out);
    }
    Err(NdcwtError::EmbeddingFailed {
        min_eigenvalue: min_eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocovariance_values() {
        assert_eq!(fgn_autocovariance(0.5, 0), 1.0);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
        // H = 0.7, lag 1: (2^1.4 - 2) / 2
        assert!((fgn_autocovariance(0.7, 1) - (2f64.powf(1.4) - 2.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_hurst() {
        for h in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(
                simulate_fbm_1d(&FbmSpec::line(h, 64, 1)),
                Err(NdcwtError::InvalidHurst(_))
            ));
        }
    }

    #[test]
    fn size_limit_and_shape_errors() {
        assert!(matches!(
            simulate_fbm_2d(&FbmSpec::grid(0.5, 1024, 512, 1)),
            Err(NdcwtError::SizeLimit { .. })
        ));
        assert!(simulate_fbm_2d(&FbmSpec::line(0.5, 16, 1)).is_err());
        assert!(simulate_fbm_1d(&FbmSpec::grid(0.5, 4, 4, 1)).is_err());
    }

    #[test]
    fn deterministic_and_stream_separated() {
        let spec = FbmSpec::line(0.7, 257, 42);
        let a = simulate_fbm_1d(&spec).unwrap();
        let b = simulate_fbm_1d(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], 0.0);
        assert_eq!(a.len(), 257);
        let c = simulate_fbm_1d(&spec.replicate(1)).unwrap();
        assert_ne!(a, c);
        let batch = simulate_fbm_1d_batch(&spec, 3).unwrap();
        assert_eq!(batch[0], a);
        assert_eq!(batch[1], c);
    }

    #[test]
    fn grid_origin_is_zero() {
        for (m, n) in [(8, 8), (40, 50)] {
            let x = simulate_fbm_2d(&FbmSpec::grid(0.6, m, n, 3)).unwrap();
            assert_eq!(x.len(), m * n);
            assert_eq!(x[0], 0.0);
            assert_eq!(x, simulate_fbm_2d(&FbmSpec::grid(0.6, m, n, 3)).unwrap());
        }
    }

    #[test]
    fn steep_hurst_uses_wider_embedding() {
        // alpha > 1.5 goes through the radius-2 branch
        let x = simulate_fbm_2d(&FbmSpec::grid(0.9, 48, 40, 9)).unwrap();
        assert!(x.iter().all(|v| v.is_finite()));
    }
}
