//! 1-D non-decimated complex wavelet transform in matrix form.
//!
//! `W` has `(p + 1) * m` rows arranged in `m`-row blocks:
//! `[smooth J-p | detail J-p | detail J-p+1 | ... | detail J-1]`. Boundaries
//! are periodic, so every block is a circulant matrix. Block `b` is
//! determined by its impulse response `u_b`, and
//! `W[b*m + n, l] = u_b[(n - l) mod m]`.
//!
//! The impulse responses come from the Mallat cascade without decimation.
//! At dilation step `s` (0 = finest) the low/high-pass taps are spread
//! `2^s` samples apart, so for the detail block of level `J-1-s`:
//! `U_b(q) = G(2^s q) * prod_{i<s} H(2^i q)`.
//! The plan stores these frequency symbols exactly (evaluated from the taps,
//! not by FFT) and derives dense rows from them on demand.
//!
//! The weight diagonal `T` is `2^-p` on the smooth block and `2^-(s+1)` on
//! the detail block at step `s`, so that `W^H T W = I`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NdcwtError, Result};
use crate::filters::ComplexFilterPair;
use crate::linalg::FftPair;
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest `(p + 1) * m * m` for which [`Backend::Auto`] materialises `W`.
pub const DENSE_AUTO_LIMIT: usize = 1 << 22;
/// Forward coefficients with modulus at most this times the input's
/// Euclidean norm are round-off and are stored as exact zeros.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Zeroes the round-off floor of a forward transform of an input with
/// Euclidean norm `input_norm`.
pub(crate) fn snap_roundoff(out: &mut [Complex64], input_norm: f64) {
    let tol = ROUNDOFF_FLOOR * input_norm;
    for z in out.iter_mut() {
        if z.norm() <= tol {
            *z = ZERO;
        }
    }
}

/// How the product with `W` is evaluated. Both backends apply the same
/// matrix; `Circulant` diagonalises each block with the FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Auto,
    Dense,
    Circulant,
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Self::Auto),
            "dense" => Ok(Self::Dense),
            "circulant" => Ok(Self::Circulant),
            other => Err(format!("unknown backend `{other}` (auto|dense|circulant)")),
        }
    }
}

/// Which operator built from the blocks of `W` to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Op {
    /// `W`
    Plain,
    /// entrywise `conj(W)`; right-multiplying a row vector by `W^H`.
    Conj,
    /// `W^H`
    Adjoint,
    /// `W^T`; right-multiplying a row vector by `W`.
    Transpose,
}

/// `ceil(log2 m)`, the finest level index `J`.
pub fn max_level(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        (usize::BITS - (m - 1).leading_zeros()) as usize
    }
}

/// The block-circulant transform matrix `W_m^(p)` and its weights `T_m^(p)`.
pub struct WaveletMatrix {
    m: usize,
    depth: usize,
    symbols: Vec<Vec<Complex64>>,
    block_weights: Vec<f64>,
    real_taps: bool,
    fft: FftPair,
    dense: OnceLock<Vec<Complex64>>,
}

impl std::fmt::Debug for WaveletMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WaveletMatrix")
            .field("m", &self.m)
            .field("depth", &self.depth)
            .field("block_weights", &self.block_weights)
            .finish_non_exhaustive()
    }
}

impl Clone for WaveletMatrix {
    fn clone(&self) -> Self {
        let dense = OnceLock::new();
        if let Some(d) = self.dense.get() {
            let _ = dense.set(d.clone());
        }
        Self {
            m: self.m,
            depth: self.depth,
            symbols: self.symbols.clone(),
            block_weights: self.block_weights.clone(),
            real_taps: self.real_taps,
            fft: self.fft.clone(),
            dense,
        }
    }
}

/// DFT of a filter whose taps are spread `2^step` samples apart, on `m` points.
fn dilated_symbol(taps: &[Complex64], offset: isize, step: usize, m: usize, twiddle: &[Complex64]) -> Vec<Complex64> {
    let m128 = m as u128;
    let stride = pow2_mod(step, m) as u128;
    let shifts: Vec<u128> = (0..taps.len())
        .map(|i| {
            let k = (offset + i as isize).rem_euclid(m as isize) as u128;
            (k * stride) % m128
        })
        .collect();
    (0..m)
        .map(|q| {
            taps.iter()
                .zip(&shifts)
                .map(|(&t, &s)| t * twiddle[((q as u128 * s) % m128) as usize])
                .sum()
        })
        .collect()
}

fn pow2_mod(exp: usize, m: usize) -> usize {
    let mut r = 1 % m;
    for _ in 0..exp {
        r = (r * 2) % m;
    }
    r
}

impl WaveletMatrix {
    pub fn new(m: usize, depth: usize, filter: &ComplexFilterPair) -> Result<Self> {
        validate_dims(m, depth, filter.len())?;
        let twiddle: Vec<Complex64> = (0..m)
            .map(|r| Complex64::from_polar(1.0, -2.0 * PI * r as f64 / m as f64))
            .collect();
        let mut low = vec![Complex64::new(1.0, 0.0); m];
        let mut details = Vec::with_capacity(depth);
        let mut detail_weights = Vec::with_capacity(depth);
        for step in 0..depth {
            let g = dilated_symbol(&filter.g, filter.highpass_offset(), step, m, &twiddle);
            let h = dilated_symbol(&filter.h, filter.support_offset, step, m, &twiddle);
            details.push(low.iter().zip(&g).map(|(a, b)| a * b).collect::<Vec<_>>());
            detail_weights.push(0.5f64.powi(step as i32 + 1));
            low.iter_mut().zip(&h).for_each(|(a, b)| *a *= b);
        }
        let mut symbols = vec![low];
        let mut block_weights = vec![0.5f64.powi(depth as i32)];
        // coarsest detail first
        symbols.extend(details.into_iter().rev());
        block_weights.extend(detail_weights.into_iter().rev());
        Ok(Self {
            m,
            depth,
            symbols,
            block_weights,
            real_taps: filter.is_real(),
            fft: FftPair::new(m),
            dense: OnceLock::new(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn rows(&self) -> usize {
        (self.depth + 1) * self.m
    }

    pub fn blocks(&self) -> usize {
        self.depth + 1
    }

    /// Per-block weight; block 0 is the smooth block.
    pub fn block_weights(&self) -> &[f64] {
        &self.block_weights
    }

    /// Full diagonal of `T`, one entry per row of `W`.
    pub fn weight_diagonal(&self) -> Vec<f64> {
        self.block_weights
            .iter()
            .flat_map(|&w| std::iter::repeat_n(w, self.m))
            .collect()
    }

    /// Frequency response of block `b`.
    pub fn symbol(&self, b: usize) -> &[Complex64] {
        &self.symbols[b]
    }

    /// Impulse response `u_b` of block `b` (first column of the block).
    pub fn kernel(&self, b: usize) -> Vec<Complex64> {
        let mut buf = self.symbols[b].clone();
        let mut scratch = self.fft.scratch();
        self.fft.inverse(&mut buf, &mut scratch);
        let scale = 1.0 / self.m as f64;
        for z in &mut buf {
            *z *= scale;
            if self.real_taps {
                z.im = 0.0;
            }
        }
        buf
    }

    /// Row-major dense `W`, built on first use.
    pub fn dense(&self) -> &[Complex64] {
        self.dense.get_or_init(|| {
            let m = self.m;
            let kernels: Vec<Vec<Complex64>> = (0..self.blocks()).map(|b| self.kernel(b)).collect();
            let mut w = vec![ZERO; self.rows() * m];
            par::for_each_chunk_mut(&mut w, m, |row, out| {
                let (b, n) = (row / m, row % m);
                let u = &kernels[b];
                for (l, o) in out.iter_mut().enumerate() {
                    *o = u[(n + m - l) % m];
                }
            });
            w
        })
    }

    /// Entry `W[row, col]`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.dense()[row * self.m + col]
    }

    fn symbol_for(&self, b: usize, q: usize, op: Op) -> Complex64 {
        let s = &self.symbols[b];
        match op {
            Op::Plain => s[q],
            Op::Adjoint => s[q].conj(),
            Op::Transpose => s[(self.m - q) % self.m],
            Op::Conj => s[(self.m - q) % self.m].conj(),
        }
    }

    /// `out = Op(W) x` for `Op` in {`W`, `conj(W)`}; `out` has `(p+1) m` entries.
    pub(crate) fn analyze_fft(&self, x: &[Complex64], op: Op, out: &mut [Complex64]) {
        let m = self.m;
        let mut spec = x.to_vec();
        let mut scratch = self.fft.scratch();
        self.fft.forward(&mut spec, &mut scratch);
        let scale = 1.0 / m as f64;
        for (b, block) in out.chunks_mut(m).enumerate() {
            for (q, o) in block.iter_mut().enumerate() {
                *o = spec[q] * self.symbol_for(b, q, op) * scale;
            }
            self.fft.inverse(block, &mut scratch);
        }
    }

    /// Only block `b` of [`Self::analyze_fft`].
    pub(crate) fn analyze_block_fft(&self, x: &[Complex64], b: usize, op: Op, out: &mut [Complex64]) {
        let mut spec = x.to_vec();
        let mut scratch = self.fft.scratch();
        self.fft.forward(&mut spec, &mut scratch);
        let scale = 1.0 / self.m as f64;
        for (q, o) in out.iter_mut().enumerate() {
            *o = spec[q] * self.symbol_for(b, q, op) * scale;
        }
        self.fft.inverse(out, &mut scratch);
    }

    /// `out = Op(W) T d` for `Op` in {`W^H`, `W^T`}; `d` has `(p+1) m` entries.
    pub(crate) fn synthesize_fft(&self, d: &[Complex64], op: Op, out: &mut [Complex64]) {
        let m = self.m;
        let mut acc = vec![ZERO; m];
        let mut buf = vec![ZERO; m];
        let mut scratch = self.fft.scratch();
        for (b, block) in d.chunks(m).enumerate() {
            buf.copy_from_slice(block);
            self.fft.forward(&mut buf, &mut scratch);
            let w = self.block_weights[b];
            for (q, a) in acc.iter_mut().enumerate() {
                *a += buf[q] * self.symbol_for(b, q, op) * w;
            }
        }
        self.fft.inverse(&mut acc, &mut scratch);
        let scale = 1.0 / m as f64;
        for (o, a) in out.iter_mut().zip(&acc) {
            *o = a * scale;
        }
    }

    pub(crate) fn analyze_dense(&self, x: &[Complex64], out: &mut [Complex64]) {
        let w = self.dense();
        let m = self.m;
        for (row, o) in out.iter_mut().enumerate() {
            *o = w[row * m..(row + 1) * m].iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub(crate) fn synthesize_dense(&self, d: &[Complex64], out: &mut [Complex64]) {
        let w = self.dense();
        let m = self.m;
        out.iter_mut().for_each(|o| *o = ZERO);
        for (row, &coef) in d.iter().enumerate() {
            let scaled = coef * self.block_weights[row / m];
            if scaled == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(&w[row * m..(row + 1) * m]) {
                *o += a.conj() * scaled;
            }
        }
    }

    pub(crate) fn resolve(&self, backend: Backend) -> Backend {
        match backend {
            Backend::Auto if self.rows() * self.m <= DENSE_AUTO_LIMIT => Backend::Dense,
            Backend::Auto => Backend::Circulant,
            other => other,
        }
    }

    pub(crate) fn real_taps(&self) -> bool {
        self.real_taps
    }
}

fn validate_dims(m: usize, depth: usize, taps: usize) -> Result<()> {
    if depth == 0 {
        return Err(NdcwtError::DepthTooSmall);
    }
    if m < taps.max(2) {
        return Err(NdcwtError::SignalTooShort { len: m, taps });
    }
    let max = max_level(m);
    if depth > max {
        return Err(NdcwtError::DepthTooLarge { depth, len: m, max });
    }
    Ok(())
}

/// A built 1-D transform: matrix, weights and the filter they came from.
#[derive(Debug, Clone)]
pub struct TransformPlan1D {
    pub filter: ComplexFilterPair,
    matrix: WaveletMatrix,
    backend: Backend,
}

impl TransformPlan1D {
    pub fn new(m: usize, depth: usize, filter: &ComplexFilterPair) -> Result<Self> {
        Ok(Self {
            filter: filter.clone(),
            matrix: WaveletMatrix::new(m, depth, filter)?,
            backend: Backend::Auto,
        })
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn m(&self) -> usize {
        self.matrix.m
    }

    pub fn depth(&self) -> usize {
        self.matrix.depth
    }

    /// `J = ceil(log2 m)`.
    pub fn max_level(&self) -> usize {
        max_level(self.m())
    }

    pub fn matrix(&self) -> &WaveletMatrix {
        &self.matrix
    }

    /// `d = W y` for a complex input.
    pub fn forward(&self, y: &[Complex64]) -> Result<Coefficients1D> {
        let flat = self.forward_flat(y, self.backend)?;
        Ok(self.wrap(flat))
    }

    /// `d = W y` for a real input.
    pub fn forward_real(&self, y: &[f64]) -> Result<Coefficients1D> {
        let z: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&z)
    }

    /// `W y` in row order of `W`.
    pub fn forward_flat(&self, y: &[Complex64], backend: Backend) -> Result<Vec<Complex64>> {
        if y.len() != self.m() {
            return Err(NdcwtError::LengthMismatch {
                expected: self.m(),
                actual: y.len(),
            });
        }
        let mut out = vec![ZERO; self.matrix.rows()];
        match self.matrix.resolve(backend) {
            Backend::Dense => self.matrix.analyze_dense(y, &mut out),
            _ => self.matrix.analyze_fft(y, Op::Plain, &mut out),
        }
        // real taps on real data give real coefficients; drop FFT round-off
        if self.matrix.real_taps && y.iter().all(|z| z.im == 0.0) {
            out.iter_mut().for_each(|z| z.im = 0.0);
        }
        snap_roundoff(&mut out, y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
        Ok(out)
    }

    /// `y = W^H T d`.
    pub fn inverse(&self, coeffs: &Coefficients1D) -> Result<Vec<Complex64>> {
        if coeffs.m != self.m() || coeffs.depth != self.depth() {
            return Err(NdcwtError::ShapeMismatch {
                expected: (self.m(), self.depth()),
                actual: (coeffs.m, coeffs.depth),
            });
        }
        self.inverse_flat(&coeffs.to_flat(), self.backend)
    }

    pub fn inverse_flat(&self, d: &[Complex64], backend: Backend) -> Result<Vec<Complex64>> {
        if d.len() != self.matrix.rows() {
            return Err(NdcwtError::LengthMismatch {
                expected: self.matrix.rows(),
                actual: d.len(),
            });
        }
        let mut out = vec![ZERO; self.m()];
        match self.matrix.resolve(backend) {
            Backend::Dense => self.matrix.synthesize_dense(d, &mut out),
            _ => self.matrix.synthesize_fft(d, Op::Adjoint, &mut out),
        }
        Ok(out)
    }

    fn wrap(&self, flat: Vec<Complex64>) -> Coefficients1D {
        Coefficients1D::from_flat(
            self.m(),
            self.depth(),
            self.max_level() as i32,
            &self.filter.name,
            &flat,
        )
    }

    /// Forward transforms of many signals of the same length.
    pub fn forward_batch(&self, signals: &[Vec<f64>]) -> Result<Vec<Coefficients1D>> {
        par::map_range(signals.len(), |i| self.forward_real(&signals[i]))
            .into_iter()
            .collect()
    }
}

/// Per-level coefficient vectors of a 1-D transform, each of length `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients1D {
    pub m: usize,
    pub depth: usize,
    /// `J`; detail levels run from `J - depth` (coarsest) to `J - 1`.
    pub max_level: i32,
    pub filter: String,
    pub smooth: Vec<Complex64>,
    /// Coarsest first.
    pub details: Vec<Vec<Complex64>>,
}

impl Coefficients1D {
    pub fn from_flat(m: usize, depth: usize, max_level: i32, filter: &str, flat: &[Complex64]) -> Self {
        let mut blocks = flat.chunks(m).map(<[Complex64]>::to_vec);
        let smooth = blocks.next().unwrap_or_default();
        Self {
            m,
            depth,
            max_level,
            filter: filter.to_string(),
            smooth,
            details: blocks.collect(),
        }
    }

    /// `J0 = J - p`.
    pub fn coarsest_level(&self) -> i32 {
        self.max_level - self.depth as i32
    }

    pub fn level(&self, j: i32) -> Option<&[Complex64]> {
        let idx = j - self.coarsest_level();
        if idx < 0 {
            return None;
        }
        self.details.get(idx as usize).map(Vec::as_slice)
    }

    /// `(j, d_j)` pairs, coarsest first.
    pub fn levels(&self) -> impl Iterator<Item = (i32, &[Complex64])> + '_ {
        let j0 = self.coarsest_level();
        self.details
            .iter()
            .enumerate()
            .map(move |(i, d)| (j0 + i as i32, d.as_slice()))
    }

    pub fn total_len(&self) -> usize {
        self.smooth.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    /// Coefficients in row order of `W`.
    pub fn to_flat(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.total_len());
        out.extend_from_slice(&self.smooth);
        for d in &self.details {
            out.extend_from_slice(d);
        }
        out
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.smooth.iter_mut().for_each(|v| *v = ZERO);
        z.details.iter_mut().for_each(|d| d.iter_mut().for_each(|v| *v = ZERO));
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::get_filter;

    fn rel_err(a: &[Complex64], b: &[f64]) -> f64 {
        let num: f64 = a
            .iter()
            .zip(b)
            .map(|(x, &y)| (x - Complex64::new(y, 0.0)).norm_sqr())
            .sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn max_level_is_ceil_log2() {
        assert_eq!(max_level(8), 3);
        assert_eq!(max_level(9), 4);
        assert_eq!(max_level(1000), 10);
        assert_eq!(max_level(1024), 10);
        assert_eq!(max_level(2), 1);
    }

    #[test]
    fn haar_m8_p3_shape_and_weights() {
        let plan = TransformPlan1D::new(8, 3, &get_filter("haar").unwrap()).unwrap();
        let w = plan.matrix();
        assert_eq!(w.rows(), 32);
        assert_eq!(w.dense().len(), 32 * 8);
        let t = w.weight_diagonal();
        let mut expected = vec![0.125; 16];
        expected.extend(vec![0.25; 8]);
        expected.extend(vec![0.5; 8]);
        assert_eq!(t, expected);
    }

    #[test]
    fn weighted_gram_is_identity() {
        for name in ["haar", "cdaub6"] {
            for (m, p) in [(8, 3), (13, 2), (32, 5)] {
                let plan = TransformPlan1D::new(m, p, &get_filter(name).unwrap()).unwrap();
                let w = plan.matrix().dense();
                let t = plan.matrix().weight_diagonal();
                for i in 0..m {
                    for j in 0..m {
                        let v: Complex64 = (0..t.len()).map(|r| w[r * m + i].conj() * t[r] * w[r * m + j]).sum();
                        let target = if i == j { 1.0 } else { 0.0 };
                        assert!((v - target).norm() < 1e-8, "{name} m={m} p={p} ({i},{j}) {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn depth_errors() {
        let haar = get_filter("haar").unwrap();
        assert!(matches!(
            TransformPlan1D::new(8, 4, &haar),
            Err(NdcwtError::DepthTooLarge {
                depth: 4,
                len: 8,
                max: 3
            })
        ));
        assert!(matches!(
            TransformPlan1D::new(8, 0, &haar),
            Err(NdcwtError::DepthTooSmall)
        ));
        let cd = get_filter("cdaub6").unwrap();
        assert!(matches!(
            TransformPlan1D::new(3, 1, &cd),
            Err(NdcwtError::SignalTooShort { len: 3, taps: 6 })
        ));
    }

    #[test]
    fn constant_signal_has_no_detail() {
        for name in ["haar", "cdaub6"] {
            let plan = TransformPlan1D::new(100, 5, &get_filter(name).unwrap()).unwrap();
            let c = plan.forward_real(&vec![3.5; 100]).unwrap();
            for (_, d) in c.levels() {
                assert!(d.iter().all(|z| z.norm() < 1e-10));
            }
            assert!(c.smooth.iter().all(|z| z.norm() > 1.0));
        }
    }

    #[test]
    fn non_dyadic_length() {
        let plan = TransformPlan1D::new(1000, 3, &get_filter("cdaub6").unwrap()).unwrap();
        let y: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let c = plan.forward_real(&y).unwrap();
        assert_eq!(c.total_len(), 4000);
        assert_eq!(c.coarsest_level(), 7);
        assert_eq!(c.levels().map(|(j, _)| j).collect::<Vec<_>>(), vec![7, 8, 9]);
        let back = plan.inverse(&c).unwrap();
        assert!(rel_err(&back, &y) < 1e-8);
    }

    #[test]
    fn backends_agree() {
        let plan = TransformPlan1D::new(96, 4, &get_filter("cdaub6").unwrap()).unwrap();
        let y: Vec<Complex64> = (0..96)
            .map(|i| Complex64::new((i as f64).cos(), (i as f64 * 0.3).sin()))
            .collect();
        let a = plan.forward_flat(&y, Backend::Dense).unwrap();
        let b = plan.forward_flat(&y, Backend::Circulant).unwrap();
        for (x, z) in a.iter().zip(&b) {
            assert!((x - z).norm() < 1e-12);
        }
        let ya = plan.inverse_flat(&a, Backend::Dense).unwrap();
        let yb = plan.inverse_flat(&a, Backend::Circulant).unwrap();
        for ((x, z), orig) in ya.iter().zip(&yb).zip(&y) {
            assert!((x - z).norm() < 1e-12);
            assert!((x - orig).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_coefficients_invert_to_zero() {
        let plan = TransformPlan1D::new(64, 3, &get_filter("cdaub6").unwrap()).unwrap();
        let c = plan.forward_real(&vec![1.0; 64]).unwrap().zeros_like();
        assert!(plan.inverse(&c).unwrap().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn mismatches_are_reported() {
        let plan = TransformPlan1D::new(64, 3, &get_filter("haar").unwrap()).unwrap();
        assert!(matches!(
            plan.forward_real(&[1.0; 10]),
            Err(NdcwtError::LengthMismatch {
                expected: 64,
                actual: 10
            })
        ));
        let other = TransformPlan1D::new(64, 2, &get_filter("haar").unwrap()).unwrap();
        let c = other.forward_real(&[1.0; 64]).unwrap();
        assert!(matches!(plan.inverse(&c), Err(NdcwtError::ShapeMismatch { .. })));
    }

    #[test]
    fn haar_real_input_gives_exactly_real_coefficients() {
        let plan = TransformPlan1D::new(4096, 6, &get_filter("haar").unwrap())
            .unwrap()
            .with_backend(Backend::Circulant);
        let y: Vec<f64> = (0..4096).map(|i| ((i * 7919) % 97) as f64).collect();
        let c = plan.forward_real(&y).unwrap();
        assert!(c.details.iter().flatten().all(|z| z.im == 0.0));
    }
}
