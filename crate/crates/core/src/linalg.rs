//! Dense row-major complex kernels and the FFT helper shared by the
//! transform plans.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `a (rows x inner) * b (inner x cols)`.
pub(crate) fn gemm_nn(a: &[Complex64], rows: usize, inner: usize, b: &[Complex64], cols: usize) -> Vec<Complex64> {
    debug_assert_eq!(a.len(), rows * inner);
    debug_assert_eq!(b.len(), inner * cols);
    let mut out = vec![ZERO; rows * cols];
    if cols == 0 {
        return out;
    }
    par::for_each_chunk_mut(&mut out, cols, |i, row| {
        let arow = &a[i * inner..(i + 1) * inner];
        for (k, &aik) in arow.iter().enumerate() {
            if aik == ZERO {
                continue;
            }
            let brow = &b[k * cols..(k + 1) * cols];
            for (o, &bkj) in row.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    });
    out
}

/// `a (rows x inner) * b^H` where `b` is stored `(cols x inner)`.
pub(crate) fn gemm_nh(a: &[Complex64], rows: usize, inner: usize, b: &[Complex64], cols: usize) -> Vec<Complex64> {
    debug_assert_eq!(a.len(), rows * inner);
    debug_assert_eq!(b.len(), cols * inner);
    let mut out = vec![ZERO; rows * cols];
    if cols == 0 {
        return out;
    }
    par::for_each_chunk_mut(&mut out, cols, |i, row| {
        let arow = &a[i * inner..(i + 1) * inner];
        for (j, o) in row.iter_mut().enumerate() {
            let brow = &b[j * inner..(j + 1) * inner];
            *o = arow.iter().zip(brow).map(|(x, y)| x * y.conj()).sum();
        }
    });
    out
}

/// `a^H * b` where `a` is stored `(inner x rows)` and `b` is `(inner x cols)`.
pub(crate) fn gemm_hn(a: &[Complex64], inner: usize, rows: usize, b: &[Complex64], cols: usize) -> Vec<Complex64> {
    debug_assert_eq!(a.len(), inner * rows);
    debug_assert_eq!(b.len(), inner * cols);
    let mut out = vec![ZERO; rows * cols];
    if cols == 0 {
        return out;
    }
    par::for_each_chunk_mut(&mut out, cols, |l, row| {
        for r in 0..inner {
            let w = a[r * rows + l].conj();
            if w == ZERO {
                continue;
            }
            let brow = &b[r * cols..(r + 1) * cols];
            for (o, &x) in row.iter_mut().zip(brow) {
                *o += w * x;
            }
        }
    });
    out
}

pub(crate) fn transpose(a: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; rows * cols];
    const TILE: usize = 32;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    out[c * rows + r] = a[r * cols + c];
                }
            }
        }
    }
    out
}

/// Forward/inverse FFT pair of a fixed length. The inverse is unnormalised,
/// matching rustfft.
#[derive(Clone)]
pub(crate) struct FftPair {
    pub len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("len", &self.len).finish()
    }
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        let n = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![ZERO; n]
    }

    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }
}
