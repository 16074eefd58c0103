//! Scale-mixing 2-D transform `B = W_m A W_n^H` of rectangular images.
//!
//! Block `(a, b)` of `B` pairs row block `a` of `W_m` with column block `b`
//! of `W_n`. The result holds the smooth block `c`, the mixed blocks
//! `d^(h)` (smooth rows, detail columns) and `d^(v)` (detail rows, smooth
//! columns), and the diagonal-type blocks `d^(d)` for every scale pair
//! `(j1, j2)`.
//!
//! Both axes label levels against a common `J = ceil(log2 min(m, n))`, so
//! the finest level on either axis is `J - 1`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NdcwtError, Result};
use crate::filters::ComplexFilterPair;
use crate::linalg::{gemm_hn, gemm_nh, gemm_nn, transpose};
use crate::ndcwt1d::{max_level, snap_roundoff, Backend, Op, TransformPlan1D};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AxisBlock {
    Smooth,
    Detail(i32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockKey {
    pub row: AxisBlock,
    pub col: AxisBlock,
}

/// Position of a block inside `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRegion {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone)]
pub struct TransformPlan2D {
    pub row_plan: TransformPlan1D,
    pub col_plan: TransformPlan1D,
    max_level: i32,
    backend: Backend,
}

/// Label of block `b` on an axis of depth `depth`.
fn axis_block(b: usize, depth: usize, max_level: i32) -> AxisBlock {
    if b == 0 {
        AxisBlock::Smooth
    } else {
        AxisBlock::Detail(max_level - depth as i32 + b as i32 - 1)
    }
}

fn axis_index(block: AxisBlock, depth: usize, max_level: i32) -> Option<usize> {
    match block {
        AxisBlock::Smooth => Some(0),
        AxisBlock::Detail(j) => {
            let b = j - (max_level - depth as i32) + 1;
            (1..=depth as i32).contains(&b).then_some(b as usize)
        }
    }
}

impl TransformPlan2D {
    /// Same filter on both axes.
    pub fn new(m: usize, n: usize, p1: usize, p2: usize, filter: &ComplexFilterPair) -> Result<Self> {
        Self::with_filters(m, n, p1, p2, filter, filter)
    }

    /// Separate filters for rows (`W_m`) and columns (`W_n`).
    pub fn with_filters(
        m: usize,
        n: usize,
        p1: usize,
        p2: usize,
        row_filter: &ComplexFilterPair,
        col_filter: &ComplexFilterPair,
    ) -> Result<Self> {
        let row_plan = TransformPlan1D::new(m, p1, row_filter)?;
        let col_plan = TransformPlan1D::new(n, p2, col_filter)?;
        Ok(Self {
            row_plan,
            col_plan,
            max_level: max_level(m.min(n)) as i32,
            backend: Backend::Auto,
        })
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_plan.m(), self.col_plan.m())
    }

    pub fn depths(&self) -> (usize, usize) {
        (self.row_plan.depth(), self.col_plan.depth())
    }

    pub fn max_level(&self) -> i32 {
        self.max_level
    }

    /// Shape of `B`: `((p1+1) m, (p2+1) n)`.
    pub fn output_shape(&self) -> (usize, usize) {
        (self.row_plan.matrix().rows(), self.col_plan.matrix().rows())
    }

    fn resolve(&self) -> Backend {
        match self.backend {
            Backend::Auto => {
                let (wm, wn) = (self.row_plan.matrix(), self.col_plan.matrix());
                let dense_ok =
                    wm.resolve(Backend::Auto) == Backend::Dense && wn.resolve(Backend::Auto) == Backend::Dense;
                if dense_ok {
                    Backend::Dense
                } else {
                    Backend::Circulant
                }
            }
            other => other,
        }
    }

    fn check_input(&self, a: &[f64], shape: (usize, usize)) -> Result<()> {
        let expected = self.shape();
        if shape != expected || a.len() != shape.0 * shape.1 {
            return Err(NdcwtError::ShapeMismatch {
                expected,
                actual: shape,
            });
        }
        Ok(())
    }

    fn real_taps(&self) -> bool {
        self.row_plan.matrix().real_taps() && self.col_plan.matrix().real_taps()
    }

    /// `W_m A` as a `(p1+1) m x n` row-major matrix.
    fn row_pass(&self, a: &[Complex64], backend: Backend) -> Vec<Complex64> {
        let (m, n) = self.shape();
        let wm = self.row_plan.matrix();
        match backend {
            Backend::Dense => gemm_nn(wm.dense(), wm.rows(), m, a, n),
            _ => {
                let at = transpose(a, m, n);
                let mut rt = vec![ZERO; n * wm.rows()];
                par::for_each_chunk_mut(&mut rt, wm.rows(), |c, out| {
                    wm.analyze_fft(&at[c * m..(c + 1) * m], Op::Plain, out);
                });
                transpose(&rt, n, wm.rows())
            }
        }
    }

    /// `B = W_m A W_n^H` for a real `m x n` row-major matrix.
    pub fn forward(&self, a: &[f64], shape: (usize, usize)) -> Result<Coefficients2D> {
        self.check_input(a, shape)?;
        let az: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let backend = self.resolve();
        let n = self.col_plan.m();
        let (wm, wn) = (self.row_plan.matrix(), self.col_plan.matrix());
        let r = self.row_pass(&az, backend);
        let mut b = match backend {
            Backend::Dense => gemm_nh(&r, wm.rows(), n, wn.dense(), wn.rows()),
            _ => {
                let mut b = vec![ZERO; wm.rows() * wn.rows()];
                par::for_each_chunk_mut(&mut b, wn.rows(), |row, out| {
                    wn.analyze_fft(&r[row * n..(row + 1) * n], Op::Conj, out);
                });
                b
            }
        };
        if self.real_taps() {
            b.iter_mut().for_each(|z| z.im = 0.0);
        }
        snap_roundoff(&mut b, frobenius(a));
        Ok(self.wrap(b))
    }

    /// `A = W_m^H T_m B T_n W_n`.
    pub fn inverse(&self, coeffs: &Coefficients2D) -> Result<Vec<Complex64>> {
        let (m, n) = self.shape();
        if (coeffs.m, coeffs.n) != (m, n) || (coeffs.p1, coeffs.p2) != self.depths() {
            return Err(NdcwtError::ShapeMismatch {
                expected: (m, n),
                actual: (coeffs.m, coeffs.n),
            });
        }
        let (wm, wn) = (self.row_plan.matrix(), self.col_plan.matrix());
        let (rows, cols) = (wm.rows(), wn.rows());
        let b = &coeffs.data;
        match self.resolve() {
            Backend::Dense => {
                let tm = wm.weight_diagonal();
                let tn = wn.weight_diagonal();
                let weighted: Vec<Complex64> = b
                    .iter()
                    .enumerate()
                    .map(|(i, z)| z * (tm[i / cols] * tn[i % cols]))
                    .collect();
                let x = gemm_hn(wm.dense(), rows, m, &weighted, cols);
                Ok(gemm_nn(&x, m, cols, wn.dense(), n))
            }
            _ => {
                let mut y = vec![ZERO; rows * n];
                par::for_each_chunk_mut(&mut y, n, |r, out| {
                    wn.synthesize_fft(&b[r * cols..(r + 1) * cols], Op::Transpose, out);
                });
                let yt = transpose(&y, rows, n);
                let mut xt = vec![ZERO; n * m];
                par::for_each_chunk_mut(&mut xt, m, |c, out| {
                    wm.synthesize_fft(&yt[c * rows..(c + 1) * rows], Op::Adjoint, out);
                });
                Ok(transpose(&xt, n, m))
            }
        }
    }

    /// `(j, row block, col block)` for every diagonal-type pair `(j, j + s)`,
    /// finest first.
    fn diagonal_pairs(&self, s: i32) -> Result<Vec<(i32, usize, usize)>> {
        let (p1, p2) = self.depths();
        let pairs: Vec<_> = (self.max_level - p1 as i32..self.max_level)
            .rev()
            .filter_map(|j| {
                let a = axis_index(AxisBlock::Detail(j), p1, self.max_level)?;
                let b = axis_index(AxisBlock::Detail(j + s), p2, self.max_level)?;
                Some((j, a, b))
            })
            .collect();
        if pairs.is_empty() {
            return Err(NdcwtError::ShiftOutOfRange { shift: s });
        }
        Ok(pairs)
    }

    /// Only the `(j, j + s)` detail blocks of `B`, without forming the rest.
    pub fn forward_diagonal(&self, a: &[f64], shape: (usize, usize), s: i32) -> Result<DiagonalBlocks> {
        self.check_input(a, shape)?;
        let pairs = self.diagonal_pairs(s)?;
        let (m, n) = self.shape();
        let backend = self.resolve();
        let az: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let r = self.row_pass(&az, backend);
        let wn = self.col_plan.matrix();
        let real = self.real_taps();
        let norm = frobenius(a);
        let blocks = pairs
            .into_iter()
            .map(|(j, ra, cb)| {
                let rows = &r[ra * m * n..(ra + 1) * m * n];
                let mut block = match backend {
                    Backend::Dense => gemm_nh(rows, m, n, &wn.dense()[cb * n * n..(cb + 1) * n * n], n),
                    _ => {
                        let mut out = vec![ZERO; m * n];
                        par::for_each_chunk_mut(&mut out, n, |i, o| {
                            wn.analyze_block_fft(&rows[i * n..(i + 1) * n], cb, Op::Conj, o);
                        });
                        out
                    }
                };
                if real {
                    block.iter_mut().for_each(|z| z.im = 0.0);
                }
                snap_roundoff(&mut block, norm);
                (j, block)
            })
            .collect();
        Ok(DiagonalBlocks { shift: s, m, n, blocks })
    }

    /// Wraps a row-major `B` produced elsewhere, for example read from disk.
    pub fn coefficients_from(&self, data: Vec<Complex64>) -> Result<Coefficients2D> {
        let (rows, cols) = self.output_shape();
        if data.len() != rows * cols {
            return Err(NdcwtError::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(self.wrap(data))
    }

    fn wrap(&self, data: Vec<Complex64>) -> Coefficients2D {
        let (m, n) = self.shape();
        let (p1, p2) = self.depths();
        let mut index = BTreeMap::new();
        for a in 0..=p1 {
            for b in 0..=p2 {
                let key = BlockKey {
                    row: axis_block(a, p1, self.max_level),
                    col: axis_block(b, p2, self.max_level),
                };
                index.insert(
                    key,
                    BlockRegion {
                        row0: a * m,
                        col0: b * n,
                        rows: m,
                        cols: n,
                    },
                );
            }
        }
        Coefficients2D {
            m,
            n,
            p1,
            p2,
            row_filter: self.row_plan.filter.name.clone(),
            col_filter: self.col_plan.filter.name.clone(),
            max_level: self.max_level,
            data,
            index,
        }
    }
}

/// The `(j, j + s)` detail blocks of a 2-D transform, finest first.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalBlocks {
    pub shift: i32,
    pub m: usize,
    pub n: usize,
    pub blocks: Vec<(i32, Vec<Complex64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients2D {
    pub m: usize,
    pub n: usize,
    pub p1: usize,
    pub p2: usize,
    pub row_filter: String,
    pub col_filter: String,
    /// Common `J = ceil(log2 min(m, n))`.
    pub max_level: i32,
    /// Row-major `B`.
    pub data: Vec<Complex64>,
    pub index: BTreeMap<BlockKey, BlockRegion>,
}

impl Coefficients2D {
    pub fn rows(&self) -> usize {
        (self.p1 + 1) * self.m
    }

    pub fn cols(&self) -> usize {
        (self.p2 + 1) * self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols() + c]
    }

    /// Copy of one block, row-major.
    pub fn block(&self, key: BlockKey) -> Option<Vec<Complex64>> {
        let reg = self.index.get(&key)?;
        let cols = self.cols();
        let mut out = Vec::with_capacity(reg.rows * reg.cols);
        for r in reg.row0..reg.row0 + reg.rows {
            out.extend_from_slice(&self.data[r * cols + reg.col0..r * cols + reg.col0 + reg.cols]);
        }
        Some(out)
    }

    /// The `d_(j, j+s)` blocks, finest first.
    pub fn diagonal_blocks(&self, s: i32) -> Result<DiagonalBlocks> {
        let blocks: Vec<_> = (self.max_level - self.p1 as i32..self.max_level)
            .rev()
            .filter_map(|j| {
                let key = BlockKey {
                    row: AxisBlock::Detail(j),
                    col: AxisBlock::Detail(j + s),
                };
                self.block(key).map(|b| (j, b))
            })
            .collect();
        if blocks.is_empty() {
            return Err(NdcwtError::ShiftOutOfRange { shift: s });
        }
        Ok(DiagonalBlocks {
            shift: s,
            m: self.m,
            n: self.n,
            blocks,
        })
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.data.iter_mut().for_each(|v| *v = ZERO);
        z
    }
}
