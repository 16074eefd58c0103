//! Reference transforms evaluated directly in the time domain.
//!
//! These run the undecimated Mallat cascade with explicit circular index
//! arithmetic and share no code with the matrix plans. `verify` and the
//! test suites compare the plans against them.

use num_complex::Complex64;

use crate::filters::ComplexFilterPair;

/// One circular filtering step: `out[n] = sum_k f[k] x[(n - 2^step k) mod m]`
/// over absolute tap indices `k`.
fn atrous_step(x: &[Complex64], taps: &[Complex64], first_index: isize, step: u32) -> Vec<Complex64> {
    let m = x.len() as isize;
    let spread = 1isize << step;
    (0..m)
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &t) in taps.iter().enumerate() {
                let k = first_index + i as isize;
                let idx = (n - spread * k).rem_euclid(m);
                acc += t * x[idx as usize];
            }
            acc
        })
        .collect()
}

/// Undecimated cascade of depth `depth`, returned in the block order of `W`:
/// `[smooth, coarsest detail, ..., finest detail]`.
pub fn atrous_1d(y: &[Complex64], filter: &ComplexFilterPair, depth: usize) -> Vec<Vec<Complex64>> {
    let mut smooth = y.to_vec();
    let mut details = Vec::with_capacity(depth);
    for step in 0..depth as u32 {
        details.push(atrous_step(&smooth, &filter.g, filter.highpass_offset(), step));
        smooth = atrous_step(&smooth, &filter.h, filter.support_offset, step);
    }
    let mut out = vec![smooth];
    out.extend(details.into_iter().rev());
    out
}

/// `W_m A W_n^H` built from two passes of [`atrous_1d`]: columns first, then
/// rows. Row-major output of shape `(p1+1) m x (p2+1) n`.
pub fn sequential_2d(
    a: &[f64],
    m: usize,
    n: usize,
    row_filter: &ComplexFilterPair,
    p1: usize,
    col_filter: &ComplexFilterPair,
    p2: usize,
) -> Vec<Complex64> {
    let rows_out = (p1 + 1) * m;
    let cols_out = (p2 + 1) * n;
    // column pass: R = W_m A, shape rows_out x n
    let mut r = vec![Complex64::new(0.0, 0.0); rows_out * n];
    for c in 0..n {
        let col: Vec<Complex64> = (0..m).map(|i| Complex64::new(a[i * n + c], 0.0)).collect();
        for (b, block) in atrous_1d(&col, row_filter, p1).into_iter().enumerate() {
            for (i, v) in block.into_iter().enumerate() {
                r[(b * m + i) * n + c] = v;
            }
        }
    }
    // row pass: x W^H = conj(W conj(x))
    let mut out = Vec::with_capacity(rows_out * cols_out);
    for row in r.chunks(n) {
        let conj_row: Vec<Complex64> = row.iter().map(|z| z.conj()).collect();
        for block in atrous_1d(&conj_row, col_filter, p2) {
            out.extend(block.into_iter().map(|z| z.conj()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::get_filter;

    #[test]
    fn haar_one_step_by_hand() {
        let haar = get_filter("haar").unwrap();
        let y: Vec<Complex64> = [1.0, 2.0, 4.0, 8.0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let out = atrous_1d(&y, &haar, 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // smooth[n] = r (y[n] + y[n-1]); detail[n] = r (y[n] - y[n-1])
        let smooth = [9.0 * r, 3.0 * r, 6.0 * r, 12.0 * r];
        let detail = [-7.0 * r, r, 2.0 * r, 4.0 * r];
        for i in 0..4 {
            assert!((out[0][i].re - smooth[i]).abs() < 1e-14);
            assert!((out[1][i].re - detail[i]).abs() < 1e-14);
        }
    }
}
