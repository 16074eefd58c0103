//! Per-level phase averages of complex wavelet coefficients.
//!
//! The phase of a coefficient is its four-quadrant angle on `(-pi, pi]`.
//! A level's descriptor is the plain arithmetic mean of those angles over
//! all of its coefficients. Exact zeros get phase 0 and are counted
//! separately, so the divisor is always the full level size.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ndcwt1d::Coefficients1D;
use crate::ndcwt2d::{Coefficients2D, DiagonalBlocks};
use crate::spectra::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseAverage {
    /// Arithmetic mean of principal-branch angles.
    #[default]
    Arithmetic,
    /// Angle of the mean unit phasor. Experimental; not used by features.
    Circular,
}

/// Four-quadrant angle of `z` on `(-pi, pi]`, and whether `z == 0`.
pub fn coefficient_phase(z: Complex64) -> (f64, bool) {
    if z.re == 0.0 && z.im == 0.0 {
        return (0.0, true);
    }
    let a = z.im.atan2(z.re);
    // atan2(-0.0, x < 0) is -pi; fold it onto the closed end of the branch
    (if a == -PI { PI } else { a }, false)
}

/// Per-coefficient phases of one level, in storage order.
pub fn level_phases(values: &[Complex64]) -> Vec<f64> {
    values.iter().map(|&z| coefficient_phase(z).0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPhase {
    pub level: i32,
    pub mean: f64,
    pub count: usize,
    pub zero_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub mode: Mode,
    pub average: PhaseAverage,
    /// Ascending in level (coarsest first).
    pub per_level: Vec<LevelPhase>,
}

impl PhaseSummary {
    pub fn means(&self) -> Vec<f64> {
        self.per_level.iter().map(|l| l.mean).collect()
    }

    pub fn zero_total(&self) -> usize {
        self.per_level.iter().map(|l| l.zero_count).sum()
    }
}

fn summarize(level: i32, values: &[Complex64], average: PhaseAverage) -> LevelPhase {
    let mut zero_count = 0;
    let mean = match average {
        PhaseAverage::Arithmetic => {
            let mut sum = 0.0;
            for &z in values {
                let (a, zero) = coefficient_phase(z);
                zero_count += usize::from(zero);
                sum += a;
            }
            sum / values.len() as f64
        }
        PhaseAverage::Circular => {
            let mut acc = Complex64::new(0.0, 0.0);
            for &z in values {
                let (a, zero) = coefficient_phase(z);
                zero_count += usize::from(zero);
                acc += Complex64::from_polar(1.0, a);
            }
            coefficient_phase(acc).0
        }
    };
    LevelPhase {
        level,
        mean,
        count: values.len(),
        zero_count,
    }
}

pub fn phase_averages_1d(coeffs: &Coefficients1D) -> PhaseSummary {
    phase_averages_1d_with(coeffs, PhaseAverage::Arithmetic)
}

pub fn phase_averages_1d_with(coeffs: &Coefficients1D, average: PhaseAverage) -> PhaseSummary {
    PhaseSummary {
        mode: Mode::OneD,
        average,
        per_level: coeffs.levels().map(|(j, d)| summarize(j, d, average)).collect(),
    }
}

pub fn phase_averages_diagonal(blocks: &DiagonalBlocks, average: PhaseAverage) -> PhaseSummary {
    let mut per_level: Vec<LevelPhase> = blocks.blocks.iter().map(|(j, d)| summarize(*j, d, average)).collect();
    per_level.sort_by_key(|l| l.level);
    PhaseSummary {
        mode: Mode::TwoD { shift: blocks.shift },
        average,
        per_level,
    }
}

pub fn phase_averages_2d(coeffs: &Coefficients2D, s: i32) -> Result<PhaseSummary> {
    Ok(phase_averages_diagonal(
        &coeffs.diagonal_blocks(s)?,
        PhaseAverage::Arithmetic,
    ))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn branch_conventions() {
        assert!((coefficient_phase(c(1.0, 1.0)).0 - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(coefficient_phase(c(-1.0, 0.0)), (PI, false));
        assert_eq!(coefficient_phase(c(-1.0, -0.0)), (PI, false));
        assert_eq!(coefficient_phase(c(0.0, 0.0)), (0.0, true));
        let z = c(0.3, -2.0);
        assert_eq!(coefficient_phase(z.conj()).0, -coefficient_phase(z).0);
        assert_eq!(coefficient_phase(z * 3.5).0, coefficient_phase(z).0);
    }

    #[test]
    fn opposite_phases_average_to_zero() {
        let lp = summarize(3, &[c(1.0, 1.0), c(1.0, -1.0)], PhaseAverage::Arithmetic);
        assert_eq!(lp.mean, 0.0);
        assert_eq!(lp.count, 2);
    }

    #[test]
    fn zeros_count_in_the_divisor() {
        let lp = summarize(0, &[c(0.0, 2.0), c(0.0, 0.0)], PhaseAverage::Arithmetic);
        assert_eq!(lp.zero_count, 1);
        assert!((lp.mean - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn circular_mean_wraps() {
        let vals = [
            Complex64::from_polar(1.0, PI - 0.1),
            Complex64::from_polar(1.0, -PI + 0.1),
        ];
        let arith = summarize(0, &vals, PhaseAverage::Arithmetic);
        let circ = summarize(0, &vals, PhaseAverage::Circular);
        assert!(arith.mean.abs() < 1e-12);
        assert!((circ.mean.abs() - PI).abs() < 1e-12);
    }
}
