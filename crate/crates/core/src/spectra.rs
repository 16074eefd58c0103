//! Second-order log-scale diagrams and Hurst exponent estimates.
//!
//! For each detail level `j` the diagram holds
//! `S(j) = log2(mean_k |d_{j,k}|^2)` over all coefficients of the level.
//! A regression line through `(j, S(j))` gives the spectral slope. The Hurst
//! estimate is `-(slope + 1) / 2` for signals and `-(slope + 2) / 2` for the
//! diagonal hierarchy `(j, j + s)` of images.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NdcwtError, Result};
use crate::ndcwt1d::Coefficients1D;
use crate::ndcwt2d::{Coefficients2D, DiagonalBlocks};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OneD,
    TwoD { shift: i32 },
}

impl Mode {
    pub fn hurst_from_slope(self, slope: f64) -> f64 {
        match self {
            Mode::OneD => -(slope + 1.0) / 2.0,
            Mode::TwoD { .. } => -(slope + 2.0) / 2.0,
        }
    }

    pub fn slope_from_hurst(self, hurst: f64) -> f64 {
        match self {
            Mode::OneD => -(2.0 * hurst + 1.0),
            Mode::TwoD { .. } => -(2.0 * hurst + 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    #[default]
    Ols,
    /// Least squares weighted by each level's effective coefficient count.
    Wls,
    /// Theil-Sen: median of pairwise slopes.
    Robust,
}

impl std::str::FromStr for FitMethod {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ols" => Ok(Self::Ols),
            "wls" | "weighted" => Ok(Self::Wls),
            "robust" | "theil-sen" => Ok(Self::Robust),
            other => Err(format!("unknown fit method `{other}` (ols|wls|robust)")),
        }
    }
}

/// Preprocessing applied to a signal before it is transformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detrend {
    #[default]
    None,
    /// Subtract the line through the first and last samples so the periodic
    /// extension has no jump at the wrap.
    Endpoints,
}

impl std::str::FromStr for Detrend {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Self::None),
            "endpoints" => Ok(Self::Endpoints),
            other => Err(format!("unknown detrend `{other}` (none|endpoints)")),
        }
    }
}

impl Detrend {
    pub fn apply(self, y: &[f64]) -> Vec<f64> {
        match self {
            Detrend::None => y.to_vec(),
            Detrend::Endpoints => {
                let m = y.len();
                if m < 2 {
                    return y.to_vec();
                }
                let rise = (y[m - 1] - y[0]) / (m - 1) as f64;
                y.iter().enumerate().map(|(k, v)| v - rise * k as f64).collect()
            }
        }
    }
}

/// Inclusive range of levels `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRange {
    pub lo: i32,
    pub hi: i32,
}

impl LevelRange {
    pub fn contains(&self, j: i32) -> bool {
        (self.lo..=self.hi).contains(&j)
    }
}

impl std::str::FromStr for LevelRange {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `lo:hi`, got `{s}`"))?;
        let lo = a.trim().parse().map_err(|e| format!("bad level `{a}`: {e}"))?;
        let hi = b.trim().parse().map_err(|e| format!("bad level `{b}`: {e}"))?;
        if lo > hi {
            return Err(format!("empty level range {lo}:{hi}"));
        }
        Ok(Self { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPoint {
    pub level: i32,
    /// `-inf` for an all-zero level.
    pub log2_energy: f64,
    pub count: usize,
    /// `count` divided by the dilation of the level's atoms; used as the
    /// regression weight by [`FitMethod::Wls`].
    pub effective_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogscaleDiagram {
    pub mode: Mode,
    /// Moment order; always 2.
    pub q: u32,
    /// Ascending in level.
    pub points: Vec<LevelPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFit {
    pub slope: f64,
    pub intercept: f64,
    pub hurst: f64,
    pub level_range: LevelRange,
    pub method: FitMethod,
    /// `(level, observed - fitted)` for each level used.
    pub residuals: Vec<(i32, f64)>,
    /// Levels in range left out because their energy is zero.
    pub excluded: Vec<i32>,
}

/// `log2(mean |z|^2)`.
pub fn log2_mean_energy(values: &[Complex64]) -> f64 {
    let sum: f64 = values.iter().map(|z| z.norm_sqr()).sum();
    (sum / values.len() as f64).log2()
}

pub fn logscale_1d(coeffs: &Coefficients1D) -> LogscaleDiagram {
    let finest = coeffs.max_level - 1;
    let points = coeffs
        .levels()
        .map(|(j, d)| LevelPoint {
            level: j,
            log2_energy: log2_mean_energy(d),
            count: d.len(),
            effective_count: d.len() as f64 / 2f64.powi(finest - j),
        })
        .collect();
    LogscaleDiagram {
        mode: Mode::OneD,
        q: 2,
        points,
    }
}

pub fn logscale_diagonal(blocks: &DiagonalBlocks) -> LogscaleDiagram {
    // blocks come finest first; J - 1 is the finest label on both axes
    let finest = blocks.blocks.iter().map(|b| b.0).max().unwrap_or(0) + blocks.shift.max(0);
    let mut points: Vec<LevelPoint> = blocks
        .blocks
        .iter()
        .map(|(j, d)| {
            let dilation = 2f64.powi(finest - j) * 2f64.powi(finest - (j + blocks.shift));
            LevelPoint {
                level: *j,
                log2_energy: log2_mean_energy(d),
                count: d.len(),
                effective_count: d.len() as f64 / dilation,
            }
        })
        .collect();
    points.sort_by_key(|p| p.level);
    LogscaleDiagram {
        mode: Mode::TwoD { shift: blocks.shift },
        q: 2,
        points,
    }
}

pub fn logscale_2d(coeffs: &Coefficients2D, s: i32) -> Result<LogscaleDiagram> {
    let blocks = coeffs.diagonal_blocks(s)?;
    let mut d = logscale_diagonal(&blocks);
    // effective counts relative to the common finest level J - 1
    let finest = coeffs.max_level - 1;
    for p in &mut d.points {
        let dilation = 2f64.powi(finest - p.level) * 2f64.powi(finest - (p.level + s));
        p.effective_count = p.count as f64 / dilation;
    }
    Ok(d)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Weighted least-squares line `y = a + b x`.
fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - mx) * (xi - mx);
        sxy += wi * (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

fn theil_sen(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mut slopes = Vec::with_capacity(x.len() * (x.len() - 1) / 2);
    for i in 0..x.len() {
        for k in i + 1..x.len() {
            slopes.push((y[k] - y[i]) / (x[k] - x[i]));
        }
    }
    let slope = median(&mut slopes);
    let mut offsets: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - slope * a).collect();
    (median(&mut offsets), slope)
}

/// Fits a line through the diagram's points in `range` (all levels when
/// `None`). Zero-energy levels are skipped with a warning.
pub fn fit_spectrum(diagram: &LogscaleDiagram, range: Option<LevelRange>, method: FitMethod) -> Result<SpectrumFit> {
    let range = range.unwrap_or_else(|| LevelRange {
        lo: diagram.points.first().map_or(0, |p| p.level),
        hi: diagram.points.last().map_or(0, |p| p.level),
    });
    let mut excluded = Vec::new();
    let mut used = Vec::new();
    for p in diagram.points.iter().filter(|p| range.contains(p.level)) {
        if p.log2_energy.is_finite() {
            used.push(*p);
        } else {
            warn!("level {} has zero energy and is left out of the fit", p.level);
            excluded.push(p.level);
        }
    }
    if used.len() < 2 {
        return Err(NdcwtError::InsufficientLevels { found: used.len() });
    }
    let x: Vec<f64> = used.iter().map(|p| p.level as f64).collect();
    let y: Vec<f64> = used.iter().map(|p| p.log2_energy).collect();
    let (intercept, slope) = match method {
        FitMethod::Ols => weighted_line(&x, &y, &vec![1.0; x.len()]),
        FitMethod::Wls => {
            let w: Vec<f64> = used.iter().map(|p| p.effective_count).collect();
            weighted_line(&x, &y, &w)
        }
        FitMethod::Robust => theil_sen(&x, &y),
    };
    let residuals = used
        .iter()
        .map(|p| (p.level, p.log2_energy - (intercept + slope * p.level as f64)))
        .collect();
    Ok(SpectrumFit {
        slope,
        intercept,
        hurst: diagram.mode.hurst_from_slope(slope),
        level_range: range,
        method,
        residuals,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagram(mode: Mode, pts: &[(i32, f64)]) -> LogscaleDiagram {
        LogscaleDiagram {
            mode,
            q: 2,
            points: pts
                .iter()
                .map(|&(level, e)| LevelPoint {
                    level,
                    log2_energy: e,
                    count: 8,
                    effective_count: 8.0 / 2f64.powi(3 - level),
                })
                .collect(),
        }
    }

    #[test]
    fn constant_modulus_two_gives_two() {
        let v = vec![Complex64::from_polar(2.0, 0.7); 17];
        assert!((log2_mean_energy(&v) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_lines() {
        let d = diagram(Mode::OneD, &[(1, -3.0), (2, -5.0), (3, -7.0)]);
        for method in [FitMethod::Ols, FitMethod::Wls, FitMethod::Robust] {
            let f = fit_spectrum(&d, None, method).unwrap();
            assert!((f.slope + 2.0).abs() < 1e-12);
            assert!((f.hurst - 0.5).abs() < 1e-12);
            assert!((f.intercept + 1.0).abs() < 1e-12);
            assert!(f.residuals.iter().all(|r| r.1.abs() < 1e-12));
        }
        let d = diagram(Mode::TwoD { shift: 0 }, &[(1, -4.0), (2, -7.0), (3, -10.0)]);
        let f = fit_spectrum(&d, None, FitMethod::Ols).unwrap();
        assert!((f.slope + 3.0).abs() < 1e-12);
        assert!((f.hurst - 0.5).abs() < 1e-12);
    }

    #[test]
    fn range_and_zero_levels() {
        let d = diagram(
            Mode::OneD,
            &[(0, f64::NEG_INFINITY), (1, -3.0), (2, -5.0), (3, -7.0), (4, 9.0)],
        );
        let f = fit_spectrum(&d, Some(LevelRange { lo: 0, hi: 3 }), FitMethod::Ols).unwrap();
        assert_eq!(f.excluded, vec![0]);
        assert!((f.slope + 2.0).abs() < 1e-12);
        let err = fit_spectrum(&d, Some(LevelRange { lo: 0, hi: 1 }), FitMethod::Ols).unwrap_err();
        assert!(matches!(err, NdcwtError::InsufficientLevels { found: 1 }));
    }

    #[test]
    fn robust_resists_an_outlier() {
        let d = diagram(Mode::OneD, &[(1, -3.0), (2, -5.0), (3, -7.0), (4, -9.0), (5, 0.0)]);
        let robust = fit_spectrum(&d, None, FitMethod::Robust).unwrap();
        let ols = fit_spectrum(&d, None, FitMethod::Ols).unwrap();
        assert!((robust.slope + 2.0).abs() < 1e-12);
        assert!((ols.slope + 2.0).abs() > 0.5);
    }

    #[test]
    fn parsing() {
        assert_eq!("2:9".parse::<LevelRange>().unwrap(), LevelRange { lo: 2, hi: 9 });
        assert!("9:2".parse::<LevelRange>().is_err());
        assert_eq!("wls".parse::<FitMethod>().unwrap(), FitMethod::Wls);
        assert_eq!("endpoints".parse::<Detrend>().unwrap(), Detrend::Endpoints);
    }

    #[test]
    fn endpoint_detrend_closes_the_wrap() {
        let y = [1.0, 4.0, 2.0, 7.0];
        let d = Detrend::Endpoints.apply(&y);
        assert_eq!(d[0], d[3]);
        assert_eq!(d[0], 1.0);
        assert_eq!(Detrend::None.apply(&y), y.to_vec());
    }
}
