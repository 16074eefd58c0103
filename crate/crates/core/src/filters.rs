//! Complex scaling/wavelet filter pairs.
//!
//! Taps are normalised so that the low-pass filter sums to `sqrt(2)`. The
//! high-pass filter is tied to the low-pass one by
//! `g[k] = (-1)^k * conj(h[1 - k])`, with `k` the absolute tap index. Each
//! pair stores the absolute index of its first low-pass tap
//! (`support_offset`); the high-pass support follows from it.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{NdcwtError, Result};

/// Tolerances for the pair invariants.
pub const QMF_TOL: f64 = 1e-12;
pub const SUM_TOL: f64 = 1e-10;
pub const ORTHO_TOL: f64 = 1e-10;

/// Names accepted by [`get_filter`].
pub const REGISTERED: [&str; 2] = ["haar", "cdaub6"];

// Symmetric 6-tap complex Daubechies low-pass filter (Lina-Mayrand family):
// h = (1 / (32 sqrt 2)) * [-3 - i sqrt15, 5 - i sqrt15, 30 + 2i sqrt15, ...mirrored].
#[allow(clippy::excessive_precision)]
const CDAUB6_OUTER: (f64, f64) = (-0.066_291_260_736_238_83, -0.085_581_649_610_182_21);
#[allow(clippy::excessive_precision)]
const CDAUB6_INNER: (f64, f64) = (0.110_485_434_560_398_05, -0.085_581_649_610_182_21);
const CDAUB6_CENTER: (f64, f64) = (0.662_912_607_362_388_3, 0.171_163_299_220_364_4);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFilterPair {
    pub name: String,
    /// Low-pass taps, `h[i]` sits at absolute index `support_offset + i`.
    pub h: Vec<Complex64>,
    /// High-pass taps, `g[i]` sits at absolute index `highpass_offset() + i`.
    pub g: Vec<Complex64>,
    pub support_offset: isize,
}

impl ComplexFilterPair {
    /// Builds a pair from low-pass taps alone and validates it.
    pub fn from_lowpass(name: &str, h: Vec<Complex64>, support_offset: isize) -> Result<Self> {
        if h.is_empty() {
            return Err(NdcwtError::InvalidFilter {
                name: name.to_string(),
                invariant: "non-empty taps",
                detail: "no taps given".into(),
            });
        }
        let g = derive_highpass(&h);
        let pair = Self {
            name: name.to_string(),
            h,
            g,
            support_offset,
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Absolute index of the first high-pass tap.
    pub fn highpass_offset(&self) -> isize {
        highpass_offset(self.h.len(), self.support_offset)
    }

    /// Low-pass tap at absolute index `k` (zero outside the support).
    pub fn h_at(&self, k: isize) -> Complex64 {
        tap_at(&self.h, self.support_offset, k)
    }

    /// High-pass tap at absolute index `k` (zero outside the support).
    pub fn g_at(&self, k: isize) -> Complex64 {
        tap_at(&self.g, self.highpass_offset(), k)
    }

    /// True when every tap is real.
    pub fn is_real(&self) -> bool {
        self.h.iter().chain(&self.g).all(|z| z.im == 0.0)
    }

    /// `h[k] == h[N-1-k]` within [`QMF_TOL`].
    pub fn is_symmetric(&self) -> bool {
        let n = self.h.len();
        (0..n).all(|i| (self.h[i] - self.h[n - 1 - i]).norm() <= QMF_TOL)
    }

    /// Number of leading high-pass moments `sum_k k^q g[k]` that vanish
    /// (relative to the tap scale).
    pub fn vanishing_moments(&self) -> usize {
        let off = self.highpass_offset();
        let mut q = 0;
        loop {
            let moment: Complex64 = self
                .g
                .iter()
                .enumerate()
                .map(|(i, &t)| t * ((off + i as isize) as f64).powi(q as i32))
                .sum();
            let scale: f64 = self
                .g
                .iter()
                .enumerate()
                .map(|(i, t)| t.norm() * ((off + i as isize) as f64).abs().powi(q as i32))
                .sum();
            if moment.norm() > 1e-9 * scale.max(1.0) || q >= self.g.len() {
                return q;
            }
            q += 1;
        }
    }

    /// Checks the five pair invariants, reporting the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let fail = |invariant: &'static str, detail: String| NdcwtError::InvalidFilter {
            name: self.name.clone(),
            invariant,
            detail,
        };
        if self.h.len() != self.g.len() {
            return Err(fail("len(h) = len(g)", format!("{} vs {}", self.h.len(), self.g.len())));
        }
        let goff = self.highpass_offset();
        for (i, &gk) in self.g.iter().enumerate() {
            let k = goff + i as isize;
            let expected = sign(k) * self.h_at(1 - k).conj();
            if (gk - expected).norm() > QMF_TOL {
                return Err(fail(
                    "g[k] = (-1)^k conj(h[1-k])",
                    format!("k = {k}: {gk} vs {expected}"),
                ));
            }
        }
        let sum_h: Complex64 = self.h.iter().sum();
        if (sum_h - Complex64::new(2f64.sqrt(), 0.0)).norm() > SUM_TOL {
            return Err(fail("sum(h) = sqrt(2)", format!("sum = {sum_h}")));
        }
        let n = self.h.len();
        for shift in 0..n.div_ceil(2) {
            let acc: Complex64 = (0..n.saturating_sub(2 * shift))
                .map(|i| self.h[i] * self.h[i + 2 * shift].conj())
                .sum();
            let target = if shift == 0 { 1.0 } else { 0.0 };
            if (acc - target).norm() > ORTHO_TOL {
                return Err(fail("double-shift orthonormality", format!("shift 2*{shift}: {acc}")));
            }
        }
        let sum_g: Complex64 = self.g.iter().sum();
        if sum_g.norm() > SUM_TOL {
            return Err(fail("sum(g) = 0", format!("sum = {sum_g}")));
        }
        Ok(())
    }
}

fn sign(k: isize) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn tap_at(taps: &[Complex64], offset: isize, k: isize) -> Complex64 {
    let i = k - offset;
    if i < 0 || i as usize >= taps.len() {
        Complex64::new(0.0, 0.0)
    } else {
        taps[i as usize]
    }
}

/// Absolute index of the first high-pass tap for an `len`-tap low-pass
/// filter starting at `support_offset`.
pub fn highpass_offset(len: usize, support_offset: isize) -> isize {
    2 - support_offset - len as isize
}

/// High-pass taps for low-pass taps `h` that start at absolute index 0.
///
/// The result starts at absolute index `2 - len(h)`, so its `i`-th entry is
/// `(-1)^(2 - N + i) * conj(h[N - 1 - i])`.
pub fn derive_highpass(h: &[Complex64]) -> Vec<Complex64> {
    let n = h.len() as isize;
    let off = highpass_offset(h.len(), 0);
    (0..n)
        .map(|i| {
            let k = off + i;
            sign(k) * h[(1 - k) as usize].conj()
        })
        .collect()
}

/// Inserts `2^level - 1` zeros between consecutive taps.
pub fn dilate_filter(f: &[Complex64], level: u32) -> Vec<Complex64> {
    if f.is_empty() {
        return Vec::new();
    }
    let step = 1usize << level;
    let mut out = vec![Complex64::new(0.0, 0.0); (f.len() - 1) * step + 1];
    for (i, &t) in f.iter().enumerate() {
        out[i * step] = t;
    }
    out
}

/// Looks up a registered filter pair by name.
pub fn get_filter(name: &str) -> Result<ComplexFilterPair> {
    let c = |(re, im): (f64, f64)| Complex64::new(re, im);
    let h = match name.to_ascii_lowercase().as_str() {
        "haar" => vec![c((FRAC_1_SQRT_2, 0.0)), c((FRAC_1_SQRT_2, 0.0))],
        "cdaub6" => vec![
            c(CDAUB6_OUTER),
            c(CDAUB6_INNER),
            c(CDAUB6_CENTER),
            c(CDAUB6_CENTER),
            c(CDAUB6_INNER),
            c(CDAUB6_OUTER),
        ],
        _ => {
            return Err(NdcwtError::UnknownFilter {
                name: name.to_string(),
                available: REGISTERED.join(", "),
            })
        }
    };
    ComplexFilterPair::from_lowpass(&name.to_ascii_lowercase(), h, 0)
}

/// Parses low-pass taps from text: one `re im` pair per line. Blank lines and
/// lines starting with `#` are ignored. The result is validated.
pub fn parse_custom_filter(name: &str, text: &str) -> Result<ComplexFilterPair> {
    let mut taps = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| NdcwtError::Parse {
                line: lineno + 1,
                msg: format!("`{s}`: {e}"),
            })
        };
        match parts.as_slice() {
            [re] => taps.push(Complex64::new(parse(re)?, 0.0)),
            [re, im] => taps.push(Complex64::new(parse(re)?, parse(im)?)),
            _ => {
                return Err(NdcwtError::Parse {
                    line: lineno + 1,
                    msg: "expected `re im`".into(),
                })
            }
        }
    }
    ComplexFilterPair::from_lowpass(name, taps, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn haar_taps() {
        let f = get_filter("haar").unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(f.h, vec![c(r, 0.0), c(r, 0.0)]);
        assert_eq!(f.g, vec![c(r, 0.0), c(-r, 0.0)]);
        assert!(f.is_real());
        assert_eq!(f.highpass_offset(), 0);
    }

    #[test]
    fn cdaub6_is_complex_symmetric_with_three_vanishing_moments() {
        let f = get_filter("cdaub6").unwrap();
        assert_eq!(f.len(), 6);
        assert!(f.h.iter().all(|z| z.im != 0.0));
        assert!(f.is_symmetric());
        assert_eq!(f.vanishing_moments(), 3);
        // closed form of the centre tap
        let centre = c(30.0, 2.0 * 15f64.sqrt()) / (32.0 * 2f64.sqrt());
        assert!((f.h[2] - centre).norm() < 1e-15);
    }

    #[test]
    fn unknown_filter_lists_available() {
        let err = get_filter("bogus").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("haar") && msg.contains("cdaub6"), "{msg}");
    }

    #[test]
    fn highpass_of_two_imaginary_taps() {
        // k = 0: conj(h1) = -ib ; k = 1: -conj(h0) = ia
        let (a, b) = (0.3, 0.7);
        let g = derive_highpass(&[c(0.0, a), c(0.0, b)]);
        assert_eq!(g, vec![c(0.0, -b), c(0.0, a)]);
    }

    #[test]
    fn derive_highpass_matches_registry() {
        for name in REGISTERED {
            let f = get_filter(name).unwrap();
            let g = derive_highpass(&f.h);
            for (a, b) in g.iter().zip(&f.g) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn highpass_twice_recovers_lowpass_up_to_sign() {
        let f = get_filter("cdaub6").unwrap();
        let back = derive_highpass(&f.g);
        let s = back[0] / f.h[0];
        assert!((s.norm() - 1.0).abs() < 1e-12);
        for (x, y) in back.iter().zip(&f.h) {
            assert!((x - s * y).norm() < 1e-12);
        }
    }

    #[test]
    fn dilation_examples() {
        let (a, b, cc) = (c(1.0, 0.0), c(2.0, 1.0), c(-1.0, 3.0));
        let z = c(0.0, 0.0);
        assert_eq!(dilate_filter(&[a, b], 0), vec![a, b]);
        assert_eq!(dilate_filter(&[a, b], 1), vec![a, z, b]);
        assert_eq!(dilate_filter(&[a, b, cc], 2), vec![a, z, z, z, b, z, z, z, cc]);
    }

    #[test]
    fn broken_filter_is_rejected() {
        let err = parse_custom_filter("bad", "0.7 0\n0.8 0\n").unwrap_err();
        assert!(matches!(err, NdcwtError::InvalidFilter { .. }));
    }

    #[test]
    fn custom_filter_roundtrips_haar() {
        let text = "# haar\n0.7071067811865476 0\n0.7071067811865476 0.0\n";
        let f = parse_custom_filter("mine", text).unwrap();
        assert_eq!(f.g.len(), 2);
        let err = parse_custom_filter("x", "1 2 3").unwrap_err();
        assert!(matches!(err, NdcwtError::Parse { line: 1, .. }));
    }
}
