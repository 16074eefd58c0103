//! Non-decimated complex wavelet transforms in matrix form.
//!
//! The crate builds the redundant transform matrix `W` and its diagonal
//! weight `T` for arbitrary signal lengths and image shapes, and layers the
//! analysis tools on top of it:
//!
//! * [`filters`]: complex Daubechies and Haar filter pairs with QMF checks.
//! * [`ndcwt1d`] / [`ndcwt2d`]: forward and perfect-reconstruction inverse
//!   transforms, the 2-D one in scale-mixing form `B = W_m A W_n^H`.
//! * [`spectra`]: log-scale diagrams of mean squared modulus and Hurst
//!   exponent estimates from their regression slope.
//! * [`phase`]: per-level phase averages.
//! * [`selfsim`]: exact 1-D and 2-D fractional Brownian motion simulators.
//! * [`features`]: feature vectors, nested-ANOVA subject adjustment and a
//!   nearest-centroid classifier.
//!
//! With the default `parallel` feature the hot loops run on rayon; building
//! with `--no-default-features` gives an identical sequential code path.

pub mod error;
pub mod features;
pub mod filters;
mod linalg;
pub mod ndcwt1d;
pub mod ndcwt2d;
pub mod oracle;
pub mod par;
pub mod phase;
pub mod selfsim;
pub mod spectra;
pub mod verify;

pub use error::{NdcwtError, Result};
pub use filters::ComplexFilterPair;
pub use ndcwt1d::{Backend, Coefficients1D, TransformPlan1D, WaveletMatrix};
pub use ndcwt2d::{AxisBlock, BlockKey, Coefficients2D, TransformPlan2D};
pub use num_complex::Complex64;
