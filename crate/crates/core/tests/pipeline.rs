//! End-to-end checks of simulate -> transform -> spectra -> features.

use ndcwt::features::{extract_features, FeatureInput, FeatureMeta, FeatureSettings};
use ndcwt::filters::get_filter;
use ndcwt::oracle::atrous_1d;
use ndcwt::selfsim::{simulate_fbm_1d_batch, FbmSpec};
use ndcwt::spectra::{fit_spectrum, logscale_1d, FitMethod};
use ndcwt::verify::random_signal;
use ndcwt::{Complex64, TransformPlan1D};

/// Expected OLS slope of `log2 E|d_j|^2` for discrete fBm without boundary
/// effects: `E|sum_l w_l B_l|^2 = -1/2 sum w_a conj(w_b) |a - b|^2H` for a
/// zero-sum detail response `w`, taken from the time-domain cascade.
fn discrete_fbm_slope(m: usize, depth: usize, hurst: f64) -> f64 {
    let f = get_filter("cdaub6").unwrap();
    let mut delta = vec![Complex64::new(0.0, 0.0); m];
    delta[0] = Complex64::new(1.0, 0.0);
    let blocks = atrous_1d(&delta, &f, depth);
    let points: Vec<(f64, f64)> = blocks[1..]
        .iter()
        .enumerate()
        .map(|(level, resp)| {
            let taps: Vec<(f64, Complex64)> = resp
                .iter()
                .enumerate()
                .filter(|(_, z)| z.norm() > 0.0)
                .map(|(i, z)| (if i > m / 2 { i as f64 - m as f64 } else { i as f64 }, *z))
                .collect();
            let mut energy = 0.0;
            for (a, za) in &taps {
                for (b, zb) in &taps {
                    energy -= 0.5 * (za * zb.conj()).re * (a - b).abs().powf(2.0 * hurst);
                }
            }
            (level as f64, energy.log2())
        })
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn shallow_fbm_features_match_discrete_oracle() {
    let f = get_filter("cdaub6").unwrap();
    let settings = FeatureSettings::default();
    for h in [0.3, 0.7] {
        let paths = simulate_fbm_1d_batch(&FbmSpec::line(h, 1024, 31), 50).unwrap();
        let mut mean = 0.0;
        for (i, y) in paths.iter().enumerate() {
            let v = extract_features(FeatureInput::Signal(y), &f, &settings, FeatureMeta::default()).unwrap();
            assert_eq!(v.phase_means.len(), 4);
            assert!(v.degenerate.is_none());
            if i == 0 {
                let again = extract_features(FeatureInput::Signal(y), &f, &settings, FeatureMeta::default()).unwrap();
                assert_eq!(v, again);
            }
            mean += v.slope / paths.len() as f64;
        }
        let expected = discrete_fbm_slope(1024, 4, h);
        assert!(
            (mean - expected).abs() < 0.1,
            "H={h}: mean slope {mean}, oracle {expected}"
        );
        // the asymptotic value -(2H + 1) is only reached over coarser levels
        assert!(mean > -(2.0 * h + 1.0));
    }
}

#[test]
fn white_noise_spectrum_is_flat() {
    let f = get_filter("cdaub6").unwrap();
    let plan = TransformPlan1D::new(4096, 8, &f).unwrap();
    let slopes: Vec<f64> = (0..20)
        .map(|seed| {
            let c = plan.forward_real(&random_signal(4096, seed)).unwrap();
            fit_spectrum(&logscale_1d(&c), None, FitMethod::Ols).unwrap().slope
        })
        .collect();
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    assert!(mean.abs() < 0.1, "white noise slope {mean}");
}
