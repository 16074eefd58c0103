use ndcwt::selfsim::{simulate_fbm_1d, simulate_fbm_1d_batch, simulate_fbm_2d_batch, FbmSpec};

fn increments(path: &[f64]) -> Vec<f64> {
    path.windows(2).map(|w| w[1] - w[0]).collect()
}

fn lag1_correlation(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let cov: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    cov / var
}

#[test]
fn brownian_increments_are_uncorrelated() {
    let m = 4096;
    let path = simulate_fbm_1d(&FbmSpec::line(0.5, m, 11)).unwrap();
    let r = lag1_correlation(&increments(&path));
    assert!(r.abs() < 3.0 / (m as f64).sqrt(), "lag-1 correlation {r}");
}

#[test]
fn persistent_increments_have_unit_variance_and_fgn_correlation() {
    let h: f64 = 0.7;
    let paths = simulate_fbm_1d_batch(&FbmSpec::line(h, 1025, 12), 100).unwrap();
    let mut var = 0.0;
    let mut corr = 0.0;
    for p in &paths {
        let inc = increments(p);
        var += inc.iter().map(|v| v * v).sum::<f64>() / inc.len() as f64;
        corr += inc.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (inc.len() - 1) as f64;
    }
    var /= paths.len() as f64;
    corr /= paths.len() as f64;
    assert!((var - 1.0).abs() < 0.05, "increment variance {var}");
    let expected = 2f64.powf(2.0 * h - 1.0) - 1.0;
    assert!((corr - expected).abs() < 0.05, "lag-1 covariance {corr} vs {expected}");
}

/// Mean of `(B(x + lag e) - B(x))^2` over both axes and all replicates.
fn variogram(fields: &[Vec<f64>], m: usize, n: usize, lag: usize) -> f64 {
    let mut sum = 0.0;
    let mut count = 0.0;
    for f in fields {
        for i in 0..m {
            for j in 0..n {
                if i + lag < m {
                    sum += (f[(i + lag) * n + j] - f[i * n + j]).powi(2);
                    count += 1.0;
                }
                if j + lag < n {
                    sum += (f[i * n + j + lag] - f[i * n + j]).powi(2);
                    count += 1.0;
                }
            }
        }
    }
    sum / count
}

#[test]
fn small_grid_unit_lag_variogram() {
    let fields = simulate_fbm_2d_batch(&FbmSpec::grid(0.5, 32, 32, 13), 50).unwrap();
    let g = variogram(&fields, 32, 32, 1);
    assert!((g - 1.0).abs() < 0.10, "variogram {g}");
}

#[test]
fn embedded_grid_variogram_scales_with_hurst() {
    for (h, seed) in [(0.3, 14), (0.8, 15)] {
        let (m, n) = (64, 48);
        let fields = simulate_fbm_2d_batch(&FbmSpec::grid(h, m, n, seed), 30).unwrap();
        for lag in [1usize, 4] {
            let g = variogram(&fields, m, n, lag);
            let expected = (lag as f64).powf(2.0 * h);
            assert!((g / expected - 1.0).abs() < 0.10, "H={h} lag={lag}: {g} vs {expected}");
        }
    }
}

#[test]
fn grid_variance_grows_with_distance_from_origin() {
    let h: f64 = 0.6;
    let (m, n) = (40, 40);
    let fields = simulate_fbm_2d_batch(&FbmSpec::grid(h, m, n, 16), 200).unwrap();
    for (i, j) in [(0, 10), (20, 20), (39, 5)] {
        let var = fields.iter().map(|f| f[i * n + j].powi(2)).sum::<f64>() / fields.len() as f64;
        let expected = ((i * i + j * j) as f64).sqrt().powf(2.0 * h);
        assert!((var / expected - 1.0).abs() < 0.25, "({i},{j}): {var} vs {expected}");
    }
}
