//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when
//! any criterion fails.

use std::time::Instant;

use ndcwt::features::{
    extract_batch_1d, repeated_split_accuracy, subject_adjust, FeatureMask, FeatureMeta, FeatureSettings, NestedDesign,
    Observation,
};
use ndcwt::filters::get_filter;
use ndcwt::ndcwt2d::TransformPlan2D;
use ndcwt::phase::{phase_averages_1d, phase_averages_diagonal, PhaseAverage};
use ndcwt::selfsim::{simulate_fbm_1d_batch, simulate_fbm_2d_batch, FbmSpec};
use ndcwt::spectra::{fit_spectrum, logscale_1d, logscale_diagonal, Detrend, FitMethod, LevelRange};
use ndcwt::verify::{self, VerifyOptions};
use ndcwt::TransformPlan1D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within_runtime(out: Outcome, start: Instant, limit_s: f64) -> Outcome {
    let t = start.elapsed().as_secs_f64();
    let ok = t < limit_s;
    outcome(
        out.passed && ok,
        format!(
            "{}; {t:.2} s (limit {limit_s} s{})",
            out.detail,
            if ok { "" } else { ", EXCEEDED" }
        ),
    )
}

fn filter_identities() -> Outcome {
    let start = Instant::now();
    let (ok, detail) = verify::filter_identities();
    within_runtime(outcome(ok, detail), start, 1.0)
}

fn perfect_reconstruction() -> Outcome {
    let start = Instant::now();
    let opts = VerifyOptions::default();
    let (a, da) = verify::round_trip_1d(&opts);
    let (b, db) = verify::round_trip_2d(&opts);
    within_runtime(outcome(a && b, format!("1-D {da}; 2-D {db}")), start, 30.0)
}

fn oracle_equivalence() -> Outcome {
    let opts = VerifyOptions::default();
    let (a, da) = verify::oracle_1d(&opts);
    let (b, db) = verify::oracle_2d(&opts);
    outcome(a && b, format!("1-D {da}; 2-D {db}"))
}

fn hurst_1d() -> Outcome {
    let start = Instant::now();
    let f = get_filter("cdaub6").unwrap();
    let (m, p) = (4096, 12);
    let plan = TransformPlan1D::new(m, p, &f).unwrap();
    let range = LevelRange { lo: 2, hi: 10 };
    let mut ok = true;
    let mut parts = Vec::new();
    for (h, single_run) in [(0.3, 0.2650), (0.5, 0.5074), (0.7, 0.7277)] {
        let paths = simulate_fbm_1d_batch(&FbmSpec::line(h, m, 20_240_301), 100).unwrap();
        let est: Vec<f64> = paths
            .iter()
            .map(|y| {
                let c = plan.forward_real(&Detrend::Endpoints.apply(y)).unwrap();
                fit_spectrum(&logscale_1d(&c), Some(range), FitMethod::Ols)
                    .unwrap()
                    .hurst
            })
            .collect();
        let mean = est.iter().sum::<f64>() / est.len() as f64;
        let lo = est.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let good = (mean - h).abs() <= 0.05 && (lo..=hi).contains(&single_run);
        ok &= good;
        parts.push(format!(
            "H={h}: mean {mean:.4} range [{lo:.4}, {hi:.4}] ref {single_run}"
        ));
    }
    within_runtime(outcome(ok, parts.join("; ")), start, 120.0)
}

fn hurst_2d() -> Outcome {
    let start = Instant::now();
    let f = get_filter("cdaub6").unwrap();
    let size = 256;
    let plan = TransformPlan2D::new(size, size, 8, 8, &f).unwrap();
    let range = LevelRange { lo: 2, hi: 6 };
    let mut ok = true;
    let mut parts = Vec::new();
    for h in [0.3, 0.5, 0.7] {
        let fields = simulate_fbm_2d_batch(&FbmSpec::grid(h, size, size, 20_240_302), 50).unwrap();
        let est: Vec<f64> = fields
            .iter()
            .map(|a| {
                let blocks = plan.forward_diagonal(a, (size, size), 0).unwrap();
                fit_spectrum(&logscale_diagonal(&blocks), Some(range), FitMethod::Ols)
                    .unwrap()
                    .hurst
            })
            .collect();
        let mean = est.iter().sum::<f64>() / est.len() as f64;
        ok &= (mean - h).abs() <= 0.10;
        parts.push(format!("H={h}: mean {mean:.4}"));
    }
    within_runtime(outcome(ok, parts.join("; ")), start, 600.0)
}

fn scale_invariance() -> Outcome {
    let f = get_filter("cdaub6").unwrap();
    let y: Vec<f64> = verify::random_signal(1000, 5)
        .into_iter()
        .scan(0.0, |s, v| {
            *s += v;
            Some(*s)
        })
        .collect();
    let img = verify::random_signal(64 * 48, 6);
    let plan1 = TransformPlan1D::new(1000, 6, &f).unwrap();
    let plan2 = TransformPlan2D::new(64, 48, 4, 4, &f).unwrap();
    let mut worst_s: f64 = 0.0;
    let mut worst_other: f64 = 0.0;
    let base1 = plan1.forward_real(&y).unwrap();
    let base2 = plan2.forward_diagonal(&img, (64, 48), 0).unwrap();
    let (d1, d2) = (logscale_1d(&base1), logscale_diagonal(&base2));
    let (f1, f2) = (
        fit_spectrum(&d1, None, FitMethod::Ols).unwrap(),
        fit_spectrum(&d2, None, FitMethod::Ols).unwrap(),
    );
    let (ph1, ph2) = (
        phase_averages_1d(&base1).means(),
        phase_averages_diagonal(&base2, PhaseAverage::Arithmetic).means(),
    );
    for a in [1e-3, 0.37, 2.0, 1234.5] {
        let c1 = plan1
            .forward_real(&y.iter().map(|v| v * a).collect::<Vec<_>>())
            .unwrap();
        let c2 = plan2
            .forward_diagonal(&img.iter().map(|v| v * a).collect::<Vec<_>>(), (64, 48), 0)
            .unwrap();
        let (e1, e2) = (logscale_1d(&c1), logscale_diagonal(&c2));
        let shift = 2.0 * a.log2();
        for (x, b) in e1.points.iter().zip(&d1.points).chain(e2.points.iter().zip(&d2.points)) {
            worst_s = worst_s.max((x.log2_energy - b.log2_energy - shift).abs());
        }
        let g1 = fit_spectrum(&e1, None, FitMethod::Ols).unwrap();
        let g2 = fit_spectrum(&e2, None, FitMethod::Ols).unwrap();
        worst_other = worst_other
            .max((g1.slope - f1.slope).abs())
            .max((g2.slope - f2.slope).abs());
        let q1 = phase_averages_1d(&c1).means();
        let q2 = phase_averages_diagonal(&c2, PhaseAverage::Arithmetic).means();
        for (x, b) in q1.iter().zip(&ph1).chain(q2.iter().zip(&ph2)) {
            worst_other = worst_other.max((x - b).abs());
        }
    }
    outcome(
        worst_s < 1e-12 && worst_other < 1e-12,
        format!("max |dS - 2 log2 a| {worst_s:.2e}; max slope/phase change {worst_other:.2e}"),
    )
}

fn nested_anova() -> Outcome {
    let obs = |group, subject, value| Observation { group, subject, value };
    let design = NestedDesign::new(vec![
        obs(0, 0, 1.0),
        obs(0, 0, 3.0),
        obs(0, 1, 5.0),
        obs(0, 1, 7.0),
        obs(1, 2, 10.0),
        obs(1, 2, 12.0),
        obs(1, 3, 8.0),
        obs(1, 3, 6.0),
    ])
    .unwrap();
    let t = subject_adjust(&design).table;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let hand = close(t.group.ss, 50.0)
        && close(t.subject.ss, 32.0)
        && close(t.error.ss, 8.0)
        && close(t.total.ss, 90.0)
        && (t.group.df, t.subject.df, t.error.df, t.total.df) == (1, 2, 4, 7)
        && close(t.group.ms, 50.0)
        && close(t.subject.ms, 16.0)
        && close(t.error.ms, 2.0)
        && t.group.f.is_some_and(|f| close(f, 25.0))
        && t.subject.f.is_some_and(|f| close(f, 8.0));

    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut o = Vec::new();
        let mut subject = 0;
        for g in 0..rng.random_range(1..=5) {
            let shift = rng.random_range(-5.0..5.0);
            for _ in 0..rng.random_range(1..=4) {
                let effect = rng.random_range(-2.0..2.0);
                for _ in 0..rng.random_range(1..=6) {
                    o.push(obs(g, subject, shift + effect + rng.random_range(-1.0..1.0)));
                }
                subject += 1;
            }
        }
        let t = subject_adjust(&NestedDesign::new(o).unwrap()).table;
        let rel = (t.group.ss + t.subject.ss + t.error.ss - t.total.ss).abs() / t.total.ss.max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    outcome(
        hand && worst <= 1e-9,
        format!(
            "hand design {}; worst SS identity error {worst:.2e} over 1000 designs",
            if hand { "matches" } else { "MISMATCH" }
        ),
    )
}

fn classification() -> Outcome {
    let f = get_filter("cdaub6").unwrap();
    let settings = FeatureSettings::default();
    let mut signals = Vec::new();
    let mut labels = Vec::new();
    for (class, h) in [(0usize, 0.3), (1, 0.7)] {
        let paths = simulate_fbm_1d_batch(&FbmSpec::line(h, 1024, 20_240_303 + class as u64), 200).unwrap();
        for (i, y) in paths.into_iter().enumerate() {
            let meta = FeatureMeta {
                id: format!("h{h}-{i}"),
                ..Default::default()
            };
            signals.push((meta, y));
            labels.push(class);
        }
    }
    let vectors = extract_batch_1d(&signals, &f, &settings).unwrap();
    let run = |mask| {
        repeated_split_accuracy(&vectors, &labels, mask, 0.75, 100, 99)
            .unwrap()
            .mean_accuracy
    };
    let slope = run(FeatureMask::Slope);
    let phase = run(FeatureMask::Phase);
    let both = run(FeatureMask::SlopePhase);
    outcome(
        both >= 0.90 && both >= slope,
        format!("mean accuracy Slope {slope:.4}, phase {phase:.4}, Slope + phase {both:.4}"),
    )
}

fn performance() -> Outcome {
    let t1 = verify::bench_1d(1024, 4, 20);
    let t2 = verify::bench_2d(1024, 4);
    outcome(
        t1 < verify::BENCH_1D_LIMIT_S && t2 < verify::BENCH_2D_LIMIT_S,
        format!("1-D 1024 p=4: {:.3} ms; 2-D 1024x1024 p=4: {t2:.2} s", t1 * 1e3),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("filter identities", filter_identities),
        ("perfect reconstruction", perfect_reconstruction),
        ("oracle equivalence", oracle_equivalence),
        ("Hurst recovery 1-D", hurst_1d),
        ("Hurst recovery 2-D", hurst_2d),
        ("scale invariance", scale_invariance),
        ("nested ANOVA", nested_anova),
        ("classification smoke", classification),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        failed += usize::from(!out.passed);
        println!(
            "{} [{}] {name}: {}",
            if out.passed { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
