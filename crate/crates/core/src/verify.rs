//! Self-check suites shipped with the library and the `verify` command.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::filters::{get_filter, ComplexFilterPair, REGISTERED};
use crate::ndcwt1d::{max_level, Backend, TransformPlan1D};
use crate::ndcwt2d::TransformPlan2D;
use crate::oracle::{atrous_1d, sequential_2d};

pub const ROUND_TRIP_TOL: f64 = 1e-8;
pub const ORACLE_TOL: f64 = 1e-10;
pub const BENCH_1D_LIMIT_S: f64 = 0.05;
pub const BENCH_2D_LIMIT_S: f64 = 30.0;

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Smaller instance sets.
    pub quick: bool,
    /// Also time the reference 1-D and 2-D transforms.
    pub bench: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn timed(name: &str, f: impl FnOnce() -> (bool, String)) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = f();
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let mut checks = vec![
        timed("filter identities", filter_identities),
        timed("round trip 1-D", || round_trip_1d(opts)),
        timed("round trip 2-D", || round_trip_2d(opts)),
        timed("oracle 1-D", || oracle_1d(opts)),
        timed("oracle 2-D", || oracle_2d(opts)),
    ];
    if opts.bench {
        let t = bench_1d(1024, 4, 20);
        checks.push(CheckResult {
            name: "bench 1-D 1024 p=4".into(),
            passed: t < BENCH_1D_LIMIT_S,
            detail: format!("{:.3} ms (limit {} ms)", t * 1e3, BENCH_1D_LIMIT_S * 1e3),
            seconds: t,
        });
        let t = bench_2d(1024, 4);
        checks.push(CheckResult {
            name: "bench 2-D 1024x1024 p=4".into(),
            passed: t < BENCH_2D_LIMIT_S,
            detail: format!("{t:.3} s (limit {BENCH_2D_LIMIT_S} s)"),
            seconds: t,
        });
    }
    VerifyReport { checks }
}

pub fn random_signal(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

fn random_complex(len: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn filters() -> Vec<ComplexFilterPair> {
    REGISTERED.iter().map(|n| get_filter(n).expect("registered")).collect()
}

/// `||a - b|| / ||b||`.
pub fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn filter_identities() -> (bool, String) {
    let mut failures = Vec::new();
    for f in filters() {
        if let Err(e) = f.validate() {
            failures.push(e.to_string());
        }
    }
    (failures.is_empty(), summary(REGISTERED.len(), &failures))
}

fn summary(count: usize, failures: &[String]) -> String {
    if failures.is_empty() {
        format!("{count} instances")
    } else {
        format!("{} of {count} failed; first: {}", failures.len(), failures[0])
    }
}

pub fn round_trip_1d(opts: &VerifyOptions) -> (bool, String) {
    let lengths: &[usize] = if opts.quick { &[64, 100] } else { &[64, 100, 1000, 4096] };
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for f in filters() {
        for &m in lengths {
            for p in 1..=max_level(m) {
                let plan = match TransformPlan1D::new(m, p, &f) {
                    Ok(p) => p,
                    Err(e) => {
                        failures.push(e.to_string());
                        continue;
                    }
                };
                let y = random_complex(m, opts.seed ^ (m * 31 + p) as u64);
                let back = plan.forward(&y).and_then(|c| plan.inverse(&c));
                count += 1;
                match back {
                    Ok(b) => {
                        let e = relative_error(&b, &y);
                        worst = worst.max(e);
                        if e >= ROUND_TRIP_TOL {
                            failures.push(format!("{} m={m} p={p}: {e:.2e}", f.name));
                        }
                    }
                    Err(e) => failures.push(e.to_string()),
                }
            }
        }
    }
    (
        failures.is_empty(),
        format!("{}; worst {worst:.2e}", summary(count, &failures)),
    )
}

pub fn round_trip_2d(opts: &VerifyOptions) -> (bool, String) {
    let shapes: &[(usize, usize)] = if opts.quick {
        &[(33, 47), (64, 64)]
    } else {
        &[(33, 47), (64, 64), (100, 60), (256, 256)]
    };
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for f in filters() {
        for &(m, n) in shapes {
            let (jm, jn) = (max_level(m), max_level(n));
            for (p1, p2) in [(1, 1), (3, 2), (jm, jn)] {
                let a = random_signal(m * n, opts.seed ^ (m * 7919 + n * 31 + p1) as u64);
                let run = TransformPlan2D::new(m, n, p1, p2, &f)
                    .and_then(|plan| plan.forward(&a, (m, n)).and_then(|b| plan.inverse(&b)));
                count += 1;
                match run {
                    Ok(back) => {
                        let az: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                        let e = relative_error(&back, &az);
                        worst = worst.max(e);
                        if e >= ROUND_TRIP_TOL {
                            failures.push(format!("{} {m}x{n} p=({p1},{p2}): {e:.2e}", f.name));
                        }
                    }
                    Err(e) => failures.push(e.to_string()),
                }
            }
        }
    }
    (
        failures.is_empty(),
        format!("{}; worst {worst:.2e}", summary(count, &failures)),
    )
}

pub fn oracle_1d(opts: &VerifyOptions) -> (bool, String) {
    let lengths: &[usize] = if opts.quick {
        &[8, 33, 64]
    } else {
        &[8, 33, 64, 100, 256]
    };
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for f in filters() {
        for &m in lengths {
            for p in 1..=max_level(m) {
                let y = random_complex(m, opts.seed ^ (m * 131 + p) as u64);
                let expected: Vec<Complex64> = atrous_1d(&y, &f, p).concat();
                for backend in [Backend::Dense, Backend::Circulant] {
                    let got = TransformPlan1D::new(m, p, &f).and_then(|plan| plan.forward_flat(&y, backend));
                    count += 1;
                    match got {
                        Ok(g) => {
                            let d = max_abs_diff(&g, &expected);
                            worst = worst.max(d);
                            if d >= ORACLE_TOL {
                                failures.push(format!("{} m={m} p={p} {backend:?}: {d:.2e}", f.name));
                            }
                        }
                        Err(e) => failures.push(e.to_string()),
                    }
                }
            }
        }
    }
    (
        failures.is_empty(),
        format!("{}; worst {worst:.2e}", summary(count, &failures)),
    )
}

pub fn oracle_2d(opts: &VerifyOptions) -> (bool, String) {
    let shapes: &[(usize, usize)] = if opts.quick {
        &[(8, 8), (33, 47)]
    } else {
        &[(8, 8), (33, 47), (64, 40), (256, 256)]
    };
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for f in filters() {
        for &(m, n) in shapes {
            let (jm, jn) = (max_level(m), max_level(n));
            for (p1, p2) in [(1, 1), (2, 3), (jm, jn)] {
                let a = random_signal(m * n, opts.seed ^ (m * 17 + n * 3 + p1) as u64);
                let expected = sequential_2d(&a, m, n, &f, p1, &f, p2);
                for backend in [Backend::Dense, Backend::Circulant] {
                    // dense 256x256 at full depth is ~80 MB per factor; the
                    // circulant path covers it
                    if backend == Backend::Dense && (p1 + 1) * m * m > 1 << 22 {
                        continue;
                    }
                    let got = TransformPlan2D::new(m, n, p1, p2, &f)
                        .map(|plan| plan.with_backend(backend))
                        .and_then(|plan| plan.forward(&a, (m, n)));
                    count += 1;
                    match got {
                        Ok(b) => {
                            let d = max_abs_diff(&b.data, &expected);
                            worst = worst.max(d);
                            if d >= ORACLE_TOL {
                                failures.push(format!("{} {m}x{n} p=({p1},{p2}) {backend:?}: {d:.2e}", f.name));
                            }
                        }
                        Err(e) => failures.push(e.to_string()),
                    }
                }
            }
        }
    }
    (
        failures.is_empty(),
        format!("{}; worst {worst:.2e}", summary(count, &failures)),
    )
}

/// Best-of-`reps` seconds for one cdaub6 forward transform of length `m`,
/// plan construction excluded.
pub fn bench_1d(m: usize, p: usize, reps: usize) -> f64 {
    let f = get_filter("cdaub6").expect("registered");
    let plan = TransformPlan1D::new(m, p, &f).expect("valid bench size");
    let y = random_signal(m, 1);
    (0..reps.max(1))
        .map(|_| {
            let t = Instant::now();
            let c = plan.forward_real(&y).expect("valid input");
            std::hint::black_box(c);
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Seconds for one cdaub6 `size x size` forward transform, plan included.
pub fn bench_2d(size: usize, p: usize) -> f64 {
    let f = get_filter("cdaub6").expect("registered");
    let a = random_signal(size * size, 2);
    let t = Instant::now();
    let plan = TransformPlan2D::new(size, size, p, p, &f).expect("valid bench size");
    let b = plan.forward(&a, (size, size)).expect("valid input");
    std::hint::black_box(b);
    t.elapsed().as_secs_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let report = run(&VerifyOptions {
            quick: true,
            ..Default::default()
        });
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
