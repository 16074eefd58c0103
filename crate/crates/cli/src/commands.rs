use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use ndcwt::features::{
    adjust_feature_vectors, extract_features, repeated_split_accuracy, segment, FeatureInput, FeatureMask, FeatureMeta,
    FeatureSettings, FeatureVector,
};
use ndcwt::filters::{get_filter, parse_custom_filter, ComplexFilterPair};
use ndcwt::phase::{phase_averages_1d_with, phase_averages_diagonal, PhaseAverage, PhaseSummary};
use ndcwt::selfsim::{simulate_fbm_1d, simulate_fbm_2d, FbmSpec};
use ndcwt::spectra::{fit_spectrum, logscale_1d, logscale_diagonal, Detrend, LogscaleDiagram, SpectrumFit};
use ndcwt::verify::{self, VerifyOptions};
use ndcwt::{Coefficients1D, Complex64, TransformPlan1D, TransformPlan2D};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::formats;
use crate::io::{read_data, write_atomic, write_data, write_json, Data};
use crate::{
    AnalysisArgs, AverageArg, Command, FeaturesArgs, FilterArgs, InputMode, PhaseArgs, SimulateArgs, Transform1dArgs,
    Transform2dArgs, VerifyArgs,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Wrapper of every JSON output.
#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    version: &'static str,
    command: &'static str,
    threads: usize,
    config: &'a C,
    result: R,
}

#[derive(Deserialize)]
struct Envelope1D {
    result: Transform1dResult,
}

#[derive(Serialize, Deserialize)]
struct Transform1dResult {
    /// Detail level labels, coarsest first.
    levels: Vec<i32>,
    coefficients: Coefficients1D,
}

pub fn run(command: &Command, threads: usize) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Transform1d(a) => transform1d(a, threads),
        Command::Transform2d(a) => transform2d(a),
        Command::Spectra(a) => spectra(a, threads),
        Command::Phase(a) => phase(a, threads),
        Command::Features(a) => features(a, threads),
        Command::Verify(a) => verify_cmd(a, threads),
    }
}

fn envelope<'a, C: Serialize, R: Serialize>(
    command: &'static str,
    threads: usize,
    config: &'a C,
    result: R,
) -> Envelope<'a, C, R> {
    Envelope {
        version: VERSION,
        command,
        threads,
        config,
        result,
    }
}

fn resolve_filter(args: &FilterArgs) -> Result<ComplexFilterPair, CliError> {
    match &args.filter_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
            Ok(parse_custom_filter(name, &text)?)
        }
        None => Ok(get_filter(&args.wavelet)?),
    }
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let data = if a.fbm1d {
        let m = a
            .length
            .ok_or_else(|| CliError::validation("--length", "required with --fbm1d".into()))?;
        let spec = FbmSpec {
            stream: a.stream,
            ..FbmSpec::line(a.hurst, m, a.seed)
        };
        Data::Signal(simulate_fbm_1d(&spec)?)
    } else {
        let (rows, cols) = a
            .shape
            .ok_or_else(|| CliError::validation("--shape", "required with --fbm2d".into()))?;
        let spec = FbmSpec {
            stream: a.stream,
            ..FbmSpec::grid(a.hurst, rows, cols, a.seed)
        };
        Data::Image {
            rows,
            cols,
            data: simulate_fbm_2d(&spec)?,
        }
    };
    write_data(&a.out, &data)
}

fn expect_signal(data: Data, flag: &'static str) -> Result<Vec<f64>, CliError> {
    match data {
        Data::Signal(y) => Ok(y),
        Data::Image { rows, cols, .. } => Err(CliError::validation(
            flag,
            format!("expected a signal, got a {rows}x{cols} array"),
        )),
    }
}

fn transform1d(a: &Transform1dArgs, threads: usize) -> Result<(), CliError> {
    let filter = resolve_filter(&a.filter)?;
    if a.inverse {
        let text = std::fs::read_to_string(&a.input).map_err(|e| CliError::io(&a.input, e))?;
        let env: Envelope1D = serde_json::from_str(&text)
            .map_err(|e| CliError::validation("--input", format!("{}: {e}", a.input.display())))?;
        let c = env.result.coefficients;
        let plan = TransformPlan1D::new(c.m, c.depth, &filter)?.with_backend(a.filter.backend);
        let y = plan.inverse(&c)?;
        warn_imaginary(&y);
        return write_data(&a.out, &Data::Signal(y.iter().map(|z| z.re).collect()));
    }
    let y = expect_signal(read_data(&a.input)?, "--input")?;
    let plan = TransformPlan1D::new(y.len(), a.depth, &filter)?.with_backend(a.filter.backend);
    let coefficients = plan.forward_real(&y)?;
    let result = Transform1dResult {
        levels: coefficients.levels().map(|(j, _)| j).collect(),
        coefficients,
    };
    write_json(&a.out, &envelope("transform1d", threads, a, result))
}

fn warn_imaginary(y: &[Complex64]) {
    let im = y.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let re = y.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    if im > 1e-8 * re.max(1.0) {
        warn!("reconstruction has imaginary parts up to {im:e}; writing real parts only");
    }
}

fn transform2d(a: &Transform2dArgs) -> Result<(), CliError> {
    let filter = resolve_filter(&a.filter)?;
    if a.inverse {
        let bin = formats::read(&a.input)?;
        if bin.filter.is_none() && a.filter.filter_file.is_none() {
            return Err(CliError::validation(
                "--filter-file",
                "coefficients were made with a custom filter; pass it again".into(),
            ));
        }
        if let (Some(stored), None) = (bin.filter, &a.filter.filter_file) {
            if stored != filter.name {
                info!(
                    "using the stored filter `{stored}` instead of --wavelet {}",
                    filter.name
                );
            }
        }
        let filter = match (bin.filter, &a.filter.filter_file) {
            (Some(stored), None) => get_filter(stored)?,
            _ => filter,
        };
        let plan = TransformPlan2D::new(bin.m, bin.n, bin.p1, bin.p2, &filter)?.with_backend(a.filter.backend);
        let coeffs = plan.coefficients_from(bin.data)?;
        let img = plan.inverse(&coeffs)?;
        warn_imaginary(&img);
        return write_data(
            &a.out,
            &Data::Image {
                rows: bin.m,
                cols: bin.n,
                data: img.iter().map(|z| z.re).collect(),
            },
        );
    }
    let Data::Image { rows, cols, data } = read_data(&a.input)? else {
        return Err(CliError::validation(
            "--input",
            "expected a 2-D array (CSV rows or PGM)".into(),
        ));
    };
    let p2 = a.depth2.unwrap_or(a.depth);
    let plan = TransformPlan2D::new(rows, cols, a.depth, p2, &filter)?.with_backend(a.filter.backend);
    let coeffs = plan.forward(&data, (rows, cols))?;
    formats::write(&a.out, &coeffs)
}

/// The effective analysis settings after defaults are resolved.
#[derive(Serialize)]
struct AnalysisConfig<'a> {
    #[serde(flatten)]
    args: &'a AnalysisArgs,
    filter_name: String,
    effective_mode: &'static str,
    effective_detrend: Detrend,
    depths: (usize, usize),
}

enum Transformed {
    OneD(Coefficients1D),
    TwoD(ndcwt::ndcwt2d::DiagonalBlocks),
}

fn analyze<'a>(a: &'a AnalysisArgs) -> Result<(AnalysisConfig<'a>, Transformed), CliError> {
    let filter = resolve_filter(&a.filter)?;
    let data = read_data(&a.input)?;
    let data = match (a.mode, data) {
        (InputMode::TwoD, Data::Signal(_)) => {
            return Err(CliError::validation("--mode", "2d needs a 2-D array input".into()));
        }
        (InputMode::OneD, Data::Image { rows, cols, data }) if rows == 1 || cols == 1 => Data::Signal(data),
        (InputMode::OneD, Data::Image { rows, cols, .. }) => {
            return Err(CliError::validation(
                "--mode",
                format!("1d needs a signal, got {rows}x{cols}"),
            ));
        }
        (_, d) => d,
    };
    match data {
        Data::Signal(y) => {
            let detrend = a.detrend.unwrap_or(Detrend::Endpoints);
            let plan = TransformPlan1D::new(y.len(), a.depth, &filter)?.with_backend(a.filter.backend);
            let coeffs = plan.forward_real(&detrend.apply(&y))?;
            let config = AnalysisConfig {
                args: a,
                filter_name: filter.name.clone(),
                effective_mode: "1d",
                effective_detrend: detrend,
                depths: (a.depth, 0),
            };
            Ok((config, Transformed::OneD(coeffs)))
        }
        Data::Image { rows, cols, data } => {
            if a.detrend.is_some_and(|d| d != Detrend::None) {
                warn!("--detrend applies to signals only; images are used as given");
            }
            let p2 = a.depth2.unwrap_or(a.depth);
            let plan = TransformPlan2D::new(rows, cols, a.depth, p2, &filter)?.with_backend(a.filter.backend);
            let blocks = plan.forward_diagonal(&data, (rows, cols), a.shift)?;
            let config = AnalysisConfig {
                args: a,
                filter_name: filter.name.clone(),
                effective_mode: "2d",
                effective_detrend: Detrend::None,
                depths: (a.depth, p2),
            };
            Ok((config, Transformed::TwoD(blocks)))
        }
    }
}

#[derive(Serialize)]
struct SpectraResult {
    diagram: LogscaleDiagram,
    fit: SpectrumFit,
}

fn spectra(a: &AnalysisArgs, threads: usize) -> Result<(), CliError> {
    let (config, t) = analyze(a)?;
    let diagram = match &t {
        Transformed::OneD(c) => logscale_1d(c),
        Transformed::TwoD(b) => logscale_diagonal(b),
    };
    let fit = fit_spectrum(&diagram, a.levels, a.fit)?;
    if !(0.0..=1.0).contains(&fit.hurst) {
        warn!("Hurst estimate {:.4} lies outside [0, 1]", fit.hurst);
    }
    if let Some(path) = &a.plot_data {
        let mut csv = String::from("level,log2_energy,count,fitted\n");
        for p in &diagram.points {
            let fitted = fit.intercept + fit.slope * p.level as f64;
            csv.push_str(&format!("{},{},{},{}\n", p.level, p.log2_energy, p.count, fitted));
        }
        write_atomic(path, csv.as_bytes())?;
    }
    write_json(
        &a.out,
        &envelope("spectra", threads, &config, SpectraResult { diagram, fit }),
    )
}

#[derive(Serialize)]
struct PhaseConfig<'a> {
    #[serde(flatten)]
    analysis: AnalysisConfig<'a>,
    average: AverageArg,
}

fn phase(a: &PhaseArgs, threads: usize) -> Result<(), CliError> {
    let (config, t) = analyze(&a.analysis)?;
    let average = match a.average {
        AverageArg::Arithmetic => PhaseAverage::Arithmetic,
        AverageArg::Circular => PhaseAverage::Circular,
    };
    let summary: PhaseSummary = match &t {
        Transformed::OneD(c) => phase_averages_1d_with(c, average),
        Transformed::TwoD(b) => phase_averages_diagonal(b, average),
    };
    if summary.zero_total() > 0 {
        warn!(
            "{} coefficients are exactly zero and count with phase 0",
            summary.zero_total()
        );
    }
    if let Some(path) = &a.analysis.plot_data {
        let mut csv = String::from("level,mean_phase,count,zero_count\n");
        for l in &summary.per_level {
            csv.push_str(&format!("{},{},{},{}\n", l.level, l.mean, l.count, l.zero_count));
        }
        write_atomic(path, csv.as_bytes())?;
    }
    let config = PhaseConfig {
        analysis: config,
        average: a.average,
    };
    write_json(&a.analysis.out, &envelope("phase", threads, &config, summary))
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    path: PathBuf,
    #[serde(default)]
    group: Option<String>,
    #[serde(default)]
    subject: Option<String>,
}

fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let base = path.parent().unwrap_or(Path::new("."));
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<ManifestRow>().enumerate() {
        let mut row =
            rec.map_err(|e| CliError::validation("--manifest", format!("{} row {}: {e}", path.display(), i + 1)))?;
        row.group = row.group.filter(|s| !s.is_empty());
        row.subject = row.subject.filter(|s| !s.is_empty());
        if row.path.is_relative() {
            row.path = base.join(&row.path);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::validation("--manifest", "no rows".into()));
    }
    Ok(rows)
}

#[derive(Serialize)]
struct ClassifyResult {
    classes: Vec<String>,
    train_fraction: f64,
    repeats: usize,
    seed: u64,
    masks: Vec<MaskResult>,
}

#[derive(Serialize)]
struct MaskResult {
    mask: &'static str,
    mean_accuracy: f64,
    accuracies: Vec<f64>,
}

fn features(a: &FeaturesArgs, threads: usize) -> Result<(), CliError> {
    let filter = resolve_filter(&a.filter)?;
    let settings = FeatureSettings {
        depth: a.depth,
        levels: a.levels,
        fit: a.fit,
        detrend: a.detrend,
        shift: a.shift,
        backend: a.filter.backend,
    };
    let rows = read_manifest(&a.manifest)?;

    struct Item {
        meta: FeatureMeta,
        data: Data,
    }
    let mut items = Vec::new();
    for row in &rows {
        let data = read_data(&row.path)?;
        let id = row.path.display().to_string();
        let meta = |id: String| FeatureMeta {
            id,
            group: row.group.clone(),
            subject: row.subject.clone(),
        };
        match (&data, a.segment) {
            (Data::Signal(y), Some(seg)) => {
                let windows = segment(y, seg.window, seg.step)?;
                for (k, w) in windows.into_iter().enumerate() {
                    items.push(Item {
                        meta: meta(format!("{id}#{k}")),
                        data: Data::Signal(w.to_vec()),
                    });
                }
            }
            _ => items.push(Item { meta: meta(id), data }),
        }
    }
    info!("extracting features from {} inputs", items.len());
    let vectors: Vec<FeatureVector> = ndcwt::par::map_range(items.len(), |i| {
        let input = match &items[i].data {
            Data::Signal(y) => FeatureInput::Signal(y),
            Data::Image { rows, cols, data } => FeatureInput::Image {
                data,
                rows: *rows,
                cols: *cols,
            },
        };
        extract_features(input, &filter, &settings, items[i].meta.clone())
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    let levels = vectors[0].levels.clone();
    if vectors.iter().any(|v| v.levels != levels) {
        return Err(CliError::validation(
            "--manifest",
            "inputs give different level sets; use equal lengths or --segment".into(),
        ));
    }
    for v in vectors.iter().filter(|v| v.degenerate.is_some()) {
        warn!(
            "{}: slope is undefined ({})",
            v.meta.id,
            v.degenerate.as_deref().unwrap_or("")
        );
    }

    let adjusted = if a.adjust_subjects {
        let adj = adjust_feature_vectors(&vectors)?;
        if let Some(path) = &a.anova_out {
            write_json(path, &envelope("features", threads, a, &adj.columns))?;
        }
        Some(adj.vectors)
    } else {
        None
    };

    let mut header = vec![
        "id".to_string(),
        "group".into(),
        "subject".into(),
        "slope".into(),
        "hurst".into(),
    ];
    header.extend(levels.iter().map(|j| format!("phase_{j}")));
    if adjusted.is_some() {
        header.extend(["slope_adj".to_string(), "hurst_adj".into()]);
        header.extend(levels.iter().map(|j| format!("phase_{j}_adj")));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::validation("--out", e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for (i, v) in vectors.iter().enumerate() {
        let mut rec = vec![
            v.meta.id.clone(),
            v.meta.group.clone().unwrap_or_default(),
            v.meta.subject.clone().unwrap_or_default(),
            v.slope.to_string(),
            v.hurst.to_string(),
        ];
        rec.extend(v.phase_means.iter().map(f64::to_string));
        if let Some(adj) = &adjusted {
            let u = &adj[i];
            rec.extend([u.slope.to_string(), u.hurst.to_string()]);
            rec.extend(u.phase_means.iter().map(f64::to_string));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::validation("--out", e.to_string()))?;
    write_atomic(&a.out, &bytes)?;

    if let Some(path) = &a.classify_out {
        let source = adjusted.as_ref().unwrap_or(&vectors);
        let mut class_ids: BTreeMap<String, usize> = BTreeMap::new();
        for v in source {
            let g =
                v.meta.group.clone().ok_or_else(|| {
                    CliError::validation("--classify-out", format!("`{}` has no group label", v.meta.id))
                })?;
            let next = class_ids.len();
            class_ids.entry(g).or_insert(next);
        }
        let labels: Vec<usize> = source
            .iter()
            .map(|v| class_ids[v.meta.group.as_deref().unwrap_or_default()])
            .collect();
        let mut masks = Vec::new();
        for mask in FeatureMask::ALL {
            let s = repeated_split_accuracy(source, &labels, mask, 0.75, a.repeats, a.seed)?;
            masks.push(MaskResult {
                mask: mask.name(),
                mean_accuracy: s.mean_accuracy,
                accuracies: s.accuracies,
            });
        }
        let mut classes: Vec<(usize, String)> = class_ids.into_iter().map(|(k, v)| (v, k)).collect();
        classes.sort();
        let result = ClassifyResult {
            classes: classes.into_iter().map(|c| c.1).collect(),
            train_fraction: 0.75,
            repeats: a.repeats,
            seed: a.seed,
            masks,
        };
        write_json(path, &envelope("features", threads, a, result))?;
    }
    Ok(())
}

fn verify_cmd(a: &VerifyArgs, threads: usize) -> Result<(), CliError> {
    let report = verify::run(&VerifyOptions {
        quick: a.quick,
        bench: a.bench,
        seed: a.seed,
    });
    for c in &report.checks {
        println!(
            "{} {:<28} {:>8.3} s  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.seconds,
            c.detail
        );
    }
    if let Some(path) = &a.json {
        write_json(path, &envelope("verify", threads, a, &report))?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::validation("verify", "one or more checks failed".into()))
    }
}
