//! Feature vectors, subject-effect adjustment and a reference classifier.
//!
//! A feature vector holds the spectral slope (with its Hurst estimate) and
//! the per-level phase averages, coarsest level first. Segmented recordings
//! give several vectors per subject; [`subject_adjust`] fits the two-way
//! nested model `y_ijk = u + alpha_i + beta_j(i) + e_ijk` and removes the
//! subject effects `beta_j(i) = mean_ij - mean_i` from every observation.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{NdcwtError, Result};
use crate::filters::ComplexFilterPair;
use crate::ndcwt1d::{Backend, TransformPlan1D};
use crate::ndcwt2d::TransformPlan2D;
use crate::par;
use crate::phase::{phase_averages_1d, phase_averages_diagonal, PhaseAverage};
use crate::spectra::{fit_spectrum, logscale_1d, logscale_diagonal, Detrend, FitMethod, LevelRange, Mode};

pub const DEFAULT_WINDOW: usize = 1024;
pub const DEFAULT_STEP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSettings {
    /// Depth of the transform; for images it is used on both axes.
    pub depth: usize,
    /// Levels used by the slope fit; all detail levels when `None`.
    pub levels: Option<LevelRange>,
    pub fit: FitMethod,
    /// Applied to signals only.
    pub detrend: Detrend,
    /// Scale shift `s` of the diagonal hierarchy for images.
    pub shift: i32,
    pub backend: Backend,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self {
            depth: 4,
            levels: None,
            fit: FitMethod::Ols,
            detrend: Detrend::Endpoints,
            shift: 0,
            backend: Backend::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub id: String,
    pub group: Option<String>,
    pub subject: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub slope: f64,
    pub hurst: f64,
    /// One mean phase per detail level, coarsest first.
    pub phase_means: Vec<f64>,
    pub levels: Vec<i32>,
    pub mode: Mode,
    pub wavelet: String,
    pub settings: FeatureSettings,
    pub meta: FeatureMeta,
    /// Set when the slope could not be fitted; slope and hurst are NaN then.
    pub degenerate: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub enum FeatureInput<'a> {
    Signal(&'a [f64]),
    Image { data: &'a [f64], rows: usize, cols: usize },
}

/// Transform, fit and phase-average one input.
pub fn extract_features(
    input: FeatureInput<'_>,
    filter: &ComplexFilterPair,
    settings: &FeatureSettings,
    meta: FeatureMeta,
) -> Result<FeatureVector> {
    let (diagram, phases) = match input {
        FeatureInput::Signal(y) => {
            let plan = TransformPlan1D::new(y.len(), settings.depth, filter)?.with_backend(settings.backend);
            let coeffs = plan.forward_real(&settings.detrend.apply(y))?;
            (logscale_1d(&coeffs), phase_averages_1d(&coeffs))
        }
        FeatureInput::Image { data, rows, cols } => {
            let plan = TransformPlan2D::new(rows, cols, settings.depth, settings.depth, filter)?
                .with_backend(settings.backend);
            let blocks = plan.forward_diagonal(data, (rows, cols), settings.shift)?;
            (
                logscale_diagonal(&blocks),
                phase_averages_diagonal(&blocks, PhaseAverage::Arithmetic),
            )
        }
    };
    let (slope, hurst, degenerate) = match fit_spectrum(&diagram, settings.levels, settings.fit) {
        Ok(fit) => (fit.slope, fit.hurst, None),
        Err(e @ NdcwtError::InsufficientLevels { .. }) => {
            warn!("{}: degenerate features: {e}", meta.id);
            (f64::NAN, f64::NAN, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    Ok(FeatureVector {
        slope,
        hurst,
        phase_means: phases.means(),
        levels: phases.per_level.iter().map(|l| l.level).collect(),
        mode: diagram.mode,
        wavelet: filter.name.clone(),
        settings: *settings,
        meta,
        degenerate,
    })
}

/// Features of many signals, in input order.
pub fn extract_batch_1d(
    signals: &[(FeatureMeta, Vec<f64>)],
    filter: &ComplexFilterPair,
    settings: &FeatureSettings,
) -> Result<Vec<FeatureVector>> {
    par::map_range(signals.len(), |i| {
        let (meta, y) = &signals[i];
        extract_features(FeatureInput::Signal(y), filter, settings, meta.clone())
    })
    .into_iter()
    .collect()
}

/// Windows of length `window` starting every `step` samples; a tail shorter
/// than `window` is dropped.
pub fn segment(signal: &[f64], window: usize, step: usize) -> Result<Vec<&[f64]>> {
    if window == 0 || step == 0 {
        return Err(NdcwtError::InvalidInput(
            "segment window and step must be positive".into(),
        ));
    }
    if signal.len() < window {
        return Err(NdcwtError::SignalTooShort {
            len: signal.len(),
            taps: window,
        });
    }
    Ok((0..=signal.len() - window)
        .step_by(step)
        .map(|s| &signal[s..s + window])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub group: usize,
    /// Subject id, unique across groups.
    pub subject: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedDesign {
    observations: Vec<Observation>,
}

impl NestedDesign {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(NdcwtError::InvalidDesign("no observations".into()));
        }
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for o in &observations {
            if !o.value.is_finite() {
                return Err(NdcwtError::InvalidDesign(format!(
                    "non-finite value for subject {}",
                    o.subject
                )));
            }
            if let Some(&g) = owner.get(&o.subject) {
                if g != o.group {
                    return Err(NdcwtError::InvalidDesign(format!(
                        "subject {} appears in groups {g} and {}",
                        o.subject, o.group
                    )));
                }
            } else {
                owner.insert(o.subject, o.group);
            }
        }
        Ok(Self { observations })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn group_count(&self) -> usize {
        self.observations.iter().map(|o| o.group).collect::<BTreeSet<_>>().len()
    }

    pub fn subject_count(&self) -> usize {
        self.observations
            .iter()
            .map(|o| o.subject)
            .collect::<BTreeSet<_>>()
            .len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub ss: f64,
    pub df: usize,
    /// `ss / df`; NaN when `df == 0`.
    pub ms: f64,
    /// `ms / ms_error`, as for a fixed-effects model.
    pub f: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub group: AnovaRow,
    pub subject: AnovaRow,
    pub error: AnovaRow,
    pub total: AnovaRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectAdjustment {
    /// `y - beta_j(i)` for each observation, in input order.
    pub adjusted: Vec<f64>,
    pub grand_mean: f64,
    /// `(group, alpha_i)` ascending by group.
    pub group_effects: Vec<(usize, f64)>,
    /// `(group, subject, beta_j(i))` ascending by subject.
    pub subject_effects: Vec<(usize, usize, f64)>,
    pub table: AnovaTable,
}

#[derive(Default, Clone, Copy)]
struct Cell {
    sum: f64,
    n: usize,
}

impl Cell {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.n += 1;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }
}

fn row(ss: f64, df: usize) -> AnovaRow {
    AnovaRow {
        ss,
        df,
        ms: if df == 0 { f64::NAN } else { ss / df as f64 },
        f: None,
        p_value: None,
    }
}

fn with_f(mut r: AnovaRow, error: &AnovaRow) -> AnovaRow {
    if r.df > 0 && error.df > 0 && error.ms > 0.0 {
        let f = r.ms / error.ms;
        r.f = Some(f);
        r.p_value = FisherSnedecor::new(r.df as f64, error.df as f64).ok().map(|d| d.sf(f));
    }
    r
}

/// Least-squares fit of the nested model with effects summing to zero
/// (weighted by cell size in unbalanced designs).
pub fn subject_adjust(design: &NestedDesign) -> SubjectAdjustment {
    let obs = design.observations();
    let mut total = Cell::default();
    let mut groups: BTreeMap<usize, Cell> = BTreeMap::new();
    let mut subjects: BTreeMap<usize, (usize, Cell)> = BTreeMap::new();
    for o in obs {
        total.add(o.value);
        groups.entry(o.group).or_default().add(o.value);
        subjects
            .entry(o.subject)
            .or_insert((o.group, Cell::default()))
            .1
            .add(o.value);
    }
    let grand = total.mean();
    let mut per_group_subjects: BTreeMap<usize, usize> = BTreeMap::new();
    for (g, _) in subjects.values() {
        *per_group_subjects.entry(*g).or_default() += 1;
    }
    for (g, count) in &per_group_subjects {
        if *count == 1 {
            warn!("group {g} has a single subject; its nested effect is 0");
        }
    }

    let group_effects: Vec<(usize, f64)> = groups.iter().map(|(&g, c)| (g, c.mean() - grand)).collect();
    let beta: BTreeMap<usize, f64> = subjects
        .iter()
        .map(|(&s, (g, c))| (s, c.mean() - groups[g].mean()))
        .collect();
    let subject_effects = subjects.iter().map(|(&s, (g, _))| (*g, s, beta[&s])).collect();

    let ss_group: f64 = groups.values().map(|c| c.n as f64 * (c.mean() - grand).powi(2)).sum();
    let ss_subject: f64 = subjects
        .values()
        .map(|(g, c)| c.n as f64 * (c.mean() - groups[g].mean()).powi(2))
        .sum();
    let mut ss_error = 0.0;
    let mut ss_total = 0.0;
    for o in obs {
        ss_error += (o.value - subjects[&o.subject].1.mean()).powi(2);
        ss_total += (o.value - grand).powi(2);
    }
    let n = obs.len();
    let error = row(ss_error, n - subjects.len());
    let table = AnovaTable {
        group: with_f(row(ss_group, groups.len() - 1), &error),
        subject: with_f(row(ss_subject, subjects.len() - groups.len()), &error),
        error,
        total: row(ss_total, n - 1),
    };
    SubjectAdjustment {
        adjusted: obs.iter().map(|o| o.value - beta[&o.subject]).collect(),
        grand_mean: grand,
        group_effects,
        subject_effects,
        table,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnAdjustment {
    /// `slope` or `phase_<level>`.
    pub column: String,
    pub adjustment: SubjectAdjustment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedFeatures {
    pub vectors: Vec<FeatureVector>,
    /// Group labels in the order of their ids in the fitted designs.
    pub groups: Vec<String>,
    pub subjects: Vec<String>,
    pub columns: Vec<ColumnAdjustment>,
}

/// Applies [`subject_adjust`] to the slope and every phase column of
/// vectors whose metadata carries a group and subject. Hurst estimates are
/// recomputed from the adjusted slopes.
pub fn adjust_feature_vectors(vectors: &[FeatureVector]) -> Result<AdjustedFeatures> {
    let mut group_ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut subject_ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut keys = Vec::with_capacity(vectors.len());
    for v in vectors {
        let (Some(g), Some(s)) = (v.meta.group.as_deref(), v.meta.subject.as_deref()) else {
            return Err(NdcwtError::InvalidDesign(format!(
                "`{}` is missing a group or subject label",
                v.meta.id
            )));
        };
        let gid = group_ids.len();
        let gid = *group_ids.entry(g).or_insert(gid);
        let sid = subject_ids.len();
        let sid = *subject_ids.entry(s).or_insert(sid);
        keys.push((gid, sid));
    }
    let width = vectors.first().map_or(0, |v| v.phase_means.len());
    if vectors.iter().any(|v| v.phase_means.len() != width) {
        return Err(NdcwtError::InvalidDesign(
            "feature vectors have different depths".into(),
        ));
    }
    if vectors.iter().any(|v| v.levels != vectors[0].levels) {
        return Err(NdcwtError::InvalidDesign(
            "feature vectors cover different levels".into(),
        ));
    }
    let column = |name: String, get: &dyn Fn(&FeatureVector) -> f64| -> Result<ColumnAdjustment> {
        let obs = vectors
            .iter()
            .zip(&keys)
            .map(|(v, &(group, subject))| Observation {
                group,
                subject,
                value: get(v),
            })
            .collect();
        Ok(ColumnAdjustment {
            column: name,
            adjustment: subject_adjust(&NestedDesign::new(obs)?),
        })
    };
    let mut columns = vec![column("slope".into(), &|v| v.slope)?];
    for k in 0..width {
        let level = vectors[0].levels[k];
        columns.push(column(format!("phase_{level}"), &|v| v.phase_means[k])?);
    }
    let adjusted = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let slope = columns[0].adjustment.adjusted[i];
            FeatureVector {
                slope,
                hurst: v.mode.hurst_from_slope(slope),
                phase_means: columns[1..].iter().map(|c| c.adjustment.adjusted[i]).collect(),
                ..v.clone()
            }
        })
        .collect();
    let by_id = |map: BTreeMap<&str, usize>| {
        let mut names: Vec<(usize, String)> = map.into_iter().map(|(k, v)| (v, k.to_string())).collect();
        names.sort();
        names.into_iter().map(|(_, k)| k).collect()
    };
    Ok(AdjustedFeatures {
        vectors: adjusted,
        groups: by_id(group_ids),
        subjects: by_id(subject_ids),
        columns,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMask {
    Slope,
    Phase,
    SlopePhase,
}

impl FeatureMask {
    pub const ALL: [FeatureMask; 3] = [FeatureMask::Slope, FeatureMask::Phase, FeatureMask::SlopePhase];

    pub fn name(self) -> &'static str {
        match self {
            FeatureMask::Slope => "Slope",
            FeatureMask::Phase => "∠d_j",
            FeatureMask::SlopePhase => "Slope + ∠d_j",
        }
    }

    pub fn select(self, v: &FeatureVector) -> Vec<f64> {
        match self {
            FeatureMask::Slope => vec![v.slope],
            FeatureMask::Phase => v.phase_means.clone(),
            FeatureMask::SlopePhase => std::iter::once(v.slope).chain(v.phase_means.iter().copied()).collect(),
        }
    }
}

impl std::str::FromStr for FeatureMask {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "slope" | "Slope" => Ok(Self::Slope),
            "phase" | "∠d_j" => Ok(Self::Phase),
            "slope+phase" | "Slope + ∠d_j" => Ok(Self::SlopePhase),
            other => Err(format!("unknown feature mask `{other}` (slope|phase|slope+phase)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub sensitivity: f64,
    pub specificity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Class ids, ascending; indexes `confusion`.
    pub classes: Vec<usize>,
    pub predictions: Vec<usize>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
}

/// Nearest class centroid under Euclidean distance after z-scoring every
/// column with training statistics. Ties go to the lowest class id. The
/// training set is put in a canonical order first, so predictions do not
/// depend on how it is ordered.
pub fn nearest_centroid_classify(
    train: &[FeatureVector],
    train_labels: &[usize],
    test: &[FeatureVector],
    test_labels: &[usize],
    mask: FeatureMask,
) -> Result<ClassificationReport> {
    if train.len() != train_labels.len() {
        return Err(NdcwtError::LengthMismatch {
            expected: train.len(),
            actual: train_labels.len(),
        });
    }
    if test.len() != test_labels.len() {
        return Err(NdcwtError::LengthMismatch {
            expected: test.len(),
            actual: test_labels.len(),
        });
    }
    let mut rows: Vec<(usize, Vec<f64>)> = train_labels
        .iter()
        .zip(train)
        .map(|(&l, v)| (l, mask.select(v)))
        .collect();
    let dim = rows.first().map_or(0, |r| r.1.len());
    if rows.iter().any(|r| r.1.len() != dim) {
        return Err(NdcwtError::InvalidInput(
            "training vectors have different lengths".into(),
        ));
    }
    rows.sort_by(|a, b| {
        a.0.cmp(&b.0).then_with(|| {
            a.1.iter()
                .zip(&b.1)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });

    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for (_, r) in &rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x / n;
        }
    }
    let mut scale = vec![0.0; dim];
    for (_, r) in &rows {
        for ((s, x), m) in scale.iter_mut().zip(r).zip(&mean) {
            *s += (x - m).powi(2) / n;
        }
    }
    for s in scale.iter_mut() {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    let z = |r: &[f64]| -> Vec<f64> { r.iter().zip(&mean).zip(&scale).map(|((x, m), s)| (x - m) / s).collect() };

    let classes: Vec<usize> = train_labels
        .iter()
        .chain(test_labels)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut centroids = Vec::with_capacity(classes.len());
    for &c in &classes {
        let members: Vec<Vec<f64>> = rows.iter().filter(|r| r.0 == c).map(|r| z(&r.1)).collect();
        if members.is_empty() {
            return Err(NdcwtError::EmptyClass(c));
        }
        let mut centroid = vec![0.0; dim];
        for m in &members {
            for (a, x) in centroid.iter_mut().zip(m) {
                *a += x;
            }
        }
        centroid.iter_mut().for_each(|a| *a /= members.len() as f64);
        centroids.push(centroid);
    }

    let mut predictions = Vec::with_capacity(test.len());
    let mut confusion = vec![vec![0usize; classes.len()]; classes.len()];
    for (v, truth) in test.iter().zip(test_labels) {
        let x = mask.select(v);
        if x.len() != dim {
            return Err(NdcwtError::LengthMismatch {
                expected: dim,
                actual: x.len(),
            });
        }
        let x = z(&x);
        let mut best = (0, f64::INFINITY);
        for (k, c) in centroids.iter().enumerate() {
            let d: f64 = x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum();
            if d < best.1 {
                best = (k, d);
            }
        }
        predictions.push(classes[best.0]);
        let t = classes.binary_search(truth).expect("class list covers test labels");
        confusion[t][best.0] += 1;
    }

    let total = test.len();
    let correct: usize = (0..classes.len()).map(|k| confusion[k][k]).sum();
    let per_class = classes
        .iter()
        .enumerate()
        .map(|(k, &class)| {
            let tp = confusion[k][k] as f64;
            let positives: usize = confusion[k].iter().sum();
            let predicted: usize = confusion.iter().map(|r| r[k]).sum();
            let fp = (predicted - confusion[k][k]) as f64;
            let negatives = (total - positives) as f64;
            ClassMetrics {
                class,
                sensitivity: tp / positives as f64,
                specificity: (negatives - fp) / negatives,
            }
        })
        .collect();
    Ok(ClassificationReport {
        classes,
        predictions,
        confusion,
        accuracy: correct as f64 / total as f64,
        per_class,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub mask: FeatureMask,
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

/// Repeated random train/test splits. Repeat `r` shuffles with ChaCha20
/// seeded by `seed` on stream `r`; the first `round(train_fraction * n)`
/// shuffled vectors train the classifier.
pub fn repeated_split_accuracy(
    vectors: &[FeatureVector],
    labels: &[usize],
    mask: FeatureMask,
    train_fraction: f64,
    repeats: usize,
    seed: u64,
) -> Result<SplitSummary> {
    if vectors.len() != labels.len() {
        return Err(NdcwtError::LengthMismatch {
            expected: vectors.len(),
            actual: labels.len(),
        });
    }
    let n_train = (train_fraction * vectors.len() as f64).round() as usize;
    let accuracies = (0..repeats)
        .map(|r| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut idx: Vec<usize> = (0..vectors.len()).collect();
            idx.shuffle(&mut rng);
            let (tr, te) = idx.split_at(n_train);
            let pick = |ix: &[usize]| -> (Vec<FeatureVector>, Vec<usize>) {
                (
                    ix.iter().map(|&i| vectors[i].clone()).collect(),
                    ix.iter().map(|&i| labels[i]).collect(),
                )
            };
            let (train, train_labels) = pick(tr);
            let (test, test_labels) = pick(te);
            nearest_centroid_classify(&train, &train_labels, &test, &test_labels, mask).map(|r| r.accuracy)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean_accuracy = accuracies.iter().sum::<f64>() / accuracies.len().max(1) as f64;
    Ok(SplitSummary {
        mask,
        accuracies,
        mean_accuracy,
    })
}
