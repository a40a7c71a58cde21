//! Leave-one-subject-out evaluation with and without resting-state calibration.
//!
//! Each subject is preprocessed once: uncalibrated task feature vectors plus
//! one calibration vector per requested resting condition. Folds then only
//! stack, divide, select, normalize and train, and every fitted quantity is
//! estimated from the training subjects alone.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{accuracy, train, Classifier, ClassifierKind, ClassifierParams, Model};
use crate::dataio::{
    extract_epochs, load_recording, segment_resting_with, truncate_segment, ContinuousRecording,
    EpochWindow, EyeMode, MiClass, RestingTiming,
};
use crate::dsp::{
    apply_iir, apply_iir_zero_phase, car_filter, design_butterworth_bandpass, fft_bandpass,
    BandpassSpec,
};
use crate::error::{Error, Result};
use crate::features::{
    apply_normalizer, calibrate, fit_normalizer, resting_features, trial_features,
    CalibrationVector, FeatureMatrix, FeatureParams, FeatureVector, DEFAULT_STD_FLOOR,
};
use crate::selection::{apply_mask, fdr_scores, select_top_k, SelectionReport};

/// Resting segment used for calibration, or `none` for raw features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestMode {
    None,
    Open,
    Closed,
    Movement,
}

impl RestMode {
    pub fn eye_mode(self) -> Option<EyeMode> {
        match self {
            RestMode::None => None,
            RestMode::Open => Some(EyeMode::Open),
            RestMode::Closed => Some(EyeMode::Closed),
            RestMode::Movement => Some(EyeMode::Movement),
        }
    }

    pub fn parse(s: &str) -> Result<RestMode> {
        match s {
            "none" => Ok(RestMode::None),
            "open" => Ok(RestMode::Open),
            "closed" => Ok(RestMode::Closed),
            "movement" => Ok(RestMode::Movement),
            _ => Err(Error::InvalidArgument(format!(
                "unknown eye mode `{s}` (expected none, open, closed or movement)"
            ))),
        }
    }
}

/// One evaluation condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub rest: RestMode,
    /// Prefix of the resting segment in seconds; `None` uses all of it.
    #[serde(default)]
    pub duration_s: Option<f64>,
}

impl Condition {
    pub const NO_REST: Condition = Condition {
        rest: RestMode::None,
        duration_s: None,
    };

    pub fn rest(mode: EyeMode, duration_s: Option<f64>) -> Condition {
        let rest = match mode {
            EyeMode::Open => RestMode::Open,
            EyeMode::Closed => RestMode::Closed,
            EyeMode::Movement => RestMode::Movement,
        };
        Condition { rest, duration_s }
    }

    pub fn label(&self) -> String {
        let mode = match self.rest {
            RestMode::None => return "no rest".into(),
            RestMode::Open => "eye-open",
            RestMode::Closed => "eye-close",
            RestMode::Movement => "eye-movement",
        };
        match self.duration_s {
            Some(d) => format!("rest ({mode}, {d}s)"),
            None => format!("rest ({mode})"),
        }
    }

    fn needs_rest(&self) -> bool {
        self.rest != RestMode::None
    }
}

/// The four conditions of the eye-mode comparison.
pub fn eye_mode_conditions() -> Vec<Condition> {
    vec![
        Condition::NO_REST,
        Condition::rest(EyeMode::Open, None),
        Condition::rest(EyeMode::Closed, None),
        Condition::rest(EyeMode::Movement, None),
    ]
}

/// No rest, then eyes-open prefixes of each length, then the full segment.
pub fn duration_conditions(durations_s: &[f64]) -> Vec<Condition> {
    let mut out = vec![Condition::NO_REST];
    out.extend(
        durations_s
            .iter()
            .map(|&d| Condition::rest(EyeMode::Open, Some(d))),
    );
    out.push(Condition::rest(EyeMode::Open, None));
    out
}

/// Which channels the common average is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarScope {
    /// Average of the selected sensorimotor channels only.
    Selected,
    /// Average of every recorded channel, then selection.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset_root: PathBuf,
    pub subjects: Vec<String>,
    /// Overrides the per-recording channel selection when set.
    pub channels: Option<Vec<String>>,
    pub classifiers: Vec<ClassifierKind>,
    pub conditions: Vec<Condition>,
    pub epoch_window: EpochWindow,
    pub band_hz: (f64, f64),
    pub filter_order: usize,
    pub zero_phase: bool,
    pub car_scope: CarScope,
    pub features: FeatureParams,
    pub eps_div: f64,
    pub eps_fdr: f64,
    pub std_floor: f64,
    pub k: usize,
    pub classifier_params: ClassifierParams,
    pub resting: RestingTiming,
    /// Eyes-open prefixes evaluated by the duration sweep.
    pub sweep_durations_s: Vec<f64>,
    /// Subjects that may not be evaluated under a calibrated condition.
    pub excluded_when_calibrated: Vec<String>,
    /// Permute labels within each subject (null-hypothesis control).
    pub shuffle_labels: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset_root: PathBuf::from("data"),
            subjects: ["S1", "S2", "S3", "S5", "S6", "S7", "S8", "S9"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            channels: None,
            classifiers: ClassifierKind::ALL.to_vec(),
            conditions: eye_mode_conditions(),
            epoch_window: EpochWindow::default(),
            band_hz: (8.0, 30.0),
            filter_order: 3,
            zero_phase: false,
            car_scope: CarScope::Selected,
            features: FeatureParams::default(),
            eps_div: 1e-12,
            eps_fdr: 1e-12,
            std_floor: DEFAULT_STD_FLOOR,
            k: 25,
            classifier_params: ClassifierParams::default(),
            resting: RestingTiming::default(),
            sweep_durations_s: vec![30.0, 60.0],
            excluded_when_calibrated: vec!["S4".into()],
            shuffle_labels: false,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subjects.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "leave-one-subject-out needs at least 2 subjects, got {}",
                self.subjects.len()
            )));
        }
        for (i, s) in self.subjects.iter().enumerate() {
            if self.subjects[..i].contains(s) {
                return Err(Error::InvalidArgument(format!(
                    "subject `{s}` listed twice"
                )));
            }
        }
        if self.classifiers.is_empty() || self.conditions.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one classifier and one condition".into(),
            ));
        }
        if self.conditions.iter().any(Condition::needs_rest) {
            if let Some(s) = self
                .subjects
                .iter()
                .find(|s| self.excluded_when_calibrated.contains(s))
            {
                return Err(Error::InvalidArgument(format!(
                    "subject `{s}` cannot be evaluated with resting calibration"
                )));
            }
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        if !(self.eps_div > 0.0) {
            return Err(Error::InvalidArgument("eps_div must be positive".into()));
        }
        Ok(())
    }
}

// ── per-subject preparation ─────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub rest: RestMode,
    pub duration_s: Option<f64>,
    pub vector: CalibrationVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RestingIssue {
    Missing,
    Invalid(String),
}

/// Everything a fold needs from one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectFeatures {
    pub subject_id: String,
    pub channels: Vec<String>,
    pub task: Vec<FeatureVector>,
    pub labels: Vec<MiClass>,
    pub calibrations: Vec<CalibrationEntry>,
    pub resting_issue: Option<RestingIssue>,
}

impl SubjectFeatures {
    pub fn calibration(&self, cond: &Condition) -> Result<&CalibrationVector> {
        match &self.resting_issue {
            Some(RestingIssue::Missing) => {
                return Err(Error::NoRestingBlock(self.subject_id.clone()))
            }
            Some(RestingIssue::Invalid(msg)) => return Err(Error::InvalidRecording(msg.clone())),
            None => {}
        }
        self.calibrations
            .iter()
            .find(|c| c.rest == cond.rest && c.duration_s == cond.duration_s)
            .map(|c| &c.vector)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "subject {} has no calibration for `{}`",
                    self.subject_id,
                    cond.label()
                ))
            })
    }

    /// Task vectors under `cond` and the number of guarded divisions.
    pub fn vectors(&self, cond: &Condition, eps_div: f64) -> Result<(Vec<FeatureVector>, usize)> {
        if !cond.needs_rest() {
            return Ok((self.task.clone(), 0));
        }
        let rest = self.calibration(cond)?;
        let mut guarded = 0;
        let mut out = Vec::with_capacity(self.task.len());
        for t in &self.task {
            let (v, g) = calibrate(t, rest, eps_div)?;
            guarded += g;
            out.push(v);
        }
        Ok((out, guarded))
    }

    pub fn matrix(&self, cond: &Condition, eps_div: f64) -> Result<(FeatureMatrix, usize)> {
        let (vectors, guarded) = self.vectors(cond, eps_div)?;
        Ok((
            FeatureMatrix::from_vectors(&vectors, &self.labels, &self.subject_id)?,
            guarded,
        ))
    }
}

fn pipeline_channels(config: &ExperimentConfig, rec: &ContinuousRecording) -> Result<Vec<String>> {
    let chosen = config
        .channels
        .clone()
        .unwrap_or_else(|| rec.layout.selected.clone());
    if let Some(bad) = chosen.iter().find(|c| rec.layout.index_of(c).is_none()) {
        return Err(Error::UnknownChannel(bad.clone()));
    }
    Ok(chosen)
}

/// Rows of `block` listed in `names`, looked up in `all`.
fn pick_rows(block: Vec<Vec<f64>>, all: &[String], names: &[String]) -> Vec<Vec<f64>> {
    if all == names {
        return block;
    }
    names
        .iter()
        .map(|n| block[all.iter().position(|a| a == n).expect("validated channel")].clone())
        .collect()
}

/// Preprocesses one recording. `stream` seeds the optional label shuffle.
pub fn prepare_subject(
    config: &ExperimentConfig,
    rec: &ContinuousRecording,
    stream: u64,
) -> Result<SubjectFeatures> {
    let channels = pipeline_channels(config, rec)?;
    let fs = rec.sample_rate;
    let source = match config.car_scope {
        CarScope::Selected => rec.select_channels(&channels)?,
        CarScope::All => rec.clone(),
    };
    let source_names = source.layout.names.clone();

    let filter = design_butterworth_bandpass(&BandpassSpec {
        low_hz: config.band_hz.0,
        high_hz: config.band_hz.1,
        order: config.filter_order,
        sample_rate_hz: fs,
    })?;
    let epochs = extract_epochs(&source, config.epoch_window, &MiClass::ALL)?;
    let mut task = Vec::with_capacity(epochs.len());
    for trial in &epochs.trials {
        let referenced = pick_rows(car_filter(trial)?, &source_names, &channels);
        let filtered = if config.zero_phase {
            apply_iir_zero_phase(&filter, &referenced)?
        } else {
            apply_iir(&filter, &referenced)?
        };
        task.push(trial_features(&filtered, &channels, fs, &config.features)?);
    }
    let mut labels = epochs.labels;
    if config.shuffle_labels {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        labels.shuffle(&mut rng);
    }

    let mut calibrations = Vec::new();
    let mut resting_issue = None;
    let mut wanted: Vec<Condition> = Vec::new();
    for c in &config.conditions {
        if c.needs_rest() && !wanted.contains(c) {
            wanted.push(*c);
        }
    }
    if !wanted.is_empty() {
        match segment_resting_with(&source, &config.resting) {
            Err(Error::NoRestingBlock(_)) => resting_issue = Some(RestingIssue::Missing),
            Err(e) => resting_issue = Some(RestingIssue::Invalid(e.to_string())),
            Ok(segments) => {
                for cond in wanted {
                    let mode = cond.rest.eye_mode().expect("calibrated condition");
                    let full = segments.get(mode);
                    let seg = match cond.duration_s {
                        Some(d) => truncate_segment(full, d)?,
                        None => full.clone(),
                    };
                    let banded = seg
                        .to_f64()
                        .iter()
                        .map(|ch| fft_bandpass(ch, fs, config.band_hz.0, config.band_hz.1))
                        .collect::<Result<Vec<_>>>()?;
                    let referenced = pick_rows(car_filter(&banded)?, &source_names, &channels);
                    let vector =
                        resting_features(&referenced, &channels, fs, mode, &config.features)?;
                    calibrations.push(CalibrationEntry {
                        rest: cond.rest,
                        duration_s: cond.duration_s,
                        vector,
                    });
                }
            }
        }
    }

    Ok(SubjectFeatures {
        subject_id: rec.subject_id.clone(),
        channels,
        task,
        labels,
        calibrations,
        resting_issue,
    })
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("RESTCAL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads.map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build()) {
        Some(Ok(pool)) => pool.install(f),
        _ => f(),
    }
}

/// Loads and prepares every configured subject from `dataset_root/<id>`.
pub fn load_subjects(config: &ExperimentConfig) -> Result<Vec<SubjectFeatures>> {
    config.validate()?;
    with_pool(|| {
        config
            .subjects
            .par_iter()
            .enumerate()
            .map(|(i, id)| {
                let rec = load_recording(config.dataset_root.join(id))?;
                if rec.subject_id != *id {
                    return Err(Error::InvalidRecording(format!(
                        "archive `{id}` holds subject `{}`",
                        rec.subject_id
                    )));
                }
                prepare_subject(config, &rec, i as u64 + 1)
            })
            .collect()
    })
}

// ── folds ───────────────────────────────────────────────

/// Rows from the held-out subject seen by each fitting step. All zero for
/// a leak-free fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LeakageAudit {
    pub selection_rows_from_test: usize,
    pub normalization_rows_from_test: usize,
    pub training_rows_from_test: usize,
}

impl LeakageAudit {
    pub fn is_clean(&self) -> bool {
        *self == LeakageAudit::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub iterations: usize,
    pub converged: bool,
    pub duality_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub held_out: String,
    pub condition: Condition,
    pub condition_label: String,
    pub classifier: ClassifierKind,
    pub accuracy: f64,
    pub n_train_trials: usize,
    pub n_test_trials: usize,
    pub selection: SelectionReport,
    pub guarded_divisions: usize,
    pub audit: LeakageAudit,
    pub solver: Option<SolverInfo>,
}

fn count_group(m: &FeatureMatrix, group: &str) -> usize {
    m.groups.iter().filter(|g| *g == group).count()
}

/// Trains on every subject except `held_out` and tests on it, once per
/// configured classifier.
pub fn run_fold(
    config: &ExperimentConfig,
    subjects: &[SubjectFeatures],
    held_out: &str,
    cond: &Condition,
) -> Result<Vec<FoldResult>> {
    run_fold_inner(config, subjects, held_out, cond).map_err(|e| Error::Fold {
        held_out: held_out.to_string(),
        condition: cond.label(),
        source: Box::new(e),
    })
}

fn run_fold_inner(
    config: &ExperimentConfig,
    subjects: &[SubjectFeatures],
    held_out: &str,
    cond: &Condition,
) -> Result<Vec<FoldResult>> {
    if subjects.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "leave-one-subject-out needs at least 2 subjects, got {}",
            subjects.len()
        )));
    }
    let mut test = None;
    let mut train_m: Option<FeatureMatrix> = None;
    let mut guarded = 0;
    for s in subjects {
        let (m, g) = s.matrix(cond, config.eps_div)?;
        guarded += g;
        if s.subject_id == held_out {
            test = Some(m);
        } else {
            match train_m.as_mut() {
                Some(t) => t.append(m)?,
                None => train_m = Some(m),
            }
        }
    }
    let test = test.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "held-out subject `{held_out}` is not in the cohort"
        ))
    })?;
    let train_m = train_m.expect("at least one training subject");

    let scores = fdr_scores(&train_m, config.eps_fdr)?;
    let mask = select_top_k(&scores, config.k)?;
    let selection = SelectionReport::new(&mask, &train_m.column_names);
    let train_sel = apply_mask(&mask, &train_m)?;
    let test_sel = apply_mask(&mask, &test)?;
    let stats = fit_normalizer(&train_sel, config.std_floor)?;
    let train_n = apply_normalizer(&stats, &train_sel)?;
    let test_n = apply_normalizer(&stats, &test_sel)?;
    let audit = LeakageAudit {
        selection_rows_from_test: count_group(&train_m, held_out),
        normalization_rows_from_test: count_group(&train_sel, held_out),
        training_rows_from_test: count_group(&train_n, held_out),
    };

    let mut out = Vec::with_capacity(config.classifiers.len());
    for &kind in &config.classifiers {
        let model = train(kind, &train_n, &config.classifier_params)?;
        let pred = model.predict(&test_n)?;
        let solver = match &model {
            Model::Svm(m) => Some(SolverInfo {
                iterations: m.iterations,
                converged: m.converged,
                duality_gap: m.duality_gap,
            }),
            _ => None,
        };
        out.push(FoldResult {
            held_out: held_out.to_string(),
            condition: *cond,
            condition_label: cond.label(),
            classifier: kind,
            accuracy: accuracy(&pred.labels, &test_n.labels)?,
            n_train_trials: train_n.n_rows(),
            n_test_trials: test_n.n_rows(),
            selection: selection.clone(),
            guarded_divisions: guarded,
            audit,
            solver,
        });
    }
    Ok(out)
}

// ── experiments and reporting ───────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub classifier: ClassifierKind,
    pub condition: String,
    /// Fractions, in subject order.
    pub accuracies: Vec<f64>,
    pub mean: f64,
}

/// Accuracy per subject for each classifier and condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub subjects: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl ResultsTable {
    pub fn row(&self, classifier: ClassifierKind, condition: &str) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.classifier == classifier && r.condition == condition)
    }

    /// Percentages with two decimals; the mean is taken before rounding.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["classifier".to_string(), "condition".to_string()];
        header.extend(self.subjects.iter().cloned());
        header.push("mean".into());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.classifier.as_str().to_string(), r.condition.clone()];
            rec.extend(r.accuracies.iter().map(|a| format!("{:.2}", a * 100.0)));
            rec.push(format!("{:.2}", r.mean * 100.0));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub table: ResultsTable,
    pub folds: Vec<FoldResult>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("<report>", e))
    }

    pub fn fold(
        &self,
        classifier: ClassifierKind,
        condition: &str,
        held_out: &str,
    ) -> Option<&FoldResult> {
        self.folds.iter().find(|f| {
            f.classifier == classifier && f.condition_label == condition && f.held_out == held_out
        })
    }
}

/// Runs every configured condition over already prepared subjects. Folds are
/// ordered by condition, classifier, then subject, as configured.
pub fn run_prepared(
    config: &ExperimentConfig,
    subjects: &[SubjectFeatures],
) -> Result<ExperimentReport> {
    config.validate()?;
    let ids: Vec<&str> = subjects.iter().map(|s| s.subject_id.as_str()).collect();
    let jobs: Vec<(usize, &str)> = (0..config.conditions.len())
        .flat_map(|c| ids.iter().map(move |&id| (c, id)))
        .collect();
    let per_job: Vec<Vec<FoldResult>> = with_pool(|| {
        jobs.par_iter()
            .map(|&(c, id)| run_fold(config, subjects, id, &config.conditions[c]))
            .collect::<Result<_>>()
    })?;

    let mut folds = Vec::with_capacity(per_job.len() * config.classifiers.len());
    let mut rows = Vec::new();
    for (c, cond) in config.conditions.iter().enumerate() {
        for (k, &kind) in config.classifiers.iter().enumerate() {
            let mut accuracies = Vec::with_capacity(ids.len());
            for s in 0..ids.len() {
                let f = per_job[c * ids.len() + s][k].clone();
                accuracies.push(f.accuracy);
                folds.push(f);
            }
            let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
            rows.push(TableRow {
                classifier: kind,
                condition: cond.label(),
                accuracies,
                mean,
            });
        }
    }
    // classifier-major table, conditions in configured order
    rows.sort_by_key(|r| config.classifiers.iter().position(|&k| k == r.classifier));
    Ok(ExperimentReport {
        config: config.clone(),
        table: ResultsTable {
            subjects: ids.iter().map(|s| s.to_string()).collect(),
            rows,
        },
        folds,
    })
}

/// Loads the configured subjects and runs all conditions.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let subjects = load_subjects(config)?;
    run_prepared(config, &subjects)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Eye,
    Duration,
}

impl SweepKind {
    pub fn conditions(self, config: &ExperimentConfig) -> Vec<Condition> {
        match self {
            SweepKind::Eye => eye_mode_conditions(),
            SweepKind::Duration => duration_conditions(&config.sweep_durations_s),
        }
    }
}

/// `config` with its conditions replaced by those of the sweep.
pub fn sweep_config(config: &ExperimentConfig, kind: SweepKind) -> ExperimentConfig {
    ExperimentConfig {
        conditions: kind.conditions(config),
        ..config.clone()
    }
}

pub fn run_sweep(config: &ExperimentConfig, kind: SweepKind) -> Result<ExperimentReport> {
    run_experiment(&sweep_config(config, kind))
}

pub fn run_eye_mode_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_sweep(config, SweepKind::Eye)
}

pub fn run_duration_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_sweep(config, SweepKind::Duration)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn emit_results(
    report: &ExperimentReport,
    format: OutputFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        OutputFormat::Csv => report.table.to_csv_string(),
        OutputFormat::Json => report.to_json(),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `results.csv` and `results.json` into `dir`.
pub fn write_report(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    emit_results(report, OutputFormat::Csv, dir.join("results.csv"))?;
    emit_results(report, OutputFormat::Json, dir.join("results.json"))
}
