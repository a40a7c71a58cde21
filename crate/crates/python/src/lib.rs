//! Python bindings for the resting-state calibration pipeline.
//!
//! Signals cross the boundary as nested lists (`channels x samples`), labels
//! as the strings `"left"` / `"right"`. Experiment configs, synthetic specs
//! and reports cross as JSON strings with the same schema the CLI reads.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use restcal_core::classify::{self as cls, Classifier, ClassifierKind, ClassifierParams};
use restcal_core::dataio::{self, EyeMode, MiClass};
use restcal_core::dsp::{self, BandpassSpec, FilterRealization, WelchParams};
use restcal_core::features::{
    self, CalibrationVector, FeatureMatrix, FeatureParams, FeatureVector,
};
use restcal_core::harness::{self, ExperimentConfig, SweepKind};
use restcal_core::selection;
use restcal_core::synth::{self, SynthSpec};
use restcal_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::MissingManifest(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_label(s: &str) -> PyResult<MiClass> {
    match s {
        "left" => Ok(MiClass::Left),
        "right" => Ok(MiClass::Right),
        _ => Err(PyValueError::new_err(format!(
            "label must be 'left' or 'right', got {s:?}"
        ))),
    }
}

fn parse_eye_mode(s: &str) -> PyResult<EyeMode> {
    match s {
        "open" => Ok(EyeMode::Open),
        "closed" => Ok(EyeMode::Closed),
        "movement" => Ok(EyeMode::Movement),
        _ => Err(PyValueError::new_err(format!("unknown eye mode {s:?}"))),
    }
}

fn matrix(rows: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> PyResult<FeatureMatrix> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let labels = match labels {
        Some(l) => l
            .iter()
            .map(|s| parse_label(s))
            .collect::<PyResult<Vec<_>>>()?,
        // prediction only: labels are never read
        None => vec![MiClass::Left; n],
    };
    FeatureMatrix::new(
        rows,
        labels,
        (0..d).map(|j| format!("f{j}")).collect(),
        vec![String::new(); n],
    )
    .map_err(to_py)
}

// ── signal processing ───────────────────────────────────

/// Subtracts the cross-channel mean from every sample.
#[pyfunction]
fn car_filter(block: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    dsp::car_filter(&block).map_err(to_py)
}

/// Keeps FFT bins whose frequency lies in `[low_hz, high_hz]`.
#[pyfunction]
fn fft_bandpass(x: Vec<f64>, sample_rate: f64, low_hz: f64, high_hz: f64) -> PyResult<Vec<f64>> {
    dsp::fft_bandpass(&x, sample_rate, low_hz, high_hz).map_err(to_py)
}

/// One-sided Welch density. Returns `(frequencies, density)`.
#[pyfunction]
#[pyo3(signature = (x, sample_rate, segment_len=250, overlap=0.5))]
fn welch_psd(
    x: Vec<f64>,
    sample_rate: f64,
    segment_len: usize,
    overlap: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let params = WelchParams {
        segment_len,
        overlap,
        ..Default::default()
    };
    let s = dsp::welch_psd(&x, sample_rate, &params).map_err(to_py)?;
    Ok((s.frequencies, s.density))
}

/// Welch band power of `x` integrated over `[low_hz, high_hz]`.
#[pyfunction]
#[pyo3(signature = (x, sample_rate, low_hz=8.0, high_hz=30.0))]
fn band_power(x: Vec<f64>, sample_rate: f64, low_hz: f64, high_hz: f64) -> PyResult<f64> {
    let s = dsp::welch_psd(&x, sample_rate, &WelchParams::default()).map_err(to_py)?;
    dsp::band_power(&s, low_hz, high_hz).map_err(to_py)
}

/// Butterworth band-pass as cascaded second-order sections.
#[pyclass(name = "BandpassFilter", frozen)]
struct PyBandpass {
    inner: FilterRealization,
}

#[pymethods]
impl PyBandpass {
    #[new]
    #[pyo3(signature = (low_hz=8.0, high_hz=30.0, order=3, sample_rate=250.0))]
    fn new(low_hz: f64, high_hz: f64, order: usize, sample_rate: f64) -> PyResult<Self> {
        let spec = BandpassSpec {
            low_hz,
            high_hz,
            order,
            sample_rate_hz: sample_rate,
        };
        let inner = dsp::design_butterworth_bandpass(&spec).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn magnitude(&self, freq_hz: f64) -> f64 {
        self.inner.magnitude(freq_hz)
    }

    fn is_stable(&self) -> bool {
        self.inner.is_stable()
    }

    /// `[(b0, b1, b2, a0, a1, a2), ...]`
    fn sections(&self) -> Vec<(f64, f64, f64, f64, f64, f64)> {
        self.inner
            .sections
            .iter()
            .map(|s| (s.b[0], s.b[1], s.b[2], s.a[0], s.a[1], s.a[2]))
            .collect()
    }

    /// Causal filtering of every channel, or forward-backward when `zero_phase`.
    #[pyo3(signature = (block, zero_phase=false))]
    fn apply(&self, block: Vec<Vec<f64>>, zero_phase: bool) -> PyResult<Vec<Vec<f64>>> {
        if zero_phase {
            dsp::apply_iir_zero_phase(&self.inner, &block).map_err(to_py)
        } else {
            dsp::apply_iir(&self.inner, &block).map_err(to_py)
        }
    }
}

// ── features and selection ──────────────────────────────

/// `[psd, rms, mean, std, logvar]` of one channel.
#[pyfunction]
#[pyo3(signature = (x, sample_rate=250.0))]
fn channel_features(x: Vec<f64>, sample_rate: f64) -> PyResult<Vec<f64>> {
    features::channel_features(&x, sample_rate, &FeatureParams::default())
        .map(|f| f.to_vec())
        .map_err(to_py)
}

/// Channel-major feature vector of a block and its column names.
#[pyfunction]
#[pyo3(signature = (block, channels, sample_rate=250.0))]
fn block_features(
    block: Vec<Vec<f64>>,
    channels: Vec<String>,
    sample_rate: f64,
) -> PyResult<(Vec<f64>, Vec<String>)> {
    let fv = features::trial_features(&block, &channels, sample_rate, &FeatureParams::default())
        .map_err(to_py)?;
    Ok((fv.values, fv.names))
}

/// Element-wise `task / rest` with the sign-preserving guard. Returns the
/// calibrated values and the number of guarded entries.
#[pyfunction]
#[pyo3(signature = (task, rest, eps_div=1e-12))]
fn calibrate(task: Vec<f64>, rest: Vec<f64>, eps_div: f64) -> PyResult<(Vec<f64>, usize)> {
    if task.len() != rest.len() {
        return Err(PyValueError::new_err(format!(
            "task has {} features, rest {}",
            task.len(),
            rest.len()
        )));
    }
    let names: Vec<String> = (0..task.len()).map(|j| format!("f{j}")).collect();
    let t = FeatureVector {
        values: task,
        names: names.clone(),
    };
    let r = CalibrationVector {
        values: rest,
        names,
        eye_mode: EyeMode::Open,
        duration_s: 0.0,
    };
    let (v, guarded) = features::calibrate(&t, &r, eps_div).map_err(to_py)?;
    Ok((v.values, guarded))
}

#[pyfunction]
#[pyo3(signature = (rows, labels, eps_fdr=1e-12))]
fn fdr_scores(rows: Vec<Vec<f64>>, labels: Vec<String>, eps_fdr: f64) -> PyResult<Vec<f64>> {
    selection::fdr_scores(&matrix(rows, Some(labels))?, eps_fdr).map_err(to_py)
}

/// Ascending indices of the `k` best scores (ties to the lower index).
#[pyfunction]
fn select_top_k(scores: Vec<f64>, k: usize) -> PyResult<Vec<usize>> {
    selection::select_top_k(&scores, k)
        .map(|m| m.indices)
        .map_err(to_py)
}

// ── classifiers ─────────────────────────────────────────

/// A trained SVM, LDA or Gaussian naive Bayes model.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: cls::Model,
}

#[pymethods]
impl PyModel {
    /// Trains `kind` (`"svm"`, `"lda"` or `"nb"`) on labeled rows.
    #[staticmethod]
    #[pyo3(signature = (kind, rows, labels, c=1.0, lda_lambda=1e-3))]
    fn train(
        kind: &str,
        rows: Vec<Vec<f64>>,
        labels: Vec<String>,
        c: f64,
        lda_lambda: f64,
    ) -> PyResult<Self> {
        let kind = match kind {
            "svm" => ClassifierKind::Svm,
            "lda" => ClassifierKind::Lda,
            "nb" => ClassifierKind::Nb,
            _ => {
                return Err(PyValueError::new_err(format!(
                    "unknown classifier {kind:?}"
                )))
            }
        };
        let mut params = ClassifierParams::default();
        params.svm.c = c;
        params.lda.lambda = lda_lambda;
        let inner = cls::train(kind, &matrix(rows, Some(labels))?, &params).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        cls::Model::from_json(text)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().as_str()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    /// Signed scores; positive means right.
    fn decision(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .predict(&matrix(rows, None)?)
            .map_err(to_py)?
            .scores)
    }

    fn predict(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<&'static str>> {
        let p = self.inner.predict(&matrix(rows, None)?).map_err(to_py)?;
        Ok(p.labels.iter().map(|l| l.as_str()).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(kind={:?}, n_features={})",
            self.kind(),
            self.n_features()
        )
    }
}

// ── data and experiments ────────────────────────────────

type Epochs = (Vec<Vec<Vec<f64>>>, Vec<&'static str>);

/// A loaded archive.
#[pyclass(name = "Recording", frozen)]
struct PyRecording {
    inner: dataio::ContinuousRecording,
}

#[pymethods]
impl PyRecording {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        dataio::load_recording(path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn subject_id(&self) -> String {
        self.inner.subject_id.clone()
    }

    #[getter]
    fn sample_rate(&self) -> f64 {
        self.inner.sample_rate
    }

    #[getter]
    fn channels(&self) -> Vec<String> {
        self.inner.layout.names.clone()
    }

    #[getter]
    fn selected_channels(&self) -> Vec<String> {
        self.inner.layout.selected.clone()
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    fn data(&self) -> Vec<Vec<f64>> {
        self.inner.to_f64()
    }

    /// Cue-locked epochs as `(trials, labels)`.
    #[pyo3(signature = (start_s=0.0, end_s=4.0))]
    fn epochs(&self, start_s: f64, end_s: f64) -> PyResult<Epochs> {
        let window = dataio::EpochWindow::new(start_s, end_s).map_err(to_py)?;
        let set = dataio::extract_epochs(&self.inner, window, &MiClass::ALL).map_err(to_py)?;
        Ok((set.trials, set.labels.iter().map(|l| l.as_str()).collect()))
    }

    /// One resting segment (`"open"`, `"closed"` or `"movement"`), optionally
    /// truncated to its first `duration_s` seconds.
    #[pyo3(signature = (eye_mode, duration_s=None))]
    fn resting(&self, eye_mode: &str, duration_s: Option<f64>) -> PyResult<Vec<Vec<f64>>> {
        let segs = dataio::segment_resting(&self.inner).map_err(to_py)?;
        let seg = segs.get(parse_eye_mode(eye_mode)?);
        match duration_s {
            Some(d) => Ok(dataio::truncate_segment(seg, d).map_err(to_py)?.to_f64()),
            None => Ok(seg.to_f64()),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Recording(subject_id={:?}, channels={}, n_samples={})",
            self.inner.subject_id,
            self.inner.n_channels(),
            self.inner.n_samples()
        )
    }
}

/// Writes a synthetic cohort to `out_dir`; returns the subject ids.
#[pyfunction]
#[pyo3(signature = (out_dir, spec_json="{}"))]
fn generate_dataset(py: Python<'_>, out_dir: &str, spec_json: &str) -> PyResult<Vec<String>> {
    let spec: SynthSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = out_dir.to_string();
    py.detach(|| synth::generate_dataset(&spec, out))
        .map(|idx| idx.subjects)
        .map_err(to_py)
}

fn parse_config(config_json: &str) -> PyResult<ExperimentConfig> {
    serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs the configured conditions; returns the JSON report.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg = parse_config(config_json)?;
    py.detach(|| harness::run_experiment(&cfg))
        .map(|r| r.to_json())
        .map_err(to_py)
}

/// Eye-mode (`"eye"`) or resting-duration (`"duration"`) sweep; returns the
/// JSON report.
#[pyfunction]
fn run_sweep(py: Python<'_>, config_json: &str, mode: &str) -> PyResult<String> {
    let kind = match mode {
        "eye" => SweepKind::Eye,
        "duration" => SweepKind::Duration,
        _ => return Err(PyValueError::new_err(format!("unknown sweep {mode:?}"))),
    };
    let cfg = parse_config(config_json)?;
    py.detach(|| harness::run_sweep(&cfg, kind))
        .map(|r| r.to_json())
        .map_err(to_py)
}

/// CSV rendering of a JSON report's results table.
#[pyfunction]
fn report_csv(report_json: &str) -> PyResult<String> {
    harness::ExperimentReport::from_json(report_json)
        .map(|r| r.table.to_csv_string())
        .map_err(to_py)
}

#[pymodule]
fn restcal(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBandpass>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyRecording>()?;
    m.add_function(wrap_pyfunction!(car_filter, m)?)?;
    m.add_function(wrap_pyfunction!(fft_bandpass, m)?)?;
    m.add_function(wrap_pyfunction!(welch_psd, m)?)?;
    m.add_function(wrap_pyfunction!(band_power, m)?)?;
    m.add_function(wrap_pyfunction!(channel_features, m)?)?;
    m.add_function(wrap_pyfunction!(block_features, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(fdr_scores, m)?)?;
    m.add_function(wrap_pyfunction!(select_top_k, m)?)?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(report_csv, m)?)?;
    Ok(())
}
