//! Temporal features, resting-state calibration and z-score normalization.
//!
//! Every channel contributes five values in the fixed order psd, rms, mean,
//! std, logvar; a vector is channel-major over the selected channels.
//! `std` is the population standard deviation (divide by N).

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataio::{EyeMode, MiClass};
use crate::dsp::{band_power, welch_psd, WelchParams};
use crate::error::{Error, Result};

pub const FEATURES_PER_CHANNEL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Psd,
    Rms,
    Mean,
    Std,
    LogVar,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; FEATURES_PER_CHANNEL] = [
        FeatureKind::Psd,
        FeatureKind::Rms,
        FeatureKind::Mean,
        FeatureKind::Std,
        FeatureKind::LogVar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Psd => "psd",
            FeatureKind::Rms => "rms",
            FeatureKind::Mean => "mean",
            FeatureKind::Std => "std",
            FeatureKind::LogVar => "logvar",
        }
    }

    /// Kind of the feature at position `index` of a channel-major vector.
    pub fn at(index: usize) -> FeatureKind {
        Self::ALL[index % FEATURES_PER_CHANNEL]
    }

    /// Amplitude homogeneity degree; `None` for logvar.
    pub fn homogeneity(self) -> Option<i32> {
        match self {
            FeatureKind::Psd => Some(2),
            FeatureKind::Rms | FeatureKind::Mean | FeatureKind::Std => Some(1),
            FeatureKind::LogVar => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub welch: WelchParams,
    /// Band integrated for the psd feature.
    pub psd_band_hz: (f64, f64),
    /// Added to the variance before taking the log.
    pub eps_var: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            welch: WelchParams::default(),
            psd_band_hz: (8.0, 30.0),
            eps_var: 1e-20,
        }
    }
}

/// `[psd, rms, mean, std, logvar]` of one channel.
///
/// Signals shorter than the Welch segment are estimated with a single
/// segment spanning the whole signal.
pub fn channel_features(x: &[f64], sample_rate: f64, params: &FeatureParams) -> Result<[f64; 5]> {
    let n = x.len();
    if n < 2 {
        return Err(Error::SignalTooShort(format!(
            "features need at least 2 samples, got {n}"
        )));
    }
    let welch = WelchParams {
        segment_len: params.welch.segment_len.min(n),
        ..params.welch
    };
    let spec = welch_psd(x, sample_rate, &welch)?;
    let psd = band_power(&spec, params.psd_band_hz.0, params.psd_band_hz.1)?;

    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
    let std = var.sqrt();
    let logvar = (var + params.eps_var).ln();
    Ok([psd, rms, mean, std, logvar])
}

pub fn feature_names<S: AsRef<str>>(channels: &[S]) -> Vec<String> {
    channels
        .iter()
        .flat_map(|c| {
            FeatureKind::ALL
                .iter()
                .map(move |k| format!("{}_{}", c.as_ref(), k.as_str()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub names: Vec<String>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn block_features<S: AsRef<str>>(
    block: &[Vec<f64>],
    channels: &[S],
    sample_rate: f64,
    params: &FeatureParams,
) -> Result<FeatureVector> {
    if block.len() != channels.len() {
        return Err(Error::LayoutMismatch(format!(
            "{} channel rows for a layout of {}",
            block.len(),
            channels.len()
        )));
    }
    let mut values = Vec::with_capacity(block.len() * FEATURES_PER_CHANNEL);
    for ch in block {
        values.extend(channel_features(ch, sample_rate, params)?);
    }
    Ok(FeatureVector {
        values,
        names: feature_names(channels),
    })
}

/// Features of one preprocessed epoch (`channels x samples`).
pub fn trial_features<S: AsRef<str>>(
    epoch: &[Vec<f64>],
    channels: &[S],
    sample_rate: f64,
    params: &FeatureParams,
) -> Result<FeatureVector> {
    block_features(epoch, channels, sample_rate, params)
}

/// Resting-state features used as the division denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationVector {
    pub values: Vec<f64>,
    pub names: Vec<String>,
    pub eye_mode: EyeMode,
    pub duration_s: f64,
}

/// Features over a whole preprocessed resting segment.
pub fn resting_features<S: AsRef<str>>(
    segment: &[Vec<f64>],
    channels: &[S],
    sample_rate: f64,
    eye_mode: EyeMode,
    params: &FeatureParams,
) -> Result<CalibrationVector> {
    let n = segment.first().map_or(0, Vec::len);
    let duration_s = n as f64 / sample_rate;
    if duration_s < 2.0 {
        return Err(Error::SignalTooShort(format!(
            "resting segment lasts {duration_s} s, need at least 2 s"
        )));
    }
    let fv = block_features(segment, channels, sample_rate, params)?;
    Ok(CalibrationVector {
        values: fv.values,
        names: fv.names,
        eye_mode,
        duration_s,
    })
}

/// Element-wise `task / rest`. Denominators with magnitude below `eps_div`
/// are replaced by `eps_div` carrying the denominator's sign (zero counts
/// as positive). Returns the calibrated vector and how many entries were
/// guarded.
pub fn calibrate(
    task: &FeatureVector,
    rest: &CalibrationVector,
    eps_div: f64,
) -> Result<(FeatureVector, usize)> {
    if task.names != rest.names {
        return Err(Error::LayoutMismatch(format!(
            "task vector has {} features, resting vector {} (or names differ)",
            task.len(),
            rest.values.len()
        )));
    }
    let mut guarded = 0;
    let values = task
        .values
        .iter()
        .zip(&rest.values)
        .map(|(&t, &r)| {
            if r.abs() >= eps_div {
                t / r
            } else {
                guarded += 1;
                t / (if r < 0.0 { -eps_div } else { eps_div })
            }
        })
        .collect();
    Ok((
        FeatureVector {
            values,
            names: task.names.clone(),
        },
        guarded,
    ))
}

/// Trials x features with labels and the subject each row came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<MiClass>,
    pub column_names: Vec<String>,
    pub groups: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<MiClass>,
        column_names: Vec<String>,
        groups: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != rows.len() || groups.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len().min(groups.len()),
            });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != column_names.len()) {
            return Err(Error::DimensionMismatch {
                expected: column_names.len(),
                found: r.len(),
            });
        }
        for (i, n) in column_names.iter().enumerate() {
            if column_names[..i].contains(n) {
                return Err(Error::LayoutMismatch(format!("duplicate column `{n}`")));
            }
        }
        Ok(Self {
            rows,
            labels,
            column_names,
            groups,
        })
    }

    /// Stacks vectors of one subject.
    pub fn from_vectors(
        vectors: &[FeatureVector],
        labels: &[MiClass],
        group: &str,
    ) -> Result<Self> {
        let names = vectors.first().map(|v| v.names.clone()).unwrap_or_default();
        if let Some(v) = vectors.iter().find(|v| v.names != names) {
            return Err(Error::LayoutMismatch(format!(
                "vector with {} features in a matrix of {}",
                v.len(),
                names.len()
            )));
        }
        Self::new(
            vectors.iter().map(|v| v.values.clone()).collect(),
            labels.to_vec(),
            names,
            vec![group.to_string(); vectors.len()],
        )
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Appends the rows of `other`; column names must agree.
    pub fn append(&mut self, other: FeatureMatrix) -> Result<()> {
        if self.rows.is_empty() && self.column_names.is_empty() {
            *self = other;
            return Ok(());
        }
        if other.column_names != self.column_names {
            return Err(Error::LayoutMismatch("column names differ".into()));
        }
        self.rows.extend(other.rows);
        self.labels.extend(other.labels);
        self.groups.extend(other.groups);
        Ok(())
    }

    /// Header: feature names, `label`, `subject_id`; one row per trial.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("CSV write failed: {e}"));
        let mut header = self.column_names.clone();
        header.push("label".into());
        header.push("subject_id".into());
        w.write_record(&header).map_err(csv_err)?;
        for ((row, label), group) in self.rows.iter().zip(&self.labels).zip(&self.groups) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(label.as_str().into());
            rec.push(group.clone());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Per-column z-score statistics estimated on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns whose standard deviation was raised to the floor.
    pub floored: Vec<bool>,
}

pub const DEFAULT_STD_FLOOR: f64 = 1e-12;

pub fn fit_normalizer(train: &FeatureMatrix, std_floor: f64) -> Result<NormalizationStats> {
    let n = train.n_rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "normalizer needs at least 2 rows, got {n}"
        )));
    }
    let d = train.n_cols();
    let mut mean = vec![0.0; d];
    for r in &train.rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for r in &train.rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let mut floored = vec![false; d];
    let std = var
        .iter()
        .zip(&mut floored)
        .map(|(s, f)| {
            let sd = (s / n as f64).sqrt();
            if sd < std_floor {
                *f = true;
                std_floor
            } else {
                sd
            }
        })
        .collect();
    Ok(NormalizationStats { mean, std, floored })
}

pub fn apply_normalizer(stats: &NormalizationStats, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    if m.n_cols() != stats.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: stats.mean.len(),
            found: m.n_cols(),
        });
    }
    let mut out = m.clone();
    for r in &mut out.rows {
        for ((v, mu), sd) in r.iter_mut().zip(&stats.mean).zip(&stats.std) {
            *v = (*v - mu) / sd;
        }
    }
    Ok(out)
}

pub fn invert_normalizer(stats: &NormalizationStats, m: &FeatureMatrix) -> Result<FeatureMatrix> {
    if m.n_cols() != stats.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: stats.mean.len(),
            found: m.n_cols(),
        });
    }
    let mut out = m.clone();
    for r in &mut out.rows {
        for ((v, mu), sd) in r.iter_mut().zip(&stats.mean).zip(&stats.std) {
            *v = *v * sd + mu;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    const EPS_VAR: f64 = 1e-20;

    fn chans(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("E{i}")).collect()
    }

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn constant_signal_features() {
        let f = channel_features(&[3.0; 1000], 250.0, &FeatureParams::default()).unwrap();
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 3.0);
        assert_eq!(f[2], 3.0);
        assert_eq!(f[3], 0.0);
        assert_eq!(f[4], EPS_VAR.ln());
    }

    #[test]
    fn zero_signal_features() {
        let f = channel_features(&[0.0; 1000], 250.0, &FeatureParams::default()).unwrap();
        assert_eq!(f, [0.0, 0.0, 0.0, 0.0, EPS_VAR.ln()]);
        assert!(channel_features(&[1.0], 250.0, &FeatureParams::default()).is_err());
    }

    #[test]
    fn white_noise_statistics() {
        let x = noise(17, 1000);
        let f = channel_features(&x, 250.0, &FeatureParams::default()).unwrap();
        // direct recomputation
        let mean = x.iter().sum::<f64>() / 1000.0;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 1000.0;
        assert!((f[3] - var.sqrt()).abs() < 1e-12);
        assert!((0.9..=1.1).contains(&f[3]));
        assert!((f[1] - f[3]).abs() < 0.01);
        assert!((f[4] - var.ln()).abs() < 1e-12);
    }

    #[test]
    fn trial_vector_layout() {
        let epoch = vec![vec![0.0; 1000]; 11];
        let v = trial_features(&epoch, &chans(11), 250.0, &FeatureParams::default()).unwrap();
        assert_eq!(v.len(), 55);
        assert_eq!(v.names[0], "E0_psd");
        assert_eq!(v.names[54], "E10_logvar");
        for block in v.values.chunks(5) {
            assert_eq!(block, [0.0, 0.0, 0.0, 0.0, EPS_VAR.ln()]);
        }
        assert!(matches!(
            trial_features(&epoch, &chans(10), 250.0, &FeatureParams::default()),
            Err(Error::LayoutMismatch(_))
        ));
    }

    #[test]
    fn permuting_channels_permutes_blocks() {
        let epoch: Vec<Vec<f64>> = (0..3).map(|c| noise(c, 500)).collect();
        let p = FeatureParams::default();
        let a = trial_features(&epoch, &chans(3), 250.0, &p).unwrap();
        let swapped = vec![epoch[2].clone(), epoch[1].clone(), epoch[0].clone()];
        let b = trial_features(&swapped, &chans(3), 250.0, &p).unwrap();
        assert_eq!(a.values[0..5], b.values[10..15]);
        assert_eq!(a.values[5..10], b.values[5..10]);
    }

    #[test]
    fn scaling_an_epoch_scales_features_by_degree() {
        let epoch: Vec<Vec<f64>> = (0..2).map(|c| noise(40 + c, 1000)).collect();
        let g = 7.5;
        let scaled: Vec<Vec<f64>> = epoch
            .iter()
            .map(|c| c.iter().map(|v| v * g).collect())
            .collect();
        let p = FeatureParams::default();
        let a = trial_features(&epoch, &chans(2), 250.0, &p).unwrap();
        let b = trial_features(&scaled, &chans(2), 250.0, &p).unwrap();
        for (i, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
            match FeatureKind::at(i).homogeneity() {
                Some(deg) => assert!((y / (x * g.powi(deg)) - 1.0).abs() < 1e-9),
                None => assert!((y - x - 2.0 * g.ln()).abs() < 1e-9),
            }
        }
    }

    #[test]
    fn resting_features_reuse_trial_path() {
        let seg: Vec<Vec<f64>> = (0..2).map(|c| noise(c, 1000)).collect();
        let p = FeatureParams::default();
        let cal = resting_features(&seg, &chans(2), 250.0, EyeMode::Open, &p).unwrap();
        let tv = trial_features(&seg, &chans(2), 250.0, &p).unwrap();
        assert_eq!(cal.values, tv.values);
        assert_eq!(cal.duration_s, 4.0);
        assert!(resting_features(&[vec![0.0; 400]], &chans(1), 250.0, EyeMode::Open, &p).is_err());
    }

    #[test]
    fn resting_prefix_psd_is_stationary() {
        let x = noise(99, 30_000);
        let p = FeatureParams::default();
        let full = resting_features(
            std::slice::from_ref(&x),
            &chans(1),
            250.0,
            EyeMode::Open,
            &p,
        )
        .unwrap();
        let head =
            resting_features(&[x[..7500].to_vec()], &chans(1), 250.0, EyeMode::Open, &p).unwrap();
        assert!((head.values[0] / full.values[0] - 1.0).abs() < 0.2);
    }

    fn rest_from(values: Vec<f64>) -> CalibrationVector {
        let n = values.len();
        CalibrationVector {
            names: (0..n).map(|i| format!("f{i}")).collect(),
            values,
            eye_mode: EyeMode::Open,
            duration_s: 120.0,
        }
    }

    fn task_from(values: Vec<f64>) -> FeatureVector {
        let n = values.len();
        FeatureVector {
            names: (0..n).map(|i| format!("f{i}")).collect(),
            values,
        }
    }

    #[test]
    fn self_division_gives_ones() {
        let v = vec![2.0, -3.0, 0.5];
        let (out, guarded) = calibrate(&task_from(v.clone()), &rest_from(v), 1e-12).unwrap();
        assert_eq!(out.values, vec![1.0; 3]);
        assert_eq!(guarded, 0);
    }

    #[test]
    fn zero_task_stays_zero() {
        let (out, _) = calibrate(
            &task_from(vec![0.0; 3]),
            &rest_from(vec![1.0, -2.0, 5.0]),
            1e-12,
        )
        .unwrap();
        assert!(out.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn guard_engages_on_tiny_denominators() {
        let (out, guarded) = calibrate(
            &task_from(vec![2.0, 2.0, 2.0]),
            &rest_from(vec![1e-30, -1e-30, 0.0]),
            1e-12,
        )
        .unwrap();
        assert_eq!(guarded, 3);
        assert!((out.values[0] - 2e12).abs() < 1.0);
        assert!((out.values[1] + 2e12).abs() < 1.0);
        assert!((out.values[2] - 2e12).abs() < 1.0);
        assert!(calibrate(&task_from(vec![1.0]), &rest_from(vec![1.0, 1.0]), 1e-12).is_err());
    }

    fn matrix(cols: Vec<Vec<f64>>) -> FeatureMatrix {
        let n = cols[0].len();
        let rows = (0..n)
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect();
        FeatureMatrix::new(
            rows,
            vec![MiClass::Left; n],
            (0..cols.len()).map(|j| format!("c{j}")).collect(),
            vec!["S1".into(); n],
        )
        .unwrap()
    }

    #[test]
    fn two_point_column_normalizes_to_minus_one_one() {
        let m = matrix(vec![vec![1.0, 3.0]]);
        let s = fit_normalizer(&m, DEFAULT_STD_FLOOR).unwrap();
        assert_eq!((s.mean[0], s.std[0]), (2.0, 1.0));
        assert_eq!(apply_normalizer(&s, &m).unwrap().column(0), vec![-1.0, 1.0]);
    }

    #[test]
    fn constant_column_is_floored_to_zeros() {
        let m = matrix(vec![vec![4.0; 5]]);
        let s = fit_normalizer(&m, DEFAULT_STD_FLOOR).unwrap();
        assert!(s.floored[0]);
        assert_eq!(s.std[0], DEFAULT_STD_FLOOR);
        assert!(apply_normalizer(&s, &m)
            .unwrap()
            .column(0)
            .iter()
            .all(|v| *v == 0.0));
        assert!(fit_normalizer(&matrix(vec![vec![1.0]]), DEFAULT_STD_FLOOR).is_err());
    }

    #[test]
    fn normalizer_round_trip_and_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let col = |rng: &mut ChaCha8Rng, n| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-100.0..400.0)).collect()
        };
        let train = matrix((0..4).map(|_| col(&mut rng, 50)).collect());
        let test = matrix((0..4).map(|_| col(&mut rng, 20)).collect());
        let s = fit_normalizer(&train, DEFAULT_STD_FLOOR).unwrap();
        let z = apply_normalizer(&s, &train).unwrap();
        for j in 0..4 {
            let c = z.column(j);
            let m = c.iter().sum::<f64>() / c.len() as f64;
            let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / c.len() as f64).sqrt();
            assert!(m.abs() < 1e-9);
            assert!((sd - 1.0).abs() < 1e-6);
        }
        let back = invert_normalizer(&s, &apply_normalizer(&s, &test).unwrap()).unwrap();
        for (a, b) in back.rows.iter().flatten().zip(test.rows.iter().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn matrix_rejects_duplicate_columns() {
        let err = FeatureMatrix::new(
            vec![vec![1.0, 2.0]],
            vec![MiClass::Left],
            vec!["a".into(), "a".into()],
            vec!["S1".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::LayoutMismatch(_)));
    }
}
