//! Seeded synthetic motor-imagery EEG.
//!
//! Every channel is AR(2) background noise plus a mu-band sinusoid. During
//! imagery the sinusoid is attenuated over the hemisphere contralateral to
//! the imagined hand (full contrast on C3/C4, half on their sensorimotor
//! neighbours). Each subject's signals are scaled by a subject gain and a
//! per-channel gain, both shared by task and resting data, so uncalibrated
//! features are confounded by subject while resting-state division removes
//! the scaling.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataio::{
    write_recording, ChannelLayout, ContinuousRecording, Event, EventCode, MiClass, RestingOffsets,
    BCI_IV_2A_CHANNELS,
};
use crate::error::{Error, Result};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";
pub const DATASET_FILE: &str = "dataset.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_subjects: usize,
    pub trials_per_class: usize,
    pub sample_rate_hz: f64,
    pub channels: Vec<String>,
    /// `x[t] = a1 x[t-1] + a2 x[t-2] + e[t]`.
    pub ar_coeffs: [f64; 2],
    /// Innovation standard deviation of the AR process (µV).
    pub noise_std: f64,
    pub mu_freq_hz: f64,
    pub mu_amplitude: f64,
    /// Fractional amplitude drop of the contralateral mu rhythm during imagery.
    pub erd_contrast: f64,
    /// Subject gains are drawn log-uniformly from this range.
    pub gain_range: [f64; 2],
    /// Per-channel gains (per subject), log-uniform.
    pub channel_gain_range: [f64; 2],
    /// Eyes open, eyes closed, eye movement.
    pub resting_durations_s: [f64; 3],
    /// Mu amplitude multiplier during the eyes-closed segment.
    pub eyes_closed_mu_gain: f64,
    pub fixation_s: f64,
    pub imagery_s: f64,
    pub pause_s: f64,
    /// Zero-based subjects recorded without a resting block.
    pub subjects_without_rest: Vec<usize>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_subjects: 8,
            trials_per_class: 72,
            sample_rate_hz: 250.0,
            channels: BCI_IV_2A_CHANNELS.iter().map(|s| s.to_string()).collect(),
            ar_coeffs: [1.45, -0.475],
            noise_std: 1.0,
            mu_freq_hz: 10.0,
            mu_amplitude: 3.0,
            erd_contrast: 0.5,
            gain_range: [0.25, 4.0],
            channel_gain_range: [0.5, 2.0],
            resting_durations_s: [120.0, 120.0, 60.0],
            eyes_closed_mu_gain: 1.5,
            fixation_s: 2.0,
            imagery_s: 4.0,
            pause_s: 1.5,
            subjects_without_rest: Vec::new(),
            seed: 42,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_subjects == 0 || self.trials_per_class == 0 {
            return bad("need at least one subject and one trial per class".into());
        }
        if !(self.sample_rate_hz > 0.0) {
            return bad(format!(
                "sample rate {} must be positive",
                self.sample_rate_hz
            ));
        }
        if self.channels.is_empty() {
            return bad("channel list is empty".into());
        }
        let [g_min, g_max] = self.gain_range;
        let [c_min, c_max] = self.channel_gain_range;
        if !(g_min > 0.0 && g_min <= g_max && c_min > 0.0 && c_min <= c_max) {
            return bad(format!(
                "gain ranges {:?} / {:?} must be positive and ordered",
                self.gain_range, self.channel_gain_range
            ));
        }
        if !(0.0..1.0).contains(&self.erd_contrast) {
            return bad(format!("ERD contrast {} outside [0, 1)", self.erd_contrast));
        }
        let [a1, a2] = self.ar_coeffs;
        // AR(2) stationarity triangle
        if !(a2.abs() < 1.0 && a1 + a2 < 1.0 && a2 - a1 < 1.0) {
            return bad(format!(
                "AR coefficients {:?} are not stationary",
                self.ar_coeffs
            ));
        }
        if self.resting_durations_s.iter().any(|d| !(*d > 0.0)) {
            return bad("resting durations must be positive".into());
        }
        if !(self.fixation_s >= 0.0 && self.imagery_s > 0.0 && self.pause_s >= 0.0) {
            return bad("trial timing must be non-negative with positive imagery".into());
        }
        if self.mu_freq_hz >= self.sample_rate_hz / 2.0 {
            return bad("mu frequency above Nyquist".into());
        }
        Ok(())
    }

    /// `S1, S2, S3, S5, S6, ...`: the id `S4` is never generated, so a
    /// synthetic cohort lines up with the default evaluated subject list.
    pub fn subject_id(index: usize) -> String {
        let n = if index < 3 { index + 1 } else { index + 2 };
        format!("S{n}")
    }
}

/// Contralateral ERD weight of `channel` for imagery of `class`.
pub fn erd_weight(channel: &str, class: MiClass) -> f64 {
    let (core, neighbours): (&str, [&str; 4]) = match class {
        MiClass::Right => ("C3", ["FC3", "C5", "C1", "CP3"]),
        MiClass::Left => ("C4", ["FC4", "C6", "C2", "CP4"]),
    };
    if channel == core {
        1.0
    } else if neighbours.contains(&channel) {
        0.5
    } else {
        0.0
    }
}

/// True parameters behind one generated subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectGroundTruth {
    pub subject_id: String,
    pub gain: f64,
    pub channels: Vec<String>,
    pub channel_gains: Vec<f64>,
    pub band_hz: (f64, f64),
    /// Expected eyes-open band power per channel (µV²).
    pub rest_band_power: Vec<f64>,
    /// Expected band power during imagery, indexed by [`MiClass::index`].
    pub task_band_power: [Vec<f64>; 2],
    pub has_resting_block: bool,
}

/// Band power of the unit-gain AR(2) background over `[lo, hi]`.
pub fn ar2_band_power(spec: &SynthSpec, lo: f64, hi: f64) -> f64 {
    let fs = spec.sample_rate_hz;
    let [a1, a2] = spec.ar_coeffs;
    let density = |f: f64| {
        let w = 2.0 * PI * f / fs;
        let re = 1.0 - a1 * w.cos() - a2 * (2.0 * w).cos();
        let im = a1 * w.sin() + a2 * (2.0 * w).sin();
        2.0 * spec.noise_std.powi(2) / (fs * (re * re + im * im))
    };
    let steps = 4000;
    let h = (hi - lo) / steps as f64;
    (0..steps)
        .map(|i| {
            let f = lo + i as f64 * h;
            0.5 * (density(f) + density(f + h)) * h
        })
        .sum()
}

fn log_uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        // keep the stream position independent of the range
        let _: f64 = rng.random();
        return lo;
    }
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Generates one subject: a continuous recording (resting block first,
/// then the trials) and its ground truth.
pub fn generate_subject(
    spec: &SynthSpec,
    index: usize,
) -> Result<(ContinuousRecording, SubjectGroundTruth)> {
    spec.validate()?;
    let fs = spec.sample_rate_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64 + 1);

    let gain = log_uniform(&mut rng, spec.gain_range);
    let channel_gains: Vec<f64> = spec
        .channels
        .iter()
        .map(|_| log_uniform(&mut rng, spec.channel_gain_range))
        .collect();
    let phases: Vec<f64> = spec
        .channels
        .iter()
        .map(|_| rng.random::<f64>() * 2.0 * PI)
        .collect();

    let has_rest = !spec.subjects_without_rest.contains(&index);
    let to_samples = |s: f64| (s * fs).round() as usize;
    let rest_bounds = {
        let d = spec.resting_durations_s;
        [0.0, d[0], d[0] + d[1], d[0] + d[1] + d[2]].map(to_samples)
    };
    let rest_len = if has_rest { rest_bounds[3] } else { 0 };
    let lead = to_samples(2.0);
    let period = to_samples(spec.fixation_s + spec.imagery_s + spec.pause_s);
    let fixation = to_samples(spec.fixation_s);
    let imagery = to_samples(spec.imagery_s);

    let mut classes: Vec<MiClass> = MiClass::ALL
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, spec.trials_per_class))
        .collect();
    classes.shuffle(&mut rng);
    let cues: Vec<usize> = (0..classes.len())
        .map(|k| rest_len + lead + k * period + fixation)
        .collect();
    let total = rest_len + lead + classes.len() * period;

    let mut events = Vec::with_capacity(classes.len() + 4);
    if has_rest {
        let codes = [
            EventCode::RestEoStart,
            EventCode::RestEcStart,
            EventCode::RestEmStart,
            EventCode::RestEnd,
        ];
        events.extend(
            rest_bounds
                .iter()
                .zip(codes)
                .map(|(&sample, code)| Event { sample, code }),
        );
    }
    events.extend(cues.iter().zip(&classes).map(|(&sample, class)| Event {
        sample,
        code: match class {
            MiClass::Left => EventCode::CueLeft,
            MiClass::Right => EventCode::CueRight,
        },
    }));

    let [a1, a2] = spec.ar_coeffs;
    let burn_in = 1000;
    let mut data = Vec::with_capacity(spec.channels.len());
    for (ch, name) in spec.channels.iter().enumerate() {
        let scale = gain * channel_gains[ch];
        let mut amp = vec![spec.mu_amplitude; total];
        if has_rest {
            for a in &mut amp[rest_bounds[1]..rest_bounds[2]] {
                *a *= spec.eyes_closed_mu_gain;
            }
        }
        for (&cue, &class) in cues.iter().zip(&classes) {
            let factor = 1.0 - spec.erd_contrast * erd_weight(name, class);
            for a in &mut amp[cue..cue + imagery] {
                *a *= factor;
            }
        }

        let (mut x1, mut x2) = (0.0, 0.0);
        let mut out = Vec::with_capacity(total);
        for t in 0..burn_in + total {
            let e: f64 = rng.sample(StandardNormal);
            let x = a1 * x1 + a2 * x2 + spec.noise_std * e;
            x2 = x1;
            x1 = x;
            if t >= burn_in {
                let s = t - burn_in;
                let mu = amp[s] * (2.0 * PI * spec.mu_freq_hz * s as f64 / fs + phases[ch]).sin();
                out.push((scale * (x + mu)) as f32);
            }
        }
        data.push(out);
    }

    let subject_id = SynthSpec::subject_id(index);
    let layout = ChannelLayout::new(spec.channels.clone(), None)?;
    let rec = ContinuousRecording::new(
        subject_id.clone(),
        fs,
        layout,
        data,
        events,
        has_rest.then_some(RestingOffsets {
            eyes_open: rest_bounds[0],
            eyes_closed: rest_bounds[1],
            eye_movement: rest_bounds[2],
            end: rest_bounds[3],
        }),
    )?;

    let band = (8.0, 30.0);
    let noise_power = ar2_band_power(spec, band.0, band.1);
    let mu_in_band = spec.mu_freq_hz >= band.0 && spec.mu_freq_hz <= band.1;
    let level = |ch: usize, mu_factor: f64| {
        let mu = if mu_in_band {
            0.5 * (spec.mu_amplitude * mu_factor).powi(2)
        } else {
            0.0
        };
        (gain * channel_gains[ch]).powi(2) * (noise_power + mu)
    };
    let n_ch = spec.channels.len();
    let truth = SubjectGroundTruth {
        subject_id,
        gain,
        channels: spec.channels.clone(),
        rest_band_power: (0..n_ch).map(|c| level(c, 1.0)).collect(),
        task_band_power: MiClass::ALL.map(|class| {
            (0..n_ch)
                .map(|c| {
                    level(
                        c,
                        1.0 - spec.erd_contrast * erd_weight(&spec.channels[c], class),
                    )
                })
                .collect()
        }),
        channel_gains,
        band_hz: band,
        has_resting_block: has_rest,
    };
    Ok((rec, truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub subjects: Vec<String>,
    pub spec: SynthSpec,
}

/// Writes one archive per subject under `out_dir/<subject_id>/`, each with a
/// ground-truth sidecar, plus a `dataset.json` index.
pub fn generate_dataset(spec: &SynthSpec, out_dir: impl AsRef<Path>) -> Result<DatasetIndex> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut subjects = Vec::with_capacity(spec.n_subjects);
    for i in 0..spec.n_subjects {
        let (rec, truth) = generate_subject(spec, i)?;
        let dir = out_dir.join(&rec.subject_id);
        write_recording(&rec, &dir)?;
        let gt_path = dir.join(GROUND_TRUTH_FILE);
        let text = serde_json::to_string_pretty(&truth).map_err(|e| Error::json(&gt_path, e))?;
        fs::write(&gt_path, text).map_err(|e| Error::io(&gt_path, e))?;
        subjects.push(rec.subject_id);
    }
    let index = DatasetIndex {
        subjects,
        spec: spec.clone(),
    };
    let path = out_dir.join(DATASET_FILE);
    let text = serde_json::to_string_pretty(&index).map_err(|e| Error::json(&path, e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(index)
}
