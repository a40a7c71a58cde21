//! Epoch archives, trial epoching and resting-state segmentation.
//!
//! An archive is a directory holding `manifest.json` and a single binary
//! payload of little-endian `f32` samples in channel-major order (every
//! sample of channel 0, then channel 1, ...). Converting raw GDF files into
//! this layout happens outside this crate.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The 22 EEG channels of the BCI Competition IV-2a montage, in recording order.
pub const BCI_IV_2A_CHANNELS: [&str; 22] = [
    "Fz", "FC3", "FC1", "FCz", "FC2", "FC4", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "CP3",
    "CP1", "CPz", "CP2", "CP4", "P1", "Pz", "P2", "POz",
];

/// Sensorimotor channels used by the pipeline.
pub const MOTOR_CHANNELS: [&str; 11] = [
    "FC3", "FC4", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "CP3", "CP4",
];

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PAYLOAD_FILE: &str = "signal.f32";
pub const PAYLOAD_DTYPE: &str = "float32_le";
pub const PAYLOAD_LAYOUT: &str = "channel_major";

/// Motor-imagery class. Only left and right hand are in scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MiClass {
    Left,
    Right,
}

impl MiClass {
    pub const ALL: [MiClass; 2] = [MiClass::Left, MiClass::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            MiClass::Left => "left",
            MiClass::Right => "right",
        }
    }

    /// Index into per-class arrays: left = 0, right = 1.
    pub fn index(self) -> usize {
        match self {
            MiClass::Left => 0,
            MiClass::Right => 1,
        }
    }

    /// +1 for right, -1 for left.
    pub fn sign(self) -> f64 {
        match self {
            MiClass::Left => -1.0,
            MiClass::Right => 1.0,
        }
    }

    pub fn flipped(self) -> MiClass {
        match self {
            MiClass::Left => MiClass::Right,
            MiClass::Right => MiClass::Left,
        }
    }
}

/// Resting-state condition recorded at session start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EyeMode {
    Open,
    Closed,
    Movement,
}

impl EyeMode {
    pub const ALL: [EyeMode; 3] = [EyeMode::Open, EyeMode::Closed, EyeMode::Movement];

    pub fn as_str(self) -> &'static str {
        match self {
            EyeMode::Open => "open",
            EyeMode::Closed => "closed",
            EyeMode::Movement => "movement",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventCode {
    CueLeft,
    CueRight,
    RestEoStart,
    RestEcStart,
    RestEmStart,
    RestEnd,
}

impl EventCode {
    pub fn cue_class(self) -> Option<MiClass> {
        match self {
            EventCode::CueLeft => Some(MiClass::Left),
            EventCode::CueRight => Some(MiClass::Right),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub sample: usize,
    pub code: EventCode,
}

/// Resting sub-block boundaries in samples, used when the event list lacks them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestingOffsets {
    pub eyes_open: usize,
    pub eyes_closed: usize,
    pub eye_movement: usize,
    pub end: usize,
}

/// Channel labels of a recording plus the ordered subset the pipeline consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelLayout {
    pub names: Vec<String>,
    pub selected: Vec<String>,
}

impl ChannelLayout {
    /// Builds a layout. Without an explicit selection the sensorimotor subset
    /// [`MOTOR_CHANNELS`] is used when every one of its labels is present,
    /// otherwise all channels are selected.
    pub fn new(names: Vec<String>, selected: Option<Vec<String>>) -> Result<Self> {
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidRecording(format!("duplicate channel `{n}`")));
            }
        }
        let selected = match selected {
            Some(sel) => sel,
            None if MOTOR_CHANNELS.iter().all(|m| names.iter().any(|n| n == m)) => {
                MOTOR_CHANNELS.iter().map(|s| s.to_string()).collect()
            }
            None => names.clone(),
        };
        for (i, s) in selected.iter().enumerate() {
            if !names.contains(s) {
                return Err(Error::UnknownChannel(s.clone()));
            }
            if selected[..i].contains(s) {
                return Err(Error::InvalidRecording(format!(
                    "channel `{s}` selected twice"
                )));
            }
        }
        Ok(Self { names, selected })
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.selected
            .iter()
            .map(|s| self.index_of(s).expect("validated at construction"))
            .collect()
    }
}

/// A multichannel recording in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousRecording {
    pub subject_id: String,
    pub sample_rate: f64,
    pub layout: ChannelLayout,
    /// One row per entry of `layout.names`.
    pub data: Vec<Vec<f32>>,
    pub events: Vec<Event>,
    pub resting_offsets: Option<RestingOffsets>,
}

impl ContinuousRecording {
    pub fn new(
        subject_id: impl Into<String>,
        sample_rate: f64,
        layout: ChannelLayout,
        data: Vec<Vec<f32>>,
        events: Vec<Event>,
        resting_offsets: Option<RestingOffsets>,
    ) -> Result<Self> {
        let rec = Self {
            subject_id: subject_id.into(),
            sample_rate,
            layout,
            data,
            events,
            resting_offsets,
        };
        rec.validate()?;
        Ok(rec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::InvalidRecording(format!(
                "sample rate {} must be positive",
                self.sample_rate
            )));
        }
        if self.data.len() != self.layout.names.len() {
            return Err(Error::InvalidRecording(format!(
                "{} data rows for {} channels",
                self.data.len(),
                self.layout.names.len()
            )));
        }
        let n = self.n_samples();
        if self.data.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidRecording("channels differ in length".into()));
        }
        if let Some(ev) = self.events.iter().find(|e| e.sample >= n) {
            return Err(Error::InvalidRecording(format!(
                "event {:?} at sample {} outside signal of length {n}",
                ev.code, ev.sample
            )));
        }
        if let Some(o) = self.resting_offsets {
            if !(o.eyes_open < o.eyes_closed
                && o.eyes_closed < o.eye_movement
                && o.eye_movement < o.end
                && o.end <= n)
            {
                return Err(Error::InvalidRecording(format!(
                    "resting offsets {o:?} not increasing within {n} samples"
                )));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn n_channels(&self) -> usize {
        self.data.len()
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate
    }

    /// Samples `[start, end)` of every channel. Events inside the range are
    /// kept and re-based; resting offsets are dropped.
    pub fn slice(&self, start: usize, end: usize) -> Result<ContinuousRecording> {
        if start > end || end > self.n_samples() {
            return Err(Error::InvalidArgument(format!(
                "slice [{start}, {end}) outside recording of {} samples",
                self.n_samples()
            )));
        }
        Ok(ContinuousRecording {
            subject_id: self.subject_id.clone(),
            sample_rate: self.sample_rate,
            layout: self.layout.clone(),
            data: self.data.iter().map(|c| c[start..end].to_vec()).collect(),
            events: self
                .events
                .iter()
                .filter(|e| e.sample >= start && e.sample < end)
                .map(|e| Event {
                    sample: e.sample - start,
                    code: e.code,
                })
                .collect(),
            resting_offsets: None,
        })
    }

    /// Keeps only `names`, in that order. The result's selection is all of them.
    pub fn select_channels<S: AsRef<str>>(&self, names: &[S]) -> Result<ContinuousRecording> {
        let mut rows = Vec::with_capacity(names.len());
        let mut kept = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref();
            let idx = self
                .layout
                .index_of(name)
                .ok_or_else(|| Error::UnknownChannel(name.to_string()))?;
            rows.push(self.data[idx].clone());
            kept.push(name.to_string());
        }
        Ok(ContinuousRecording {
            subject_id: self.subject_id.clone(),
            sample_rate: self.sample_rate,
            layout: ChannelLayout::new(kept.clone(), Some(kept))?,
            data: rows,
            events: self.events.clone(),
            resting_offsets: self.resting_offsets,
        })
    }

    /// Channel data widened to `f64`.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.data
            .iter()
            .map(|c| c.iter().map(|&v| v as f64).collect())
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PayloadDecl {
    file: String,
    dtype: String,
    layout: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    subject_id: String,
    sample_rate_hz: f64,
    channels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selected_channels: Option<Vec<String>>,
    n_samples: usize,
    #[serde(default)]
    events: Vec<(usize, EventCode)>,
    #[serde(default)]
    resting_offsets: Option<RestingOffsets>,
    payload: PayloadDecl,
}

/// Reads an epoch archive directory.
pub fn load_recording(archive: impl AsRef<Path>) -> Result<ContinuousRecording> {
    let archive = archive.as_ref();
    let manifest_path = archive.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::MissingManifest(manifest_path));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::json(&manifest_path, e))?;

    if manifest.payload.dtype != PAYLOAD_DTYPE {
        return Err(Error::InvalidRecording(format!(
            "unsupported payload dtype `{}`",
            manifest.payload.dtype
        )));
    }
    if manifest.payload.layout != PAYLOAD_LAYOUT {
        return Err(Error::InvalidRecording(format!(
            "unsupported payload layout `{}`",
            manifest.payload.layout
        )));
    }

    let payload_path = archive.join(&manifest.payload.file);
    let bytes = fs::read(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    let n_ch = manifest.channels.len();
    let expected = n_ch * manifest.n_samples;
    if bytes.len() % 4 != 0 || bytes.len() / 4 != expected {
        return Err(Error::PayloadShape {
            expected,
            found: bytes.len() / 4,
        });
    }

    let mut data = Vec::with_capacity(n_ch);
    for ch in bytes.chunks_exact(4 * manifest.n_samples.max(1)).take(n_ch) {
        data.push(
            ch.chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect::<Vec<f32>>(),
        );
    }
    // zero-length recordings still need one (empty) row per channel
    data.resize(n_ch, Vec::new());

    let layout = ChannelLayout::new(manifest.channels, manifest.selected_channels)?;
    let events = manifest
        .events
        .into_iter()
        .map(|(sample, code)| Event { sample, code })
        .collect();
    ContinuousRecording::new(
        manifest.subject_id,
        manifest.sample_rate_hz,
        layout,
        data,
        events,
        manifest.resting_offsets,
    )
}

/// Writes `rec` as an epoch archive, creating the directory if needed.
pub fn write_recording(rec: &ContinuousRecording, archive: impl AsRef<Path>) -> Result<()> {
    let archive = archive.as_ref();
    fs::create_dir_all(archive).map_err(|e| Error::io(archive, e))?;

    let default_layout = ChannelLayout::new(rec.layout.names.clone(), None)?;
    let manifest = Manifest {
        subject_id: rec.subject_id.clone(),
        sample_rate_hz: rec.sample_rate,
        channels: rec.layout.names.clone(),
        selected_channels: (default_layout.selected != rec.layout.selected)
            .then(|| rec.layout.selected.clone()),
        n_samples: rec.n_samples(),
        events: rec.events.iter().map(|e| (e.sample, e.code)).collect(),
        resting_offsets: rec.resting_offsets,
        payload: PayloadDecl {
            file: PAYLOAD_FILE.into(),
            dtype: PAYLOAD_DTYPE.into(),
            layout: PAYLOAD_LAYOUT.into(),
        },
    };
    let manifest_path = archive.join(MANIFEST_FILE);
    let text =
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::json(&manifest_path, e))?;
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;

    let mut bytes = Vec::with_capacity(4 * rec.n_channels() * rec.n_samples());
    for ch in &rec.data {
        for v in ch {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let payload_path = archive.join(PAYLOAD_FILE);
    fs::write(&payload_path, bytes).map_err(|e| Error::io(&payload_path, e))
}

/// Analysis window relative to cue onset, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochWindow {
    pub start_s: f64,
    pub end_s: f64,
}

impl Default for EpochWindow {
    fn default() -> Self {
        Self {
            start_s: 0.0,
            end_s: 4.0,
        }
    }
}

impl EpochWindow {
    pub fn new(start_s: f64, end_s: f64) -> Result<Self> {
        if !(start_s.is_finite() && end_s.is_finite() && end_s > start_s) {
            return Err(Error::InvalidArgument(format!(
                "epoch window ({start_s}, {end_s}) is empty"
            )));
        }
        Ok(Self { start_s, end_s })
    }

    pub fn n_samples(&self, sample_rate: f64) -> usize {
        ((self.end_s - self.start_s) * sample_rate).round() as usize
    }
}

/// Labeled trials, each `channels x samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialEpochSet {
    pub subject_id: String,
    pub sample_rate: f64,
    pub channels: Vec<String>,
    pub window: EpochWindow,
    pub trials: Vec<Vec<Vec<f64>>>,
    pub labels: Vec<MiClass>,
}

impl TrialEpochSet {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn select_channels<S: AsRef<str>>(&self, names: &[S]) -> Result<TrialEpochSet> {
        let idx = names
            .iter()
            .map(|n| {
                self.channels
                    .iter()
                    .position(|c| c == n.as_ref())
                    .ok_or_else(|| Error::UnknownChannel(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrialEpochSet {
            subject_id: self.subject_id.clone(),
            sample_rate: self.sample_rate,
            channels: names.iter().map(|n| n.as_ref().to_string()).collect(),
            window: self.window,
            trials: self
                .trials
                .iter()
                .map(|t| idx.iter().map(|&i| t[i].clone()).collect())
                .collect(),
            labels: self.labels.clone(),
        })
    }
}

/// Cuts one epoch per cue event whose class is in `classes`, over every
/// channel of `rec`.
pub fn extract_epochs(
    rec: &ContinuousRecording,
    window: EpochWindow,
    classes: &[MiClass],
) -> Result<TrialEpochSet> {
    let fs = rec.sample_rate;
    let offset = (window.start_s * fs).round() as i64;
    let len = window.n_samples(fs);
    let n = rec.n_samples() as i64;

    let mut trials = Vec::new();
    let mut labels = Vec::new();
    for ev in &rec.events {
        let Some(class) = ev.code.cue_class() else {
            continue;
        };
        if !classes.contains(&class) {
            continue;
        }
        let start = ev.sample as i64 + offset;
        let end = start + len as i64;
        if start < 0 || end > n {
            return Err(Error::WindowOutOfBounds {
                cue: ev.sample,
                start,
                end,
            });
        }
        let (s, e) = (start as usize, end as usize);
        trials.push(
            rec.data
                .iter()
                .map(|c| c[s..e].iter().map(|&v| v as f64).collect())
                .collect(),
        );
        labels.push(class);
    }
    if trials.is_empty() {
        return Err(Error::NoMatchingEvents);
    }
    Ok(TrialEpochSet {
        subject_id: rec.subject_id.clone(),
        sample_rate: fs,
        channels: rec.layout.names.clone(),
        window,
        trials,
        labels,
    })
}

/// Nominal resting sub-block durations and the tolerated deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestingTiming {
    /// Eyes open, eyes closed, eye movement.
    pub nominal_s: [f64; 3],
    pub slack_s: f64,
}

impl Default for RestingTiming {
    fn default() -> Self {
        Self {
            nominal_s: [120.0, 120.0, 60.0],
            slack_s: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestingSegments {
    pub eyes_open: ContinuousRecording,
    pub eyes_closed: ContinuousRecording,
    pub eye_movement: ContinuousRecording,
    /// Actual durations, same order as the fields.
    pub durations_s: [f64; 3],
}

impl RestingSegments {
    pub fn get(&self, mode: EyeMode) -> &ContinuousRecording {
        match mode {
            EyeMode::Open => &self.eyes_open,
            EyeMode::Closed => &self.eyes_closed,
            EyeMode::Movement => &self.eye_movement,
        }
    }
}

fn resting_boundaries(rec: &ContinuousRecording) -> Option<[usize; 4]> {
    let find = |code| rec.events.iter().find(|e| e.code == code).map(|e| e.sample);
    let from_events = (|| {
        Some([
            find(EventCode::RestEoStart)?,
            find(EventCode::RestEcStart)?,
            find(EventCode::RestEmStart)?,
            find(EventCode::RestEnd)?,
        ])
    })();
    from_events.or_else(|| {
        rec.resting_offsets
            .map(|o| [o.eyes_open, o.eyes_closed, o.eye_movement, o.end])
    })
}

/// Splits the session-start resting block using the default timing.
pub fn segment_resting(rec: &ContinuousRecording) -> Result<RestingSegments> {
    segment_resting_with(rec, &RestingTiming::default())
}

pub fn segment_resting_with(
    rec: &ContinuousRecording,
    timing: &RestingTiming,
) -> Result<RestingSegments> {
    let b = resting_boundaries(rec).ok_or_else(|| Error::NoRestingBlock(rec.subject_id.clone()))?;
    if !(b[0] < b[1] && b[1] < b[2] && b[2] < b[3] && b[3] <= rec.n_samples()) {
        return Err(Error::InvalidRecording(format!(
            "resting boundaries {b:?} are not increasing within the recording"
        )));
    }
    const NAMES: [&str; 3] = ["eyes-open", "eyes-closed", "eye-movement"];
    let mut durations = [0.0; 3];
    for i in 0..3 {
        let d = (b[i + 1] - b[i]) as f64 / rec.sample_rate;
        if (d - timing.nominal_s[i]).abs() > timing.slack_s + 1e-9 {
            return Err(Error::RestingDuration {
                segment: NAMES[i],
                actual_s: d,
                nominal_s: timing.nominal_s[i],
                slack_s: timing.slack_s,
            });
        }
        durations[i] = d;
    }
    Ok(RestingSegments {
        eyes_open: rec.slice(b[0], b[1])?,
        eyes_closed: rec.slice(b[1], b[2])?,
        eye_movement: rec.slice(b[2], b[3])?,
        durations_s: durations,
    })
}

/// First `duration_s` seconds of `seg`.
pub fn truncate_segment(seg: &ContinuousRecording, duration_s: f64) -> Result<ContinuousRecording> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation duration {duration_s} must be positive"
        )));
    }
    let n = (duration_s * seg.sample_rate).round() as usize;
    if n > seg.n_samples() {
        return Err(Error::DurationExceedsSegment {
            requested_s: duration_s,
            available_s: seg.duration_s(),
        });
    }
    seg.slice(0, n)
}
