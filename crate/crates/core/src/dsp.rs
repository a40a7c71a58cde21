//! Preprocessing kernels: common average reference, Butterworth band-pass,
//! FFT-mask band-pass and Welch spectral estimation.
//!
//! Multichannel blocks are `channels x samples` slices of `Vec<f64>`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C64 = Complex<f64>;

fn check_block(block: &[Vec<f64>]) -> Result<usize> {
    let n = block.first().map_or(0, Vec::len);
    if block.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("channels differ in length".into()));
    }
    Ok(n)
}

/// Common average reference: subtracts the instantaneous cross-channel mean.
pub fn car_filter(block: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if block.len() < 2 {
        return Err(Error::InvalidArgument(
            "common average reference needs at least two channels".into(),
        ));
    }
    let n = check_block(block)?;
    let inv = 1.0 / block.len() as f64;
    let mean: Vec<f64> = (0..n)
        .map(|t| block.iter().map(|c| c[t]).sum::<f64>() * inv)
        .collect();
    Ok(block
        .iter()
        .map(|c| c.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect())
}

/// Band edges, order and sample rate of a Butterworth band-pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandpassSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
    pub sample_rate_hz: f64,
}

impl Default for BandpassSpec {
    fn default() -> Self {
        Self {
            low_hz: 8.0,
            high_hz: 30.0,
            order: 3,
            sample_rate_hz: 250.0,
        }
    }
}

impl BandpassSpec {
    pub fn validate(&self) -> Result<()> {
        let nyq = self.sample_rate_hz / 2.0;
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidFilter(format!(
                "sample rate {} must be positive",
                self.sample_rate_hz
            )));
        }
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz && self.high_hz < nyq) {
            return Err(Error::InvalidFilter(format!(
                "need 0 < low ({}) < high ({}) < Nyquist ({nyq})",
                self.low_hz, self.high_hz
            )));
        }
        if self.order == 0 {
            return Err(Error::InvalidFilter("order must be at least 1".into()));
        }
        Ok(())
    }
}

/// Second-order section, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: C64) -> C64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + z_inv * self.b[1] + z2 * self.b[2])
            / (self.a[0] + z_inv * self.a[1] + z2 * self.a[2])
    }

    fn poles(&self) -> [C64; 2] {
        // z^2 + a1 z + a2 = 0
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = C64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRealization {
    pub sections: Vec<Biquad>,
    pub sample_rate_hz: f64,
}

impl FilterRealization {
    /// Complex frequency response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> C64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate_hz;
        let z_inv = C64::from_polar(1.0, -w);
        self.sections
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm()
    }

    pub fn poles(&self) -> Vec<C64> {
        self.sections.iter().flat_map(|s| s.poles()).collect()
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }
}

/// Butterworth band-pass via the analog prototype, lowpass-to-bandpass
/// transform and bilinear transform with pre-warped edges.
///
/// Every section gets one zero at `z = 1` and one at `z = -1`; the cascade is
/// normalized to unit gain at the digital image of the analog center
/// frequency.
pub fn design_butterworth_bandpass(spec: &BandpassSpec) -> Result<FilterRealization> {
    spec.validate()?;
    let fs = spec.sample_rate_hz;
    let n = spec.order;
    let k = 2.0 * fs;
    let w_lo = k * (PI * spec.low_hz / fs).tan();
    let w_hi = k * (PI * spec.high_hz / fs).tan();
    let bw = w_hi - w_lo;
    let w0_sq = w_lo * w_hi;

    let bilinear = |s: C64| (k + s) / (k - s);
    let section = |z1: C64, z2: C64| Biquad {
        b: [1.0, 0.0, -1.0],
        a: [1.0, -(z1 + z2).re, (z1 * z2).re],
    };

    let mut sections = Vec::with_capacity(n);
    for i in 0..n {
        let theta = PI * (2 * i + n + 1) as f64 / (2 * n) as f64;
        let p = C64::from_polar(1.0, theta);
        // conjugate partner handles the lower half-plane
        if p.im < -1e-12 {
            continue;
        }
        let pb = p * bw;
        let disc = (pb * pb - 4.0 * w0_sq).sqrt();
        let q1 = (pb + disc) / 2.0;
        let q2 = (pb - disc) / 2.0;
        if p.im.abs() <= 1e-12 {
            // real prototype pole: q1, q2 are a conjugate pair or both real
            sections.push(section(bilinear(q1), bilinear(q2)));
        } else {
            sections.push(section(bilinear(q1), bilinear(q1.conj())));
            sections.push(section(bilinear(q2), bilinear(q2.conj())));
        }
    }

    let mut filt = FilterRealization {
        sections,
        sample_rate_hz: fs,
    };
    let center_hz = fs / PI * (w0_sq.sqrt() / k).atan();
    let g = filt.magnitude(center_hz);
    let per_section = g.powf(-1.0 / n as f64);
    for s in &mut filt.sections {
        for b in &mut s.b {
            *b *= per_section;
        }
    }
    Ok(filt)
}

fn filter_channel(filter: &FilterRealization, x: &mut [f64]) {
    for s in &filter.sections {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let xin = *v;
            let y = s.b[0] * xin + z1;
            z1 = s.b[1] * xin - s.a[1] * y + z2;
            z2 = s.b[2] * xin - s.a[2] * y;
            *v = y;
        }
    }
}

/// Causal direct-form-II-transposed cascade applied to each channel.
pub fn apply_iir(filter: &FilterRealization, block: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    check_block(block)?;
    if block.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(block
        .iter()
        .map(|c| {
            let mut y = c.clone();
            filter_channel(filter, &mut y);
            y
        })
        .collect())
}

/// Forward-backward application (zero phase, squared magnitude response).
pub fn apply_iir_zero_phase(
    filter: &FilterRealization,
    block: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let mut out = apply_iir(filter, block)?;
    for c in &mut out {
        c.reverse();
        filter_channel(filter, c);
        c.reverse();
    }
    Ok(out)
}

/// Zeroes every FFT bin whose center frequency lies outside
/// `[low_hz, high_hz]` (inclusive) and transforms back.
pub fn fft_bandpass(x: &[f64], sample_rate: f64, low_hz: f64, high_hz: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::SignalTooShort(format!(
            "FFT band-pass needs at least 2 samples, got {n}"
        )));
    }
    if !(low_hz <= high_hz) {
        return Err(Error::InvalidArgument(format!(
            "band [{low_hz}, {high_hz}] is empty"
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let df = sample_rate / n as f64;
    for (k, bin) in buf.iter_mut().enumerate() {
        // mirrored bins share the frequency of their positive partner
        let f = k.min(n - k) as f64 * df;
        if f < low_hz || f > high_hz {
            *bin = C64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(buf.iter().map(|c| c.re * scale).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    /// Periodic Hann.
    Hann,
    Rectangular,
}

impl Taper {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Taper::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
            Taper::Rectangular => vec![1.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchParams {
    pub segment_len: usize,
    /// Fraction of a segment shared with the next one, in `[0, 1)`.
    pub overlap: f64,
    pub taper: Taper,
}

impl Default for WelchParams {
    fn default() -> Self {
        Self {
            segment_len: 250,
            overlap: 0.5,
            taper: Taper::Hann,
        }
    }
}

/// One-sided power spectral density in µV²/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
    pub resolution_hz: f64,
    pub segment_len: usize,
    pub n_segments: usize,
    pub taper: Taper,
}

/// Welch averaged periodogram. Each segment has its mean removed before
/// tapering; density is scaled so that integrating over `[0, fs/2]`
/// recovers the signal variance.
pub fn welch_psd(x: &[f64], sample_rate: f64, params: &WelchParams) -> Result<SpectrumEstimate> {
    let seg = params.segment_len;
    if seg < 2 {
        return Err(Error::InvalidArgument(format!(
            "Welch segment length {seg} must be at least 2"
        )));
    }
    if !(0.0..1.0).contains(&params.overlap) {
        return Err(Error::InvalidArgument(format!(
            "Welch overlap {} outside [0, 1)",
            params.overlap
        )));
    }
    if seg > x.len() {
        return Err(Error::SignalTooShort(format!(
            "Welch segment of {seg} samples exceeds signal of {}",
            x.len()
        )));
    }
    let step = (seg - (seg as f64 * params.overlap).floor() as usize).max(1);
    let n_segments = (x.len() - seg) / step + 1;
    let window = params.taper.coefficients(seg);
    let win_energy: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);
    let n_bins = seg / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![C64::new(0.0, 0.0); seg];
    for s in 0..n_segments {
        let chunk = &x[s * step..s * step + seg];
        let mean = chunk.iter().sum::<f64>() / seg as f64;
        for ((b, &v), &w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = C64::new((v - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }

    let scale = 1.0 / (sample_rate * win_energy * n_segments as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || (seg.is_multiple_of(2) && k == seg / 2) {
                1.0
            } else {
                2.0
            };
            p * scale * one_sided
        })
        .collect();
    let resolution_hz = sample_rate / seg as f64;
    Ok(SpectrumEstimate {
        frequencies: (0..n_bins).map(|k| k as f64 * resolution_hz).collect(),
        density,
        resolution_hz,
        segment_len: seg,
        n_segments,
        taper: params.taper,
    })
}

/// Trapezoidal integral of the density over bins with `low <= f <= high`.
pub fn band_power(spec: &SpectrumEstimate, low_hz: f64, high_hz: f64) -> Result<f64> {
    let top = spec.frequencies.last().copied().unwrap_or(0.0);
    if !(low_hz >= 0.0 && low_hz <= high_hz && high_hz <= top + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "band [{low_hz}, {high_hz}] outside spectrum range [0, {top}]"
        )));
    }
    let bins: Vec<(f64, f64)> = spec
        .frequencies
        .iter()
        .zip(&spec.density)
        .filter(|(f, _)| **f >= low_hz && **f <= high_hz)
        .map(|(&f, &p)| (f, p))
        .collect();
    if bins.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "band [{low_hz}, {high_hz}] covers fewer than two spectral bins"
        )));
    }
    Ok(bins
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum())
}
