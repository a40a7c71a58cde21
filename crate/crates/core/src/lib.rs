//! Subject-independent motor-imagery EEG classification with resting-state
//! feature calibration.
//!
//! Task features of every subject are divided element-wise by the same
//! subject's resting-state features before selection and classification,
//! which removes per-subject amplitude scaling from the homogeneous features.
//! The crate covers the whole pipeline: archive I/O and epoching ([`dataio`]),
//! filtering and spectra ([`dsp`]), features and calibration ([`features`]),
//! Fisher-ratio selection ([`selection`]), three linear/Gaussian classifiers
//! ([`classify`]), the leave-one-subject-out runner ([`harness`]) and a
//! synthetic EEG generator ([`synth`]).

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dataio;
pub mod dsp;
pub mod error;
pub mod features;
pub mod harness;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
