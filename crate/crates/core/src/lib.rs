//! Time-frequency feature extraction and CNN benchmarking primitives.
//!
//! Everything in this crate is pure computation over in-memory buffers and
//! builds without `std`; file formats, WAV decoding and the command-line
//! front end live in the `tfrbench` crate.
//!
//! The pipeline is:
//!
//! 1. [`audio`]: resample to 22050 Hz and pad/clip to 4 seconds.
//! 2. One of five representations: [`stft`] (linear), [`mel`] (Mel-STFT and
//!    MFCC), [`cqt`], [`cwt`].
//! 3. [`feature`]: dB scaling, `[-1, 1]` normalization and Lanczos downscaling
//!    to a 37x50 or 154x12 [`feature::FeatureImage`].
//! 4. [`nn`]: the Conv-3 / Conv-5 classifiers, trained with Adam.
//! 5. [`bench`]: k-fold cross validation, median/MAD aggregation, confusion
//!    matrices and ANOVA + Tukey HSD comparison.

#![no_std]

extern crate alloc;

pub mod audio;
pub mod bench;
pub mod cqt;
pub mod cwt;
mod error;
pub mod feature;
pub mod fft;
pub mod matrix;
pub mod mel;
pub mod nn;
pub mod special;
pub mod stft;
pub mod tfr;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use tfr::{TfKind, TfRepresentation};

/// Canonical sample rate of every clip entering a transform.
pub const SAMPLE_RATE: u32 = 22050;

/// Canonical clip duration in seconds.
pub const CLIP_SECONDS: usize = 4;

/// Number of samples in a standardized clip (`4 * 22050`).
pub const CLIP_LEN: usize = CLIP_SECONDS * SAMPLE_RATE as usize;
