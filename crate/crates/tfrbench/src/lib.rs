//! File formats, dataset plumbing and the command-line front end for
//! [`tfrbench_core`].
//!
//! * [`wav`]: PCM WAV decoding to mono [`tfrbench_core::audio::AudioClip`]s.
//! * [`manifest`]: `path,label,fold` CSV manifests.
//! * [`tfr1`]: binary feature files; [`png_io`]: grayscale renderings.
//! * [`checkpoint`]: NNCK parameter files.
//! * [`report`]: JSON / CSV evaluation reports.
//! * [`pipeline`]: extraction, cross-validated training and comparison jobs.
//! * [`cli`]: the `tfrbench` command.

pub mod checkpoint;
pub mod cli;
mod error;
pub mod manifest;
pub mod pipeline;
pub mod png_io;
pub mod report;
pub mod tfr1;
pub mod wav;

pub use error::{Error, Result};
