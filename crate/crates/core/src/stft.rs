//! Hann-windowed short-time Fourier transform and the linear power
//! spectrogram.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::audio::AudioClip;
use crate::error::invalid;
use crate::fft::FftPlan;
use crate::{Error, Matrix, Result, TfKind, TfRepresentation};

/// Framing parameters of an STFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StftSpec {
    pub window_length: usize,
    pub hop: usize,
    pub dft_size: usize,
    /// Frames are centered on `t * hop` with reflection padding at the edges.
    pub centered: bool,
}

impl StftSpec {
    /// Long window: fine frequency, coarse time resolution.
    pub const WIDEBAND: StftSpec = StftSpec::half_overlap(2048);
    /// Short window: coarse frequency, fine time resolution.
    pub const NARROWBAND: StftSpec = StftSpec::half_overlap(512);

    /// Centered frames of length `window_length`, hop `window_length / 2`,
    /// no zero padding.
    pub const fn half_overlap(window_length: usize) -> Self {
        Self {
            window_length,
            hop: window_length / 2,
            dft_size: window_length,
            centered: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_length < 2 {
            return Err(invalid!("window length must be at least 2"));
        }
        if self.hop == 0 {
            return Err(invalid!("hop must be positive"));
        }
        if self.dft_size < self.window_length {
            return Err(invalid!(
                "DFT size {} is shorter than the window {}",
                self.dft_size,
                self.window_length
            ));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.dft_size / 2 + 1
    }

    /// Number of frames produced for a signal of `len` samples.
    pub fn n_frames(&self, len: usize) -> usize {
        if self.centered {
            1 + len / self.hop
        } else if len < self.window_length {
            0
        } else {
            1 + (len - self.window_length) / self.hop
        }
    }

    /// Smallest signal the framing accepts.
    pub fn min_len(&self) -> usize {
        // Reflection padding needs more than half a window of signal.
        if self.centered {
            self.window_length / 2 + 1
        } else {
            self.window_length
        }
    }
}

/// Periodic Hann window `0.5 (1 - cos(2 pi n / L))`, `n` in `0..L`.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 * (1.0 - libm::cos(2.0 * PI * n as f64 / len as f64)))
        .collect()
}

/// Copies `x` into a buffer extended by `pad` samples on both sides using
/// reflection about the end samples (`x[-1] = x[1]`).
///
/// Requires `pad < x.len()`.
pub(crate) fn reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    debug_assert!(pad < x.len());
    let n = x.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    out.extend((1..=pad).rev().map(|i| x[i]));
    out.extend_from_slice(x);
    out.extend((0..pad).map(|i| x[n - 2 - i]));
    out
}

/// Complex STFT coefficients, `n_bins x n_frames`, row-major by bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Stft {
    pub spec: StftSpec,
    pub sample_rate: u32,
    n_frames: usize,
    data: Vec<Complex64>,
}

impl Stft {
    pub fn n_bins(&self) -> usize {
        self.spec.n_bins()
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn get(&self, bin: usize, frame: usize) -> Complex64 {
        self.data[bin * self.n_frames + frame]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Centre time of each frame in seconds.
    pub fn frame_times(&self) -> Vec<f64> {
        let offset = if self.spec.centered {
            0.0
        } else {
            self.spec.window_length as f64 / 2.0
        };
        (0..self.n_frames)
            .map(|t| (t as f64 * self.spec.hop as f64 + offset) / self.sample_rate as f64)
            .collect()
    }

    pub fn bin_frequencies(&self) -> Vec<f64> {
        let df = self.sample_rate as f64 / self.spec.dft_size as f64;
        (0..self.n_bins()).map(|k| k as f64 * df).collect()
    }
}

/// Short-time Fourier transform of `clip`.
///
/// Frame `t` is `x[t*hop - L/2 .. t*hop + L/2]` (reflection-padded) when
/// centered, `x[t*hop .. t*hop + L]` otherwise; each frame is Hann-weighted
/// and transformed with an `N`-point DFT, keeping bins `0..=N/2`.
pub fn stft(clip: &AudioClip, spec: &StftSpec) -> Result<Stft> {
    spec.validate()?;
    let x = clip.samples();
    if x.len() < spec.min_len() {
        return Err(Error::SignalTooShort {
            needed: spec.min_len(),
            found: x.len(),
        });
    }
    let padded;
    let source: &[f64] = if spec.centered {
        padded = reflect_pad(x, spec.window_length / 2);
        &padded
    } else {
        x
    };
    let n_frames = spec.n_frames(x.len());
    let n_bins = spec.n_bins();
    let window = hann_window(spec.window_length);
    let plan = FftPlan::new(spec.dft_size);

    let mut data = vec![Complex64::new(0.0, 0.0); n_bins * n_frames];
    let mut buf = vec![Complex64::new(0.0, 0.0); spec.dft_size];
    for t in 0..n_frames {
        let frame = &source[t * spec.hop..t * spec.hop + spec.window_length];
        buf.fill(Complex64::new(0.0, 0.0));
        for ((b, &s), &w) in buf.iter_mut().zip(frame).zip(&window) {
            b.re = s * w;
        }
        plan.forward(&mut buf);
        for k in 0..n_bins {
            data[k * n_frames + t] = buf[k];
        }
    }
    Ok(Stft {
        spec: *spec,
        sample_rate: clip.sample_rate(),
        n_frames,
        data,
    })
}

/// Element-wise squared magnitude of an STFT.
pub fn power_spectrogram(stft: &Stft) -> TfRepresentation {
    let values = Matrix::from_vec(
        stft.n_bins(),
        stft.n_frames,
        stft.data.iter().map(|c| c.norm_sqr()).collect(),
    );
    TfRepresentation {
        values,
        bin_frequencies: stft.bin_frequencies(),
        frame_times: stft.frame_times(),
        kind: TfKind::LinearStft,
    }
}

/// STFT followed by [`power_spectrogram`].
pub fn linear_spectrogram(clip: &AudioClip, spec: &StftSpec) -> Result<TfRepresentation> {
    Ok(power_spectrogram(&stft(clip, spec)?))
}
