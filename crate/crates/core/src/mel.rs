//! Mel filterbank projection of power spectrograms and the MFCC cepstrogram.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::audio::AudioClip;
use crate::error::invalid;
use crate::stft::{linear_spectrogram, StftSpec};
use crate::{Error, Matrix, Result, TfKind, TfRepresentation};

/// Floor added to mel powers before taking the MFCC logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

/// HTK mel scale, `2595 log10(1 + f / 700)`.
pub fn mel_scale(hz: f64) -> f64 {
    2595.0 * libm::log10(1.0 + hz / 700.0)
}

/// Inverse of [`mel_scale`].
pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (libm::pow(10.0, mel / 2595.0) - 1.0)
}

/// Triangular filters with apexes equally spaced on the mel scale.
///
/// Each weight is the mean of the triangle over the frequency band covered by
/// one FFT bin (`[f_k - df/2, f_k + df/2]`), rescaled so every row peaks at
/// one. Averaging instead of point-sampling keeps narrow low-frequency filters
/// from falling between bin centres, which would leave them empty.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    weights: Matrix,
    centers: Vec<f64>,
    f_min: f64,
    f_max: f64,
}

impl MelFilterbank {
    /// Wideband preset: 512 bands over the 1025 bins of a 2048-point DFT.
    pub const WIDEBAND_BANDS: usize = 512;
    /// Narrowband preset: 128 bands over the 257 bins of a 512-point DFT.
    pub const NARROWBAND_BANDS: usize = 128;

    pub fn new(
        n_mels: usize,
        n_fft_bins: usize,
        sample_rate: f64,
        f_min: f64,
        f_max: f64,
    ) -> Result<Self> {
        if n_mels == 0 {
            return Err(invalid!("at least one mel band is required"));
        }
        if n_fft_bins < 2 {
            return Err(invalid!("at least two FFT bins are required"));
        }
        if !(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0) {
            return Err(invalid!(
                "need 0 <= f_min < f_max <= fs/2, got f_min={f_min}, f_max={f_max}, fs={sample_rate}"
            ));
        }
        if n_mels > n_fft_bins {
            return Err(invalid!(
                "{n_mels} mel bands cannot be resolved by {n_fft_bins} FFT bins"
            ));
        }

        let (mel_lo, mel_hi) = (mel_scale(f_min), mel_scale(f_max));
        let step = (mel_hi - mel_lo) / (n_mels + 1) as f64;
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mel_lo + i as f64 * step))
            .collect();
        let df = sample_rate / (2 * (n_fft_bins - 1)) as f64;

        let mut weights = Matrix::zeros(n_mels, n_fft_bins);
        for m in 0..n_mels {
            let (lo, c, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let row = weights.row_mut(m);
            for (k, w) in row.iter_mut().enumerate() {
                let f = k as f64 * df;
                *w = (triangle_area(f + df / 2.0, lo, c, hi)
                    - triangle_area(f - df / 2.0, lo, c, hi))
                    / df;
            }
            let peak = row.iter().copied().fold(0.0, f64::max);
            if peak <= 0.0 {
                return Err(Error::EmptyFilter { index: m });
            }
            row.iter_mut().for_each(|w| *w /= peak);
        }
        Ok(Self {
            weights,
            centers: edges[1..=n_mels].to_vec(),
            f_min,
            f_max,
        })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Apex frequency of every band in Hz.
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn n_mels(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_fft_bins(&self) -> usize {
        self.weights.cols()
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }
}

/// Integral of the unit-height triangle `(lo, c, hi)` from `-inf` to `f`.
fn triangle_area(f: f64, lo: f64, c: f64, hi: f64) -> f64 {
    if f <= lo {
        0.0
    } else if f <= c {
        (f - lo) * (f - lo) / (2.0 * (c - lo))
    } else if f < hi {
        0.5 * (hi - lo) - (hi - f) * (hi - f) / (2.0 * (hi - c))
    } else {
        0.5 * (hi - lo)
    }
}

/// Projects a linear power spectrogram onto the mel bands.
pub fn mel_spectrogram(linear: &TfRepresentation, fb: &MelFilterbank) -> Result<TfRepresentation> {
    if linear.kind != TfKind::LinearStft {
        return Err(invalid!("mel projection needs a linear STFT, got {:?}", linear.kind));
    }
    if linear.n_bins() != fb.n_fft_bins() {
        return Err(Error::ShapeMismatch {
            expected: alloc::format!("{} FFT bins", fb.n_fft_bins()),
            found: alloc::format!("{} FFT bins", linear.n_bins()),
        });
    }
    Ok(TfRepresentation {
        values: fb.weights.matmul(&linear.values),
        bin_frequencies: fb.centers.clone(),
        frame_times: linear.frame_times.clone(),
        kind: TfKind::Mel,
    })
}

/// Orthonormal DCT-II of `x`.
pub fn dct_ii(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, &v)| v * libm::cos(PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64))
                .sum();
            dct_scale(k, n) * s
        })
        .collect()
}

/// Transpose (and inverse) of [`dct_ii`].
pub fn dct_iii(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    (0..n)
        .map(|i| {
            c.iter()
                .enumerate()
                .map(|(k, &v)| {
                    dct_scale(k, n)
                        * v
                        * libm::cos(PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64)
                })
                .sum()
        })
        .collect()
}

fn dct_scale(k: usize, n: usize) -> f64 {
    if k == 0 {
        libm::sqrt(1.0 / n as f64)
    } else {
        libm::sqrt(2.0 / n as f64)
    }
}

/// MFCC parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfccSpec {
    pub stft: StftSpec,
    pub n_mels: usize,
    pub n_coeffs: usize,
}

impl Default for MfccSpec {
    fn default() -> Self {
        Self {
            stft: StftSpec::NARROWBAND,
            n_mels: MelFilterbank::NARROWBAND_BANDS,
            n_coeffs: 40,
        }
    }
}

/// Cepstrogram: DCT-II along frequency of `ln(mel + 1e-10)`, first
/// `n_coeffs` rows kept.
pub fn mfcc(clip: &AudioClip, spec: &MfccSpec) -> Result<TfRepresentation> {
    if spec.n_coeffs == 0 || spec.n_coeffs > spec.n_mels {
        return Err(invalid!(
            "n_coeffs must be in 1..={}, got {}",
            spec.n_mels,
            spec.n_coeffs
        ));
    }
    let fs = clip.sample_rate() as f64;
    let fb = MelFilterbank::new(spec.n_mels, spec.stft.n_bins(), fs, 0.0, fs / 2.0)?;
    let mel = mel_spectrogram(&linear_spectrogram(clip, &spec.stft)?, &fb)?;
    Ok(cepstrogram(&mel, spec.n_coeffs))
}

/// Log + DCT stage of [`mfcc`], applied to an existing mel spectrogram.
pub fn cepstrogram(mel: &TfRepresentation, n_coeffs: usize) -> TfRepresentation {
    let frames = mel.n_frames();
    let mut values = Matrix::zeros(n_coeffs, frames);
    for t in 0..frames {
        let logs: Vec<f64> = mel
            .values
            .column(t)
            .into_iter()
            .map(|p| libm::log(p + LOG_FLOOR))
            .collect();
        for (k, c) in dct_ii(&logs).into_iter().take(n_coeffs).enumerate() {
            values[(k, t)] = c;
        }
    }
    TfRepresentation {
        values,
        bin_frequencies: (0..n_coeffs).map(|k| k as f64).collect(),
        frame_times: mel.frame_times.clone(),
        kind: TfKind::Mfcc,
    }
}
