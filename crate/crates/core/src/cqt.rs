//! Constant-Q transform.
//!
//! Bin `k` has centre frequency `f_k = f_min * 2^(k/b)` and a Hann-weighted
//! complex atom of length `N[k] = ceil(Q fs / f_k)` with `Q = 1 / (2^(1/b) - 1)`:
//!
//! ```text
//! X[t, k] = 1/N[k] * sum_{m < N[k]} x[t*hop - N[k]/2 + m] * hann_N[k][m] * exp(-2 pi i m Q / N[k])
//! ```
//!
//! Samples outside the clip count as zero. The low bins of the wideband
//! preset have atoms of more than 100k samples, so the sum is not evaluated
//! directly: the periodic Hann window is a sum of three complex exponentials,
//! which turns each windowed sum into differences of three running prefix
//! sums. The cost is `O(len + frames)` per bin regardless of atom length.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::audio::AudioClip;
use crate::error::invalid;
use crate::stft::hann_window;
use crate::{Error, Matrix, Result, TfKind, TfRepresentation};

/// Musical C1 in Hz; lowest centre frequency of both presets.
pub const C1_HZ: f64 = 32.703_195_662_574_764;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqtSpec {
    pub n_bins: usize,
    pub bins_per_octave: usize,
    pub f_min: f64,
    pub sample_rate: f64,
    pub hop: usize,
}

impl CqtSpec {
    /// 1024 bins, 128 per octave, hop 1024.
    pub fn wideband(sample_rate: f64) -> Self {
        Self {
            n_bins: 1024,
            bins_per_octave: 128,
            f_min: C1_HZ,
            sample_rate,
            hop: 1024,
        }
    }

    /// 256 bins, 32 per octave, hop 256.
    pub fn narrowband(sample_rate: f64) -> Self {
        Self {
            n_bins: 256,
            bins_per_octave: 32,
            f_min: C1_HZ,
            sample_rate,
            hop: 256,
        }
    }

    /// Quality factor `1 / (2^(1/b) - 1)`.
    pub fn q(&self) -> f64 {
        1.0 / (libm::exp2(1.0 / self.bins_per_octave as f64) - 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 || self.bins_per_octave == 0 || self.hop == 0 {
            return Err(invalid!("CQT bin count, bins per octave and hop must be positive"));
        }
        if !(self.f_min > 0.0 && self.sample_rate > 0.0) {
            return Err(invalid!("CQT f_min and sample rate must be positive"));
        }
        let top = self.center_frequency(self.n_bins - 1);
        if top > self.sample_rate / 2.0 {
            return Err(invalid!(
                "top CQT bin at {top:.1} Hz exceeds Nyquist {:.1} Hz",
                self.sample_rate / 2.0
            ));
        }
        Ok(())
    }

    pub fn center_frequency(&self, k: usize) -> f64 {
        self.f_min * libm::exp2(k as f64 / self.bins_per_octave as f64)
    }

    pub fn n_frames(&self, len: usize) -> usize {
        1 + len / self.hop
    }
}

/// `f_k = 2^(k/b) f_min` for every bin.
pub fn cqt_center_frequencies(spec: &CqtSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok((0..spec.n_bins).map(|k| spec.center_frequency(k)).collect())
}

/// Per-bin atom lengths and digital frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct CqtKernel {
    spec: CqtSpec,
    lengths: Vec<usize>,
    frequencies: Vec<f64>,
}

impl CqtKernel {
    pub fn new(spec: &CqtSpec) -> Result<Self> {
        let frequencies = cqt_center_frequencies(spec)?;
        let q = spec.q();
        let lengths = frequencies
            .iter()
            .map(|&f| libm::ceil(q * spec.sample_rate / f) as usize)
            .collect();
        Ok(Self {
            spec: *spec,
            lengths,
            frequencies,
        })
    }

    pub fn spec(&self) -> &CqtSpec {
        &self.spec
    }

    /// `N[k]` for every bin.
    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// `hann[m] * exp(-2 pi i m Q / N[k])` for `m < N[k]`.
    pub fn atom(&self, k: usize) -> Vec<Complex64> {
        let n = self.lengths[k];
        let q = self.spec.q();
        hann_window(n)
            .into_iter()
            .enumerate()
            .map(|(m, w)| Complex64::from_polar(w, -2.0 * PI * m as f64 * q / n as f64))
            .collect()
    }
}

/// Complex CQT coefficients, `n_bins x n_frames`.
pub fn cqt_coefficients(clip: &AudioClip, kernel: &CqtKernel) -> Result<Vec<Vec<Complex64>>> {
    let spec = kernel.spec();
    if (clip.sample_rate() as f64 - spec.sample_rate).abs() > 1e-9 {
        return Err(invalid!(
            "clip is at {} Hz but the CQT kernel expects {} Hz",
            clip.sample_rate(),
            spec.sample_rate
        ));
    }
    let x = clip.samples();
    if x.is_empty() {
        return Err(Error::SignalTooShort { needed: 1, found: 0 });
    }
    let n_frames = spec.n_frames(x.len());
    let q = spec.q();
    let mut prefix = [
        vec![Complex64::new(0.0, 0.0); x.len() + 1],
        vec![Complex64::new(0.0, 0.0); x.len() + 1],
        vec![Complex64::new(0.0, 0.0); x.len() + 1],
    ];
    let mut out = Vec::with_capacity(spec.n_bins);
    for &n in &kernel.lengths {
        let theta = 2.0 * PI * q / n as f64;
        let phi = 2.0 * PI / n as f64;
        // Hann = 0.5 - 0.25 e^{i phi m} - 0.25 e^{-i phi m}, so the atom is a
        // sum of three exponentials with these frequencies and weights.
        let alphas = [theta, theta - phi, theta + phi];
        let coefs = [0.5, -0.25, -0.25];
        for (p, &alpha) in prefix.iter_mut().zip(&alphas) {
            running_sum(x, alpha, p);
        }
        let len = x.len() as i64;
        let row = (0..n_frames)
            .map(|t| {
                let start = (t * spec.hop) as i64 - (n / 2) as i64;
                let lo = start.clamp(0, len) as usize;
                let hi = (start + n as i64).clamp(0, len) as usize;
                let mut acc = Complex64::new(0.0, 0.0);
                for ((p, &alpha), &c) in prefix.iter().zip(&alphas).zip(&coefs) {
                    // sum_{j=lo}^{hi-1} x[j] e^{-i alpha (j - start)}
                    let shift = phasor(alpha, start);
                    acc += (p[hi] - p[lo]) * shift * c;
                }
                acc / n as f64
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// `p[j] = sum_{n < j} x[n] e^{-i alpha n}`.
fn running_sum(x: &[f64], alpha: f64, p: &mut [Complex64]) {
    const RESYNC: usize = 512;
    let step = Complex64::from_polar(1.0, -alpha);
    let mut rot = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    p[0] = acc;
    for (n, &v) in x.iter().enumerate() {
        if n % RESYNC == 0 {
            rot = phasor(-alpha, n as i64);
        }
        acc += rot * v;
        p[n + 1] = acc;
        rot *= step;
    }
}

/// `e^{i alpha n}` with the argument reduced before evaluation.
fn phasor(alpha: f64, n: i64) -> Complex64 {
    let arg = libm::remainder(alpha * n as f64, 2.0 * PI);
    Complex64::from_polar(1.0, arg)
}

/// CQT power spectrogram.
pub fn cqt(clip: &AudioClip, spec: &CqtSpec) -> Result<TfRepresentation> {
    cqt_with_kernel(clip, &CqtKernel::new(spec)?)
}

pub fn cqt_with_kernel(clip: &AudioClip, kernel: &CqtKernel) -> Result<TfRepresentation> {
    let coeffs = cqt_coefficients(clip, kernel)?;
    let spec = kernel.spec();
    let n_frames = spec.n_frames(clip.len());
    let values = Matrix::from_fn(spec.n_bins, n_frames, |k, t| coeffs[k][t].norm_sqr());
    Ok(TfRepresentation {
        values,
        bin_frequencies: kernel.frequencies.clone(),
        frame_times: (0..n_frames)
            .map(|t| (t * spec.hop) as f64 / spec.sample_rate)
            .collect(),
        kind: TfKind::Cqt,
    })
}
