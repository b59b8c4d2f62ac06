//! Continuous wavelet transform with a Morlet mother wavelet.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::audio::AudioClip;
use crate::error::invalid;
use crate::{Error, Matrix, Result, TfKind, TfRepresentation};

/// Angular frequency of the Morlet carrier.
pub const MORLET_OMEGA: f64 = 5.0;

/// Wavelets are truncated at `|t| <= TRUNCATION` (Gaussian envelope below
/// `1.3e-14`).
pub const TRUNCATION: f64 = 8.0;

/// Real Morlet, `cos(5 t) exp(-t^2 / 2)`.
pub fn morlet(t: f64) -> f64 {
    libm::cos(MORLET_OMEGA * t) * libm::exp(-0.5 * t * t)
}

/// Complex (analytic-carrier) Morlet, `exp(5 i t) exp(-t^2 / 2)`.
pub fn complex_morlet(t: f64) -> Complex64 {
    Complex64::from_polar(libm::exp(-0.5 * t * t), MORLET_OMEGA * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Wavelet {
    #[default]
    RealMorlet,
    ComplexMorlet,
}

impl Wavelet {
    /// Centre frequency in cycles per unit of `t`.
    pub fn center_frequency(self) -> f64 {
        MORLET_OMEGA / (2.0 * PI)
    }

    fn eval(self, t: f64) -> Complex64 {
        match self {
            Wavelet::RealMorlet => Complex64::new(morlet(t), 0.0),
            Wavelet::ComplexMorlet => complex_morlet(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CwtSpec {
    pub wavelet: Wavelet,
    /// Strictly increasing scales in samples.
    pub scales: Vec<f64>,
    pub sample_rate: f64,
    /// Output keeps every `time_downsample`-th translation.
    pub time_downsample: usize,
}

impl CwtSpec {
    pub const LOWEST_HZ: f64 = 20.0;

    /// `n_scales` scales whose pseudo-frequencies are log-spaced from
    /// `f_high` down to `f_low`.
    pub fn log_spaced(
        n_scales: usize,
        f_low: f64,
        f_high: f64,
        sample_rate: f64,
        time_downsample: usize,
    ) -> Self {
        let wavelet = Wavelet::RealMorlet;
        let fc = wavelet.center_frequency();
        let scales = (0..n_scales)
            .map(|i| {
                let frac = if n_scales > 1 {
                    i as f64 / (n_scales - 1) as f64
                } else {
                    0.0
                };
                let f = f_high * libm::pow(f_low / f_high, frac);
                fc * sample_rate / f
            })
            .collect();
        Self {
            wavelet,
            scales,
            sample_rate,
            time_downsample,
        }
    }

    /// 256 scales spanning 20 Hz to Nyquist, one column every 256 samples.
    pub fn preset(sample_rate: f64) -> Self {
        Self::log_spaced(256, Self::LOWEST_HZ, sample_rate / 2.0, sample_rate, 256)
    }

    /// `f_c fs / a` for every scale, decreasing.
    pub fn pseudo_frequencies(&self) -> Vec<f64> {
        let fc = self.wavelet.center_frequency();
        self.scales
            .iter()
            .map(|&a| fc * self.sample_rate / a)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() || self.time_downsample == 0 || self.sample_rate <= 0.0 {
            return Err(invalid!("CWT needs scales, a positive downsample and sample rate"));
        }
        if self.scales[0] <= 0.0 || self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid!("CWT scales must be positive and strictly increasing"));
        }
        let nyquist = self.sample_rate / 2.0;
        for f in self.pseudo_frequencies() {
            if f > nyquist * (1.0 + 1e-12) || f < Self::LOWEST_HZ * (1.0 - 1e-12) {
                return Err(invalid!(
                    "pseudo-frequency {f:.3} Hz outside [{}, {nyquist}] Hz",
                    Self::LOWEST_HZ
                ));
            }
        }
        Ok(())
    }

    /// Half-width in samples of the truncated wavelet at scale `a`.
    pub fn half_support(a: f64) -> usize {
        libm::ceil(TRUNCATION * a) as usize
    }

    pub fn n_columns(&self, len: usize) -> usize {
        if len == 0 {
            0
        } else {
            1 + (len - 1) / self.time_downsample
        }
    }
}

/// Wavelet coefficients `F(a, b) = a^{-1/2} sum_m x[m] psi*((m - b) / a)` for
/// every scale and every kept translation `b = j * time_downsample`.
///
/// The signal is zero outside `0..len`.
pub fn cwt_coefficients(clip: &AudioClip, spec: &CwtSpec) -> Result<Vec<Vec<Complex64>>> {
    spec.validate()?;
    let x = clip.samples();
    let widest = 2 * CwtSpec::half_support(*spec.scales.last().unwrap()) + 1;
    if widest > x.len() {
        return Err(Error::SignalTooShort {
            needed: widest,
            found: x.len(),
        });
    }
    let n_cols = spec.n_columns(x.len());
    let len = x.len() as i64;
    let rows = spec
        .scales
        .iter()
        .map(|&a| {
            let r = CwtSpec::half_support(a) as i64;
            let norm = 1.0 / libm::sqrt(a);
            let kernel: Vec<Complex64> = (-r..=r)
                .map(|m| spec.wavelet.eval(m as f64 / a).conj() * norm)
                .collect();
            (0..n_cols)
                .map(|j| {
                    let b = (j * spec.time_downsample) as i64;
                    let lo = (b - r).max(0);
                    let hi = (b + r).min(len - 1);
                    (lo..=hi)
                        .map(|m| kernel[(m - b + r) as usize] * x[m as usize])
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

/// Scalogram (squared magnitude of the wavelet coefficients). Rows are
/// ordered from low to high pseudo-frequency, i.e. largest scale first.
pub fn cwt(clip: &AudioClip, spec: &CwtSpec) -> Result<TfRepresentation> {
    let coeffs = cwt_coefficients(clip, spec)?;
    let n_scales = coeffs.len();
    let n_cols = spec.n_columns(clip.len());
    let values = Matrix::from_fn(n_scales, n_cols, |r, c| coeffs[n_scales - 1 - r][c].norm_sqr());
    let mut bin_frequencies = spec.pseudo_frequencies();
    bin_frequencies.reverse();
    Ok(TfRepresentation {
        values,
        bin_frequencies,
        frame_times: (0..n_cols)
            .map(|j| (j * spec.time_downsample) as f64 / spec.sample_rate)
            .collect(),
        kind: TfKind::Cwt,
    })
}
