//! Mono clips, band-limited resampling and duration standardization.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::special::{bessel_i0, sinc};
use crate::{Result, CLIP_LEN, SAMPLE_RATE};

/// A mono signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    /// Fails on a zero sample rate or any non-finite sample.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(invalid!("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(invalid!("sample {i} is not finite"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Whether the clip already has the canonical rate and length.
    pub fn is_standard(&self) -> bool {
        self.sample_rate == SAMPLE_RATE && self.samples.len() == CLIP_LEN
    }
}

/// Kaiser-windowed sinc interpolator.
///
/// The defaults (64 zero crossings per side, beta = 14.77, passband rolloff
/// 0.9476) give a stopband attenuation well beyond 100 dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincResampler {
    pub zero_crossings: usize,
    pub beta: f64,
    pub rolloff: f64,
}

impl Default for SincResampler {
    fn default() -> Self {
        Self {
            zero_crossings: 64,
            beta: 14.769_656_459_379_492,
            rolloff: 0.947_593_7,
        }
    }
}

/// Phase tables are cached when there are at most this many distinct
/// fractional output positions.
const MAX_CACHED_PHASES: u64 = 4096;

impl SincResampler {
    /// Resamples `clip` to `target_rate`.
    ///
    /// The output has `round(len * target / source)` samples. Output sample
    /// `j` sits at source time `j * source / target`; the kernel is centered
    /// there (zero phase). Samples outside the clip are treated as absent and
    /// the taps that remain are renormalized to unit sum, so a constant
    /// signal stays constant up to the edges.
    pub fn resample(&self, clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
        if target_rate == 0 {
            return Err(invalid!("target sample rate must be positive"));
        }
        let source = clip.sample_rate as u64;
        let target = target_rate as u64;
        if source == target {
            return Ok(clip.clone());
        }
        let len = clip.samples.len() as u64;
        let out_len = ((len * target + source / 2) / source) as usize;
        if out_len == 0 {
            return AudioClip::new(Vec::new(), target_rate);
        }

        let cutoff = (target as f64 / source as f64).min(1.0) * self.rolloff;
        let half_width = self.zero_crossings as f64 / cutoff;
        let i0_beta = bessel_i0(self.beta);
        let kernel = |d: f64| -> f64 {
            let u = d * cutoff / self.zero_crossings as f64;
            if u.abs() >= 1.0 {
                return 0.0;
            }
            let window = bessel_i0(self.beta * libm::sqrt(1.0 - u * u)) / i0_beta;
            cutoff * sinc(cutoff * d) * window
        };

        // Offsets o such that |phase - o| < half_width for any phase in [0, 1).
        let lo_off = -(libm::floor(half_width) as i64);
        let hi_off = libm::ceil(half_width) as i64;
        let taps = (hi_off - lo_off + 1) as usize;
        let phase_weights = |p: u64| -> Vec<f64> {
            let frac = p as f64 / target as f64;
            (0..taps)
                .map(|t| kernel(frac - (lo_off + t as i64) as f64))
                .collect()
        };

        let g = gcd(source, target);
        let n_phases = target / g;
        let table: Option<Vec<Vec<f64>>> = (n_phases <= MAX_CACHED_PHASES).then(|| {
            (0..n_phases).map(|i| phase_weights(i * g)).collect()
        });

        let x = &clip.samples;
        let mut out = vec![0.0; out_len];
        for (j, y) in out.iter_mut().enumerate() {
            let num = j as u64 * source;
            let base = (num / target) as i64;
            let p = num % target;
            let owned;
            let weights: &[f64] = match &table {
                Some(t) => &t[(p / g) as usize],
                None => {
                    owned = phase_weights(p);
                    &owned
                }
            };
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for (t, &w) in weights.iter().enumerate() {
                let i = base + lo_off + t as i64;
                if i < 0 || i >= len as i64 {
                    continue;
                }
                acc += w * x[i as usize];
                wsum += w;
            }
            *y = if wsum.abs() > 1e-12 { acc / wsum } else { 0.0 };
        }
        AudioClip::new(out, target_rate)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Resamples with the default [`SincResampler`].
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    SincResampler::default().resample(clip, target_rate)
}

/// Pads with trailing zeros or truncates the tail so that the clip has
/// exactly [`CLIP_LEN`] samples.
///
/// The clip must already be at [`SAMPLE_RATE`].
pub fn standardize(clip: &AudioClip) -> Result<AudioClip> {
    if clip.sample_rate != SAMPLE_RATE {
        return Err(invalid!(
            "standardize expects {SAMPLE_RATE} Hz, got {} Hz",
            clip.sample_rate
        ));
    }
    let mut samples = clip.samples.clone();
    samples.resize(CLIP_LEN, 0.0);
    Ok(AudioClip {
        samples,
        sample_rate: SAMPLE_RATE,
    })
}

/// Resamples to [`SAMPLE_RATE`] and then standardizes the duration.
pub fn prepare(clip: &AudioClip) -> Result<AudioClip> {
    let resampled = resample(clip, SAMPLE_RATE)?;
    standardize(&resampled)
}
