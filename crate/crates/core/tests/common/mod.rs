//! Shared helpers and independent reference implementations for the
//! integration tests. Nothing here calls into the fast paths it is used to
//! check.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use tfrbench_core::audio::AudioClip;

pub const FS: f64 = 22050.0;

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn signal(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.range(-1.0, 1.0)).collect()
    }

    /// Log-uniform frequency in [lo, hi].
    pub fn log_freq(&mut self, lo: f64, hi: f64) -> f64 {
        lo * (hi / lo).powf(self.unit())
    }
}

pub fn clip(samples: Vec<f64>) -> AudioClip {
    AudioClip::new(samples, FS as u32).unwrap()
}

pub fn tone(freq: f64, phase: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 * (2.0 * PI * freq * i as f64 / FS + phase).sin())
        .collect()
}

/// Relative L2 distance `||a - b|| / ||b||`.
pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn rel_l2_real(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Direct O(L^2) windowed DFT of every centered, reflection-padded frame.
/// Returns `bins x frames`, row-major.
pub fn naive_stft(x: &[f64], window_len: usize, hop: usize) -> (usize, usize, Vec<Complex64>) {
    let half = window_len as i64 / 2;
    let n = x.len() as i64;
    let reflect = |i: i64| -> f64 {
        let j = if i < 0 {
            -i
        } else if i >= n {
            2 * (n - 1) - i
        } else {
            i
        };
        x[j as usize]
    };
    let frames = (0..).take_while(|t| t * hop <= x.len()).count();
    let bins = window_len / 2 + 1;
    let window: Vec<f64> = (0..window_len)
        .map(|m| 0.5 - 0.5 * (2.0 * PI * m as f64 / window_len as f64).cos())
        .collect();
    // e^{-2 pi i j / L}, indexed by (k m) mod L.
    let twiddle: Vec<Complex64> = (0..window_len)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / window_len as f64))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); bins * frames];
    for t in 0..frames {
        let start = (t * hop) as i64 - half;
        let frame: Vec<f64> = (0..window_len)
            .map(|m| reflect(start + m as i64) * window[m])
            .collect();
        for k in 0..bins {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, v) in frame.iter().enumerate() {
                acc += twiddle[(k * m) % window_len] * v;
            }
            out[k * frames + t] = acc;
        }
    }
    (bins, frames, out)
}

/// Direct evaluation of the CQT sum for every bin and hop-aligned frame.
pub fn naive_cqt(
    x: &[f64],
    n_bins: usize,
    bins_per_octave: usize,
    f_min: f64,
    hop: usize,
) -> Vec<Vec<Complex64>> {
    let q = 1.0 / (2f64.powf(1.0 / bins_per_octave as f64) - 1.0);
    let frames = 1 + x.len() / hop;
    (0..n_bins)
        .map(|k| {
            let fk = f_min * 2f64.powf(k as f64 / bins_per_octave as f64);
            let nk = (q * FS / fk).ceil() as usize;
            let atom: Vec<Complex64> = (0..nk)
                .map(|m| {
                    let w = 0.5 - 0.5 * (2.0 * PI * m as f64 / nk as f64).cos();
                    Complex64::from_polar(w, -2.0 * PI * m as f64 * q / nk as f64)
                })
                .collect();
            (0..frames)
                .map(|t| {
                    let start = (t * hop) as i64 - (nk / 2) as i64;
                    let mut acc = Complex64::new(0.0, 0.0);
                    // Only the part of the atom that overlaps the signal.
                    let lo = (-start).clamp(0, nk as i64) as usize;
                    let hi = (x.len() as i64 - start).clamp(0, nk as i64) as usize;
                    for m in lo..hi {
                        acc += atom[m] * x[(start + m as i64) as usize];
                    }
                    acc / nk as f64
                })
                .collect()
        })
        .collect()
}

/// Direct inner product `a^{-1/2} sum_m x[m] psi((m - b) / a)`. Samples
/// further than `20 a` from `b` are skipped: the Gaussian envelope there is
/// below `e^-200`, far beneath double precision relative to the sum.
pub fn naive_cwt(x: &[f64], scales: &[f64], downsample: usize) -> Vec<Vec<f64>> {
    let cols = 1 + (x.len() - 1) / downsample;
    scales
        .iter()
        .map(|&a| {
            let reach = (20.0 * a).ceil() as usize;
            // psi((d - reach) / a) / sqrt(a) for offsets d = m - b + reach.
            let psi: Vec<f64> = (0..=2 * reach)
                .map(|d| {
                    let t = (d as f64 - reach as f64) / a;
                    (5.0 * t).cos() * (-0.5 * t * t).exp() / a.sqrt()
                })
                .collect();
            (0..cols)
                .map(|j| {
                    let b = j * downsample;
                    let lo = b.saturating_sub(reach);
                    let hi = (b + reach + 1).min(x.len());
                    (lo..hi).map(|m| x[m] * psi[m + reach - b]).sum::<f64>()
                })
                .collect()
        })
        .collect()
}

/// Worst per-entry relative error between the analytic gradient of `net` and
/// central finite differences with step `h`, over every parameter.
///
/// Dropout is replayed from the same seed on every evaluation so the loss
/// surface being differentiated is fixed.
pub fn worst_gradient_error(
    net: &tfrbench_core::nn::Network,
    params: &tfrbench_core::nn::ParamSet,
    batch: &tfrbench_core::nn::Tensor,
    labels: &[usize],
    dropout_seed: Option<u64>,
    h: f64,
) -> (f64, String) {
    let eval = |p: &tfrbench_core::nn::ParamSet| {
        let mut rng = dropout_seed.map(ChaCha8Rng::seed_from_u64);
        net.loss_and_grads(p, batch, labels, rng.as_mut().map(|r| r as &mut dyn RngCore))
            .unwrap()
    };
    let (_, analytic) = eval(params);
    let mut worst = (0.0, String::new());
    let mut probe = params.clone();
    for i in 0..params.len() {
        for j in 0..params[i].data.len() {
            let orig = params[i].data[j];
            probe[i].data[j] = orig + h;
            let up = eval(&probe).0;
            probe[i].data[j] = orig - h;
            let down = eval(&probe).0;
            probe[i].data[j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let exact = analytic[i].data[j];
            let scale = exact.abs().max(numeric.abs()).max(1e-6);
            let err = (exact - numeric).abs() / scale;
            if err > worst.0 {
                worst = (err, format!("{}[{j}]: analytic {exact:e}, numeric {numeric:e}", params[i].name));
            }
        }
    }
    worst
}

/// Tiny-width version of a preset, cheap enough for exhaustive checks.
pub fn tiny_model(
    arch: tfrbench_core::nn::Architecture,
    filter: tfrbench_core::nn::FilterShape,
    n_classes: usize,
) -> tfrbench_core::nn::ModelConfig {
    let mut cfg = tfrbench_core::nn::ModelConfig::new(arch, filter, n_classes);
    for (i, s) in cfg.stages.iter_mut().enumerate() {
        s.channels = 3 + i;
    }
    cfg.dense_units = 6;
    cfg
}

/// Parameters with every entry (biases included) drawn uniformly from
/// `[-scale, scale]`, so no ReLU or pooling tie sits exactly on a kink.
pub fn random_params(
    net: &tfrbench_core::nn::Network,
    rng: &mut TestRng,
    scale: f64,
) -> tfrbench_core::nn::ParamSet {
    let mut p = net.init_params(0, 0.05);
    for param in p.iter_mut() {
        for v in param.data.iter_mut() {
            *v = rng.range(-scale, scale);
        }
    }
    p
}
