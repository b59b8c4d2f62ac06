//! Synthetic audio fixtures for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use tfrbench::wav::write_wav;
use tfrbench_core::audio::AudioClip;

pub const CLASS_NAMES: [&str; 4] = ["tone", "chirp", "noise-burst", "am-tone"];

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo * (hi / lo).powf(self.unit())
    }
}

/// One clip of `class` (index into [`CLASS_NAMES`]), `seconds` long.
pub fn synth_clip(class: usize, rng: &mut Rng, rate: u32, seconds: f64) -> AudioClip {
    let n = (seconds * rate as f64).round() as usize;
    let fs = rate as f64;
    let amp = rng.range(0.2, 0.7);
    let samples: Vec<f64> = match class {
        0 => {
            let f = rng.log_range(200.0, 4000.0);
            let ph = rng.range(0.0, 2.0 * PI);
            (0..n).map(|i| amp * (2.0 * PI * f * i as f64 / fs + ph).sin()).collect()
        }
        1 => {
            let (f0, f1) = if rng.unit() < 0.5 {
                (rng.log_range(150.0, 600.0), rng.log_range(2000.0, 6000.0))
            } else {
                (rng.log_range(2000.0, 6000.0), rng.log_range(150.0, 600.0))
            };
            let dur = n as f64 / fs;
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    amp * (2.0 * PI * (f0 * t + 0.5 * (f1 - f0) / dur * t * t)).sin()
                })
                .collect()
        }
        2 => {
            let len = rng.range(0.4, 1.5);
            let start = rng.range(0.0, seconds - len);
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    if t >= start && t < start + len {
                        amp * rng.range(-1.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        3 => {
            let f = rng.log_range(200.0, 4000.0);
            let fm = rng.range(2.0, 6.0);
            let ph = rng.range(0.0, 2.0 * PI);
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    let env = 0.5 * (1.0 - (2.0 * PI * fm * t + ph).cos());
                    amp * env * (2.0 * PI * f * t).sin()
                })
                .collect()
        }
        _ => panic!("unknown class {class}"),
    };
    AudioClip::new(samples, rate).unwrap()
}

/// Writes `per_class` clips of each class as 16-bit WAVs under `dir/audio`,
/// spread evenly over `folds` folds, plus `dir/manifest.csv`.
///
/// Every fifth clip is written at 44100 Hz and every seventh at 16000 Hz so
/// the resampler is part of the pipeline; lengths vary around four seconds so
/// padding and clipping are exercised too.
pub fn write_synthetic_dataset(dir: &Path, per_class: usize, folds: usize, seed: u64) -> PathBuf {
    let audio = dir.join("audio");
    std::fs::create_dir_all(&audio).unwrap();
    let mut rng = Rng::new(seed);
    let mut manifest = String::from("path,label,fold\n");
    for i in 0..per_class {
        for (class, name) in CLASS_NAMES.iter().enumerate() {
            let idx = i * CLASS_NAMES.len() + class;
            let rate = if idx % 5 == 4 {
                44100
            } else if idx % 7 == 6 {
                16000
            } else {
                22050
            };
            let seconds = rng.range(3.5, 4.5);
            let clip = synth_clip(class, &mut rng, rate, seconds);
            let rel = format!("audio/{name}_{i:03}.wav");
            write_wav(&dir.join(&rel), &clip, 16).unwrap();
            writeln!(manifest, "{rel},{class},{}", 1 + i % folds).unwrap();
        }
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest).unwrap();
    path
}
