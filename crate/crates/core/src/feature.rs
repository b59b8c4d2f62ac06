//! Turning a time-frequency representation into a fixed-size CNN input.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::audio::AudioClip;
use crate::cqt::{cqt, CqtSpec};
use crate::cwt::{cwt, CwtSpec};
use crate::error::invalid;
use crate::mel::{mel_spectrogram, mfcc, MelFilterbank, MfccSpec};
use crate::stft::{linear_spectrogram, StftSpec};
use crate::{Matrix, Result, TfKind, TfRepresentation};

/// Lowest level kept by [`power_to_db`], relative to the maximum.
pub const DB_FLOOR: f64 = -80.0;

/// Lanczos kernel lobes.
pub const LANCZOS_A: f64 = 3.0;

/// Window-length preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Wide,
    Narrow,
}

impl Band {
    pub fn name(self) -> &'static str {
        match self {
            Band::Wide => "wide",
            Band::Narrow => "narrow",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "wide" => Some(Band::Wide),
            "narrow" => Some(Band::Narrow),
            _ => None,
        }
    }
}

/// Which representation to extract, and at which band preset.
///
/// CWT and MFCC only exist in the narrowband layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransformSpec {
    pub kind: TfKind,
    pub band: Band,
}

impl TransformSpec {
    pub fn new(kind: TfKind, band: Band) -> Result<Self> {
        if matches!(kind, TfKind::Cwt | TfKind::Mfcc) && band == Band::Wide {
            return Err(invalid!("{} has no wideband preset", kind.name()));
        }
        Ok(Self { kind, band })
    }

    /// Every valid preset: four kinds x two bands for the spectrograms, plus
    /// narrowband CWT and MFCC.
    pub fn all() -> Vec<TransformSpec> {
        let mut out = Vec::new();
        for kind in TfKind::ALL {
            for band in [Band::Wide, Band::Narrow] {
                if let Ok(s) = TransformSpec::new(kind, band) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// `(rows, cols)` of the resulting image: 154x12 wideband, 37x50
    /// otherwise.
    pub fn output_shape(&self) -> (usize, usize) {
        match self.band {
            Band::Wide => (154, 12),
            Band::Narrow => (37, 50),
        }
    }

    pub fn stft_spec(&self) -> StftSpec {
        match self.band {
            Band::Wide => StftSpec::WIDEBAND,
            Band::Narrow => StftSpec::NARROWBAND,
        }
    }

    pub fn mel_bands(&self) -> usize {
        match self.band {
            Band::Wide => MelFilterbank::WIDEBAND_BANDS,
            Band::Narrow => MelFilterbank::NARROWBAND_BANDS,
        }
    }

    pub fn cqt_spec(&self, sample_rate: f64) -> CqtSpec {
        match self.band {
            Band::Wide => CqtSpec::wideband(sample_rate),
            Band::Narrow => CqtSpec::narrowband(sample_rate),
        }
    }

    /// Raw representation before dB scaling and resizing.
    pub fn transform(&self, clip: &AudioClip) -> Result<TfRepresentation> {
        let fs = clip.sample_rate() as f64;
        match self.kind {
            TfKind::LinearStft => linear_spectrogram(clip, &self.stft_spec()),
            TfKind::Mel => {
                let stft = self.stft_spec();
                let fb = MelFilterbank::new(self.mel_bands(), stft.n_bins(), fs, 0.0, fs / 2.0)?;
                mel_spectrogram(&linear_spectrogram(clip, &stft)?, &fb)
            }
            TfKind::Cqt => cqt(clip, &self.cqt_spec(fs)),
            TfKind::Cwt => cwt(clip, &CwtSpec::preset(fs)),
            TfKind::Mfcc => mfcc(clip, &MfccSpec::default()),
        }
    }
}

/// Normalized CNN input image, rows = frequency (low to high).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureImage {
    pub values: Matrix,
    pub kind: TfKind,
}

impl FeatureImage {
    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    /// 8-bit grey levels, `round((v + 1) / 2 * 255)` with halves rounded up,
    /// flipped so that the first output row is the highest frequency.
    pub fn to_grayscale(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in (0..self.rows()).rev() {
            out.extend(self.values.row(r).iter().map(|&v| gray_level(v)));
        }
        out
    }

    /// Inverse of [`FeatureImage::to_grayscale`] up to quantization.
    pub fn from_grayscale(rows: usize, cols: usize, pixels: &[u8], kind: TfKind) -> Result<Self> {
        if pixels.len() != rows * cols {
            return Err(invalid!("expected {} pixels, got {}", rows * cols, pixels.len()));
        }
        let values = Matrix::from_fn(rows, cols, |r, c| {
            pixels[(rows - 1 - r) * cols + c] as f64 / 255.0 * 2.0 - 1.0
        });
        Ok(Self { values, kind })
    }
}

fn gray_level(v: f64) -> u8 {
    let scaled = (v.clamp(-1.0, 1.0) + 1.0) / 2.0 * 255.0;
    libm::floor(scaled + 0.5) as u8
}

/// `10 log10(p / max)` floored at -80 dB. An all-zero input maps to -80
/// everywhere.
pub fn power_to_db(tf: &TfRepresentation) -> Result<TfRepresentation> {
    if tf.kind == TfKind::Mfcc {
        return Err(invalid!("MFCC coefficients are not powers"));
    }
    if tf.values.as_slice().iter().any(|&p| p < 0.0) {
        return Err(invalid!("negative power in {:?} representation", tf.kind));
    }
    let p_ref = tf.values.min_max().map_or(0.0, |(_, hi)| hi);
    let values = if p_ref > 0.0 {
        tf.values.map(|p| {
            let db = 10.0 * libm::log10(p.max(f64::MIN_POSITIVE) / p_ref);
            db.max(DB_FLOOR)
        })
    } else {
        tf.values.map(|_| DB_FLOOR)
    };
    Ok(TfRepresentation {
        values,
        ..tf.clone()
    })
}

/// Affine map of `[min, max]` onto `[-1, 1]`; a constant matrix becomes all
/// zeros.
pub fn normalize(values: &Matrix) -> Matrix {
    match values.min_max() {
        Some((lo, hi)) if hi > lo => {
            let span = hi - lo;
            values.map(|v| (2.0 * (v - lo) / span - 1.0).clamp(-1.0, 1.0))
        }
        _ => values.map(|_| 0.0),
    }
}

/// `sinc(x) sinc(x / 3)` on `|x| < 3`.
pub fn lanczos_kernel(x: f64) -> f64 {
    if x.abs() >= LANCZOS_A {
        return 0.0;
    }
    if x.abs() < 1e-12 {
        return 1.0;
    }
    let px = PI * x;
    LANCZOS_A * libm::sin(px) * libm::sin(px / LANCZOS_A) / (px * px)
}

/// Sparse resampling weights along one axis: for each output index, the first
/// input index and the unit-sum weights starting there.
pub fn lanczos_weights(src: usize, dst: usize) -> Vec<(usize, Vec<f64>)> {
    // Pixel-centre alignment; for downscaling the kernel is stretched by the
    // scale factor so that it also acts as the anti-aliasing filter.
    let scale = src as f64 / dst as f64;
    let stretch = scale.max(1.0);
    let support = LANCZOS_A * stretch;
    (0..dst)
        .map(|i| {
            let center = (i as f64 + 0.5) * scale;
            let lo = libm::floor(center - support).max(0.0) as usize;
            let hi = (libm::ceil(center + support) as usize).min(src);
            let mut w: Vec<f64> = (lo..hi)
                .map(|j| lanczos_kernel((j as f64 + 0.5 - center) / stretch))
                .collect();
            let total: f64 = w.iter().sum();
            if total != 0.0 {
                w.iter_mut().for_each(|v| *v /= total);
            }
            (lo, w)
        })
        .collect()
}

/// Separable Lanczos-3 resize: frequency axis (rows) first, then time.
pub fn lanczos_resize(values: &Matrix, rows: usize, cols: usize) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(invalid!("target dimensions must be positive"));
    }
    if values.rows() == 0 || values.cols() == 0 {
        return Err(invalid!("cannot resize an empty matrix"));
    }
    let row_w = lanczos_weights(values.rows(), rows);
    let mut tmp = Matrix::zeros(rows, values.cols());
    for (r, (start, w)) in row_w.iter().enumerate() {
        for (k, &wk) in w.iter().enumerate() {
            let src = values.row(start + k);
            for (o, &s) in tmp.row_mut(r).iter_mut().zip(src) {
                *o += wk * s;
            }
        }
    }
    let col_w = lanczos_weights(values.cols(), cols);
    let mut out = Matrix::zeros(rows, cols);
    for r in 0..rows {
        let src = tmp.row(r);
        for (c, (start, w)) in col_w.iter().enumerate() {
            out[(r, c)] = w.iter().zip(&src[*start..]).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}

/// Full pipeline: transform, dB (except MFCC), normalize, resize, clamp.
pub fn extract_feature(clip: &AudioClip, spec: &TransformSpec) -> Result<FeatureImage> {
    if !clip.is_standard() {
        return Err(invalid!(
            "feature extraction needs a standardized clip ({} samples at {} Hz), got {} at {} Hz",
            crate::CLIP_LEN,
            crate::SAMPLE_RATE,
            clip.len(),
            clip.sample_rate()
        ));
    }
    let tf = spec.transform(clip)?;
    image_from_representation(&tf, spec)
}

/// The post-transform half of [`extract_feature`].
pub fn image_from_representation(
    tf: &TfRepresentation,
    spec: &TransformSpec,
) -> Result<FeatureImage> {
    let scaled = if tf.kind == TfKind::Mfcc {
        tf.values.clone()
    } else {
        power_to_db(tf)?.values
    };
    let (rows, cols) = spec.output_shape();
    let resized = lanczos_resize(&normalize(&scaled), rows, cols)?;
    Ok(FeatureImage {
        values: resized.map(|v| v.clamp(-1.0, 1.0)),
        kind: tf.kind,
    })
}
