//! PCM WAV input (and output, for fixtures and round trips).

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use tfrbench_core::audio::{self, AudioClip};

use crate::error::{Error, Result};

/// Reads 8/16/24/32-bit integer or 32-bit float PCM, mono or stereo.
///
/// Integers of `b` bits are scaled by `2^-(b-1)`; stereo frames are averaged
/// to mono.
pub fn load_wav(path: &Path) -> Result<AudioClip> {
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let reader = WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 || channels > 2 {
        return Err(Error::format(path, format!("{channels} channels (need 1 or 2)")));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err)?
        }
        (format, bits) => {
            return Err(Error::format(
                path,
                format!("unsupported encoding: {bits}-bit {format:?}"),
            ))
        }
    };
    if interleaved.len() < channels {
        return Err(Error::format(path, "no audio frames"));
    }
    let samples: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    Ok(AudioClip::new(samples, spec.sample_rate)?)
}

/// Loads, resamples to 22050 Hz and pads/clips to four seconds.
pub fn load_standard(path: &Path) -> Result<AudioClip> {
    Ok(audio::prepare(&load_wav(path)?)?)
}

/// Writes a mono integer PCM file of the given bit depth (8, 16, 24 or 32),
/// or 32-bit float when `bits` is 0. Samples are clamped to `[-1, 1]`.
pub fn write_wav(path: &Path, clip: &AudioClip, bits: u16) -> Result<()> {
    let float = bits == 0;
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: if float { 32 } else { bits },
        sample_format: if float {
            SampleFormat::Float
        } else {
            SampleFormat::Int
        },
    };
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    if !float && !matches!(bits, 8 | 16 | 24 | 32) {
        return Err(Error::format(path, format!("cannot write {bits}-bit PCM")));
    }
    let mut writer = WavWriter::create(path, spec).map_err(wav_err)?;
    for &s in clip.samples() {
        let s = s.clamp(-1.0, 1.0);
        if float {
            writer.write_sample(s as f32).map_err(wav_err)?;
        } else {
            let full = (1i64 << (bits - 1)) as f64;
            let v = (s * full).round().clamp(-full, full - 1.0) as i32;
            writer.write_sample(v).map_err(wav_err)?;
        }
    }
    writer.finalize().map_err(wav_err)
}
