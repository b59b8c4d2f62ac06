mod common;

use std::path::Path;

use tfrbench::manifest::Manifest;
use tfrbench::wav::{load_standard, load_wav, write_wav};
use tfrbench::{checkpoint, png_io, tfr1};
use tfrbench_core::audio::AudioClip;
use tfrbench_core::feature::FeatureImage;
use tfrbench_core::nn::{Architecture, FilterShape, ModelConfig, Network};
use tfrbench_core::{Matrix, TfKind};

fn write_raw_wav(path: &Path, channels: u16, bits: u16, float: bool, samples: &[i64], fs: u32) {
    let spec = hound::WavSpec {
        channels,
        sample_rate: fs,
        bits_per_sample: bits,
        sample_format: if float {
            hound::SampleFormat::Float
        } else {
            hound::SampleFormat::Int
        },
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        if float {
            w.write_sample(s as f32 / 1000.0).unwrap();
        } else {
            w.write_sample(s as i32).unwrap();
        }
    }
    w.finalize().unwrap();
}

#[test]
fn int16_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.wav");
    write_raw_wav(&p, 1, 16, false, &[0, 16384, -16384, -32768], 22050);
    let clip = load_wav(&p).unwrap();
    assert_eq!(clip.samples(), &[0.0, 0.5, -0.5, -1.0]);
    assert_eq!(clip.sample_rate(), 22050);
}

#[test]
fn stereo_is_averaged() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.wav");
    // Frames (0.2, 0.6) and (-1, 0) as 32-bit float.
    write_raw_wav(&p, 2, 32, true, &[200, 600, -1000, 0], 8000);
    let clip = load_wav(&p).unwrap();
    assert_eq!(clip.len(), 2);
    assert!((clip.samples()[0] - 0.4).abs() < 1e-7);
    assert!((clip.samples()[1] + 0.5).abs() < 1e-7);
}

#[test]
fn bit_depth_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = common::Rng::new(4);
    let samples: Vec<f64> = (0..1000).map(|_| rng.range(-0.99, 0.99)).collect();
    let clip = AudioClip::new(samples.clone(), 16000).unwrap();
    for (bits, tol) in [(8, 1.0 / 128.0), (16, 1.0 / 32768.0), (24, 1e-6), (32, 1e-9), (0, 1e-7)] {
        let p = dir.path().join(format!("r{bits}.wav"));
        write_wav(&p, &clip, bits).unwrap();
        let back = load_wav(&p).unwrap();
        assert_eq!(back.sample_rate(), 16000);
        let worst = back
            .samples()
            .iter()
            .zip(&samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst <= tol, "{bits}-bit: error {worst}");
    }
}

#[test]
fn bad_audio_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.wav");
    write_raw_wav(&empty, 1, 16, false, &[], 22050);
    assert!(load_wav(&empty).is_err());
    let junk = dir.path().join("junk.wav");
    std::fs::write(&junk, b"RIFF....not a wave file").unwrap();
    assert!(load_wav(&junk).is_err());
    assert!(load_wav(&dir.path().join("missing.wav")).is_err());
    let quad = dir.path().join("quad.wav");
    write_raw_wav(&quad, 4, 16, false, &[1, 2, 3, 4], 22050);
    assert!(load_wav(&quad).is_err());
}

#[test]
fn standard_load_resamples_and_pads() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("short.wav");
    let clip = common::synth_clip(0, &mut common::Rng::new(1), 44100, 2.0);
    write_wav(&p, &clip, 16).unwrap();
    let std_clip = load_standard(&p).unwrap();
    assert_eq!((std_clip.len(), std_clip.sample_rate()), (88200, 22050));
    assert!(std_clip.samples()[44100..].iter().all(|&s| s == 0.0));
    assert!(std_clip.samples()[..44100].iter().any(|&s| s != 0.0));
}

#[test]
fn manifest_parsing() {
    let m = Manifest::parse(b"path,label,fold\r\na.wav,0,1\r\nb.wav,2,2\r\nsub/c.wav,1,3\r\n", "/data".into())
        .unwrap();
    assert_eq!(m.len(), 3);
    assert_eq!((m.n_classes(), m.n_folds()), (3, 3));
    assert_eq!(m.resolve(&m.entries[2]), Path::new("/data/sub/c.wav"));
    assert!(m.validate_folds(3).is_ok());
    assert!(m.validate_folds(2).is_err());
    assert!(m.validate_folds(4).is_err());

    // Column order is free.
    let m = Manifest::parse(b"fold,path,label\n2,x.wav,5\n", "".into()).unwrap();
    assert_eq!((m.entries[0].fold, m.entries[0].label), (2, 5));

    for bad in [
        &b"path,label\na.wav,0\n"[..],
        b"path,label,fold\na.wav,zero,1\n",
        b"path,label,fold\na.wav,0,1.5\n",
        b"path,label,fold\na.wav,0,0\n",
        b"path,label,fold\na.wav,-1,1\n",
        b"path,label,fold\na.wav,0,1\na.wav,1,2\n",
    ] {
        assert!(Manifest::parse(bad, "".into()).is_err(), "{}", String::from_utf8_lossy(bad));
    }
    let empty = Manifest::parse(b"path,label,fold\n", "".into()).unwrap();
    assert!(empty.is_empty());
}

#[test]
fn esc50_style_manifest_counts() {
    let mut text = String::from("path,label,fold\n");
    for i in 0..2000 {
        text.push_str(&format!("{}-{i}.wav,{},{}\n", 1 + i % 5, i % 50, 1 + i % 5));
    }
    let m = Manifest::parse(text.as_bytes(), "".into()).unwrap();
    assert_eq!(m.n_classes(), 50);
    assert!(m.fold_counts().values().all(|&c| c == 400));
    assert_eq!(m.fold_counts().len(), 5);
}

fn sample_image(rows: usize, cols: usize, kind: TfKind) -> FeatureImage {
    let mut rng = common::Rng::new(rows as u64);
    FeatureImage {
        values: Matrix::from_fn(rows, cols, |_, _| rng.range(-1.0, 1.0)),
        kind,
    }
}

#[test]
fn tfr1_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let img = sample_image(37, 50, TfKind::Cqt);
    let p = dir.path().join("x.tfr");
    tfr1::write(&p, &img).unwrap();
    let bytes = std::fs::read(&p).unwrap();
    assert_eq!(bytes.len(), 16 + 4 * 1850);
    assert_eq!(&bytes[..4], b"TFR1");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 37);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 50);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), TfKind::Cqt.tag());
    let back = tfr1::read(&p).unwrap();
    assert_eq!(back.kind, TfKind::Cqt);
    for (a, b) in back.values.as_slice().iter().zip(img.values.as_slice()) {
        assert_eq!(*a, *b as f32 as f64);
    }

    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(tfr1::decode(&bad, &p).is_err());
    assert!(tfr1::decode(&bytes[..bytes.len() - 1], &p).is_err());
    assert!(tfr1::decode(&bytes[..10], &p).is_err());
    let mut bad = bytes.clone();
    bad[12] = 99;
    assert!(tfr1::decode(&bad, &p).is_err());
    let mut bad = bytes.clone();
    bad[16..20].copy_from_slice(&f32::NAN.to_le_bytes());
    assert!(tfr1::decode(&bad, &p).is_err());
}

#[test]
fn png_levels_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let zeros = FeatureImage {
        values: Matrix::zeros(154, 12),
        kind: TfKind::LinearStft,
    };
    let p = dir.path().join("z.png");
    png_io::export_png(&zeros, &p).unwrap();
    let back = png_io::import_png(&p, TfKind::LinearStft).unwrap();
    assert_eq!((back.rows(), back.cols()), (154, 12));
    assert_eq!(zeros.to_grayscale(), vec![128; 1848]);

    let extremes = FeatureImage {
        values: Matrix::from_vec(2, 1, vec![-1.0, 1.0]),
        kind: TfKind::Mel,
    };
    // Highest-frequency row is drawn first.
    assert_eq!(extremes.to_grayscale(), vec![255, 0]);

    let img = sample_image(37, 50, TfKind::Mel);
    let p = dir.path().join("r.png");
    png_io::export_png(&img, &p).unwrap();
    let first = std::fs::read(&p).unwrap();
    png_io::export_png(&img, &p).unwrap();
    assert_eq!(first, std::fs::read(&p).unwrap());
    let back = png_io::import_png(&p, TfKind::Mel).unwrap();
    for (a, b) in back.values.as_slice().iter().zip(img.values.as_slice()) {
        assert!((a - b).abs() <= 1.0 / 255.0 + 1e-12);
    }
}

#[test]
fn checkpoint_round_trip_and_digest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ModelConfig::new(Architecture::Conv5, FilterShape::FreqSpanning, 10);
    let net = Network::new(&cfg, 37, 50).unwrap();
    let params = net.init_params(3, 0.05);
    let p = dir.path().join("m.nnck");
    checkpoint::save(&p, &net, &params).unwrap();
    let back = checkpoint::load(&p, &net).unwrap();
    for (a, b) in back.iter().zip(params.iter()) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.shape, b.shape);
        for (x, y) in a.data.iter().zip(&b.data) {
            assert_eq!(*x, *y as f32 as f64);
        }
    }
    let bytes = std::fs::read(&p).unwrap();
    assert_eq!(&bytes[..4], b"NNCK");

    let other = Network::new(&ModelConfig::new(Architecture::Conv5, FilterShape::FreqSpanning, 11), 37, 50).unwrap();
    assert!(checkpoint::load(&p, &other).is_err());
    assert!(checkpoint::decode(&bytes[..bytes.len() - 4], &net, &p).is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(checkpoint::decode(&extra, &net, &p).is_err());
}
