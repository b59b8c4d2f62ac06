//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p tfrbench --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod oracles;

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use oracles::{clip, naive_cqt, naive_cwt, naive_stft, rel_l2, rel_l2_real, tone, TestRng, FS};
use tfrbench::manifest::Manifest;
use tfrbench::pipeline::{extract_all, load_dataset, resolve_transform, train_dataset, TrainJob};
use tfrbench_core::bench::{anova_tukey, median_mad};
use tfrbench_core::cqt::{cqt, cqt_center_frequencies, cqt_coefficients, CqtKernel, CqtSpec};
use tfrbench_core::cwt::{cwt, cwt_coefficients, CwtSpec};
use tfrbench_core::feature::{extract_feature, Band, TransformSpec};
use tfrbench_core::mel::{mel_spectrogram, MelFilterbank};
use tfrbench_core::nn::{Architecture, FilterShape, ModelConfig, Network, Tensor, TrainConfig};
use tfrbench_core::stft::{linear_spectrogram, stft, StftSpec};
use tfrbench_core::{TfRepresentation, CLIP_LEN};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Epochs and batch size for the synthetic end-to-end run.
const SYNTH_EPOCHS: usize = 20;
const SYNTH_BATCH: usize = 20;

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 transform oracle equivalence", transform_oracles),
        ("2 tone localization", tone_localization),
        ("3 shape contract", shape_contract),
        ("4 gradient correctness", gradient_correctness),
        ("5 synthetic end-to-end", synthetic_end_to_end),
        ("6 statistics", statistics),
        ("7 determinism", determinism),
        ("8 full-dataset reproduction", full_dataset),
    ];
    // Optional positional arguments select criteria by number; libtest-style
    // flags passed by `cargo test` are ignored.
    let selected: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        let number = name.split(' ').next().unwrap_or_default();
        if !selected.is_empty() && !selected.iter().any(|s| s == number) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check)
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) if detail.starts_with("SKIPPED") => println!("SKIP {name}: {detail} [{secs:.1}s]"),
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_secs: u64, what: &str) -> Result<(), String> {
    if elapsed > Duration::from_secs(limit_secs) {
        Err(format!("{what} took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64()))
    } else {
        Ok(())
    }
}

fn flat<T: Copy>(rows: &[Vec<T>]) -> Vec<T> {
    rows.iter().flatten().copied().collect()
}

fn transform_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = TestRng::new(2024);
    let cqt_spec = CqtSpec::narrowband(FS);
    let kernel = CqtKernel::new(&cqt_spec).map_err(|e| e.to_string())?;
    let cwt_spec = CwtSpec::log_spaced(256, 100.0, FS / 2.0, FS, 64);
    let (mut stft_err, mut cqt_err, mut cwt_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut spent = [Duration::ZERO; 3];
    for _ in 0..20 {
        let lap = Instant::now();
        let x = rng.signal(4096);
        let c = clip(x.clone());
        for spec in [StftSpec::NARROWBAND, StftSpec::WIDEBAND] {
            let fast = stft(&c, &spec).map_err(|e| e.to_string())?;
            let (bins, frames, slow) = naive_stft(&x, spec.window_length, spec.hop);
            if (fast.n_bins(), fast.n_frames()) != (bins, frames) {
                return Err(format!("STFT shape {}x{}", fast.n_bins(), fast.n_frames()));
            }
            stft_err = stft_err.max(rel_l2(fast.as_slice(), &slow));
        }
        spent[0] += lap.elapsed();
        let lap = Instant::now();
        let fast = cqt_coefficients(&c, &kernel).map_err(|e| e.to_string())?;
        let slow = naive_cqt(&x, cqt_spec.n_bins, cqt_spec.bins_per_octave, cqt_spec.f_min, cqt_spec.hop);
        cqt_err = cqt_err.max(rel_l2(&flat(&fast), &flat(&slow)));
        spent[1] += lap.elapsed();
        let lap = Instant::now();
        let fast: Vec<f64> = flat(&cwt_coefficients(&c, &cwt_spec).map_err(|e| e.to_string())?)
            .into_iter()
            .map(|v: Complex64| v.re)
            .collect();
        let slow = flat(&naive_cwt(&x, &cwt_spec.scales, cwt_spec.time_downsample));
        cwt_err = cwt_err.max(rel_l2_real(&fast, &slow));
        spent[2] += lap.elapsed();
    }
    let timing = format!(
        "STFT {:.1}s, CQT {:.1}s, CWT {:.1}s",
        spent[0].as_secs_f64(),
        spent[1].as_secs_f64(),
        spent[2].as_secs_f64()
    );
    within(start.elapsed(), 30, "oracle comparison").map_err(|e| format!("{e} ({timing})"))?;
    check(
        stft_err < 1e-6 && cqt_err < 1e-5 && cwt_err < 1e-5,
        format!("worst relative L2: STFT {stft_err:.2e} (<1e-6), CQT {cqt_err:.2e} (<1e-5), CWT {cwt_err:.2e} (<1e-5)"),
    )
}

fn nearest(freqs: &[f64], f: f64) -> usize {
    freqs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 / f).ln().abs().total_cmp(&(b.1 / f).ln().abs()))
        .map(|(i, _)| i)
        .unwrap()
}

/// Worst argmax distance from `target` over interior frames: those where the
/// widest analysis support of any row, `[center - half, center + half]`, lies
/// inside the clip. Near the edges the long low-frequency atoms see the
/// tone's abrupt onset, which can outweigh a real-valued coefficient caught
/// at a zero crossing.
fn worst_offset(
    tf: &TfRepresentation,
    target: usize,
    center: impl Fn(usize) -> usize,
    half: usize,
) -> Result<usize, String> {
    let mut worst = 0;
    let mut interior = 0;
    for (t, &k) in tf.frame_argmax().iter().enumerate() {
        let c = center(t);
        if c >= half && c + half <= CLIP_LEN {
            interior += 1;
            worst = worst.max(k.abs_diff(target));
        }
    }
    if interior == 0 {
        return Err("no interior frames".into());
    }
    Ok(worst)
}

fn tone_localization() -> Outcome {
    let mut rng = TestRng::new(77);
    let cqt_spec = CqtSpec::narrowband(FS);
    let cqt_kernel = CqtKernel::new(&cqt_spec).map_err(|e| e.to_string())?;
    let cqt_freqs = cqt_center_frequencies(&cqt_spec).map_err(|e| e.to_string())?;
    let cwt_spec = CwtSpec::preset(FS);
    let mut failures = Vec::new();
    let mut worst = [0usize; 6];
    for _ in 0..20 {
        let f = rng.log_freq(100.0, 8000.0);
        let c = clip(tone(f, rng.range(0.0, std::f64::consts::TAU), CLIP_LEN));
        let mut record = |slot: usize, name: &str, offset: Result<usize, String>| match offset {
            Ok(d) => {
                worst[slot] = worst[slot].max(d);
                if d > 1 {
                    failures.push(format!("{name} {f:.1} Hz off by {d}"));
                }
            }
            Err(e) => failures.push(format!("{name} {f:.1} Hz: {e}")),
        };
        for (i, (spec, bands)) in [
            (StftSpec::NARROWBAND, MelFilterbank::NARROWBAND_BANDS),
            (StftSpec::WIDEBAND, MelFilterbank::WIDEBAND_BANDS),
        ]
        .into_iter()
        .enumerate()
        {
            let lin = linear_spectrogram(&c, &spec).map_err(|e| e.to_string())?;
            let center = |t: usize| t * spec.hop;
            let half = spec.window_length / 2;
            let bin_freqs: Vec<f64> =
                (0..lin.n_bins()).map(|k| k as f64 * FS / spec.dft_size as f64).collect();
            let target = (f * spec.dft_size as f64 / FS).round() as usize;
            debug_assert_eq!(target, nearest(&bin_freqs[1..], f) + 1);
            record(2 * i, &format!("linear L={}", spec.window_length), worst_offset(&lin, target, center, half));
            let fb = MelFilterbank::new(bands, spec.n_bins(), FS, 0.0, FS / 2.0).map_err(|e| e.to_string())?;
            let mel = mel_spectrogram(&lin, &fb).map_err(|e| e.to_string())?;
            let target = nearest(fb.centers(), f);
            record(2 * i + 1, &format!("mel M={bands}"), worst_offset(&mel, target, center, half));
        }
        let target = nearest(&cqt_freqs, f);
        let q = cqt(&c, &cqt_spec).map_err(|e| e.to_string())?;
        let half = cqt_kernel.lengths().iter().max().unwrap().div_ceil(2);
        record(4, "CQT", worst_offset(&q, target, |t| t * cqt_spec.hop, half));
        let w = cwt(&c, &cwt_spec).map_err(|e| e.to_string())?;
        let target = nearest(&w.bin_frequencies, f);
        let half = CwtSpec::half_support(*cwt_spec.scales.last().unwrap());
        record(5, "CWT", worst_offset(&w, target, |t| t * cwt_spec.time_downsample, half));
    }
    let summary = format!(
        "worst offsets: linear narrow {} / wide {}, mel narrow {} / wide {}, CQT {}, CWT {} (<=1)",
        worst[0], worst[2], worst[1], worst[3], worst[4], worst[5]
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn shape_contract() -> Outcome {
    let mut rng = TestRng::new(3);
    let noise = clip(rng.signal(CLIP_LEN));
    let mut seen = Vec::new();
    for spec in TransformSpec::all() {
        let img = extract_feature(&noise, &spec).map_err(|e| e.to_string())?;
        let want = if spec.band == Band::Wide { (154, 12, 1848) } else { (37, 50, 1850) };
        let got = (img.rows(), img.cols(), img.values.as_slice().len());
        if got != want {
            return Err(format!("{spec:?}: {got:?}, expected {want:?}"));
        }
        seen.push(format!("{}-{}={}x{}", spec.kind.name(), spec.band.name(), got.0, got.1));
    }
    check(seen.len() == 8, format!("{} presets: {}", seen.len(), seen.join(", ")))
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = TestRng::new(404);
    let mut worst = (0.0f64, String::new());
    for arch in [Architecture::Conv3, Architecture::Conv5] {
        for filter in [FilterShape::Square3x3, FilterShape::FreqSpanning] {
            let cfg = oracles::tiny_model(arch, filter, 3);
            let net = Network::new(&cfg, 8, 10).map_err(|e| e.to_string())?;
            let params = oracles::random_params(&net, &mut rng, 0.5);
            let batch = Tensor::from_vec(&[4, 1, 8, 10], rng.signal(4 * 80));
            let labels = [0, 2, 1, 2];
            for dropout in [None, Some(9)] {
                let (err, at) = oracles::worst_gradient_error(&net, &params, &batch, &labels, dropout, 1e-4);
                if err > worst.0 {
                    worst = (err, format!("{}/{} {at}", arch.name(), filter.name()));
                }
            }
        }
    }
    within(start.elapsed(), 60, "gradient check")?;
    check(worst.0 < 1e-4, format!("worst relative error {:.2e} (<1e-4) at {}", worst.0, worst.1))
}

fn synthetic_end_to_end() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest_path = common::write_synthetic_dataset(dir.path(), 50, 5, 1);
    let manifest = Manifest::load(&manifest_path).map_err(|e| e.to_string())?;
    let spec = resolve_transform("mel-stft", "narrow").map_err(|e| e.to_string())?;
    let features = dir.path().join("features");
    let summary = extract_all(&manifest, &spec, &features, 1).map_err(|e| e.to_string())?;
    if !summary.failures.is_empty() || summary.written != 200 {
        return Err(format!("extracted {} of 200", summary.written));
    }
    let data = load_dataset(&manifest, &spec, &features).map_err(|e| e.to_string())?;
    let job = TrainJob {
        spec,
        model: ModelConfig::new(Architecture::Conv3, FilterShape::Square3x3, 4),
        train: TrainConfig {
            epochs: SYNTH_EPOCHS,
            batch_size: SYNTH_BATCH,
            seed: 1,
            ..TrainConfig::default()
        },
        k_folds: 5,
        n_runs: 1,
        workers: 1,
    };
    let outcome = train_dataset(&data, &job, &|_| {}).map_err(|e| e.to_string())?;
    within(start.elapsed(), 600, "synthetic benchmark")?;
    let median = outcome.report.median;
    check(
        median >= 0.90,
        format!(
            "median accuracy {:.1}% (>=90%), folds {:?}",
            100.0 * median,
            outcome.report.accuracy_values()
        ),
    )
}

fn statistics() -> Outcome {
    let (m, mad) = median_mad(&[1.0, 2.0, 3.0, 4.0, 100.0]).map_err(|e| e.to_string())?;
    if (m, mad) != (3.0, 1.0) {
        return Err(format!("median/MAD ({m}, {mad}), expected (3, 1)"));
    }
    // Three groups of five with means 5, 7, 9 and deviations -1,-1,0,1,1.
    let groups: Vec<Vec<f64>> = [5.0, 7.0, 9.0]
        .iter()
        .map(|mu| [-1.0, -1.0, 0.0, 1.0, 1.0].iter().map(|d| mu + d).collect())
        .collect();
    let cmp = anova_tukey(&groups, 0.05).map_err(|e| e.to_string())?;
    let oracle = brute_force_anova(&groups);
    let mut worst = (cmp.f - oracle.f).abs() / oracle.f;
    for pair in &cmp.pairs {
        let q = oracle.q[pair.a][pair.b];
        worst = worst.max((pair.q - q).abs() / q);
    }
    if worst >= 1e-6 || cmp.top != [2] {
        return Err(format!("F {} vs {}, worst rel error {worst:e}, top {:?}", cmp.f, oracle.f, cmp.top));
    }
    let same = vec![vec![0.5, 0.6, 0.7]; 3];
    let tie = anova_tukey(&same, 0.05).map_err(|e| e.to_string())?;
    check(
        tie.top == [0, 1, 2],
        format!("median/MAD (3, 1); textbook F {:.6} rel error {worst:.1e}; identical groups top {:?}", cmp.f, tie.top),
    )
}

struct AnovaOracle {
    f: f64,
    q: Vec<Vec<f64>>,
}

/// Sums of squares by explicit double loops over every observation.
fn brute_force_anova(groups: &[Vec<f64>]) -> AnovaOracle {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let grand = all.iter().sum::<f64>() / n;
    let means: Vec<f64> = groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect();
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for (g, mean) in groups.iter().zip(&means) {
        for &x in g {
            ssb += (mean - grand) * (mean - grand);
            ssw += (x - mean) * (x - mean);
        }
    }
    let k = groups.len() as f64;
    let msw = ssw / (n - k);
    let f = (ssb / (k - 1.0)) / msw;
    let q = (0..groups.len())
        .map(|i| {
            (0..groups.len())
                .map(|j| {
                    let se = (msw / 2.0 * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
                    (means[i] - means[j]).abs() / se
                })
                .collect()
        })
        .collect();
    AnovaOracle { f, q }
}

fn tfrbench(args: &[&str], cache: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tfrbench"))
        .args(args)
        .env("TFRBENCH_CACHE", cache)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("tfrbench {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn dir_bytes(dir: &Path) -> Result<Vec<(PathBuf, Vec<u8>)>, String> {
    let mut files: Vec<(PathBuf, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let path = e.map_err(|e| e.to_string())?.path();
            let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
            Ok((PathBuf::from(path.file_name().unwrap()), bytes))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let manifest = common::write_synthetic_dataset(root, 6, 3, 5);
    let m = manifest.to_str().unwrap();
    let mut features = Vec::new();
    let mut reports = Vec::new();
    for (i, workers) in ["1", "2"].iter().enumerate() {
        let feat = root.join(format!("features{i}"));
        let out = root.join(format!("run{i}"));
        let (f, o) = (feat.to_str().unwrap(), out.to_str().unwrap());
        tfrbench(&["extract", "--manifest", m, "--transform", "mel-stft", "--out", f, "--workers", workers], root)?;
        tfrbench(
            &[
                "train", "--manifest", m, "--transform", "mel-stft", "--features", f, "--epochs", "2",
                "--batch-size", "8", "--seed", "42", "--workers", workers, "--out", o, "--quiet",
            ],
            root,
        )?;
        features.push(dir_bytes(&feat)?);
        reports.push(dir_bytes(&out)?);
    }
    if features[0].len() != 24 {
        return Err(format!("{} feature files, expected 24", features[0].len()));
    }
    if features[0] != features[1] {
        return Err("feature files differ between runs".into());
    }
    check(
        reports[0] == reports[1],
        format!(
            "{} feature files and {} training outputs byte-identical across runs",
            features[0].len(),
            reports[0].len()
        ),
    )
}

/// Runs one full benchmark from a user-supplied manifest.
fn reproduce(manifest: &str, band: &str, folds: usize, target: f64) -> Outcome {
    let manifest = Manifest::load(Path::new(manifest)).map_err(|e| e.to_string())?;
    let spec = resolve_transform("mel-stft", band).map_err(|e| e.to_string())?;
    let features = tempfile::tempdir().map_err(|e| e.to_string())?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let summary = extract_all(&manifest, &spec, features.path(), workers).map_err(|e| e.to_string())?;
    if !summary.failures.is_empty() {
        return Err(format!("{} clips failed to extract", summary.failures.len()));
    }
    let data = load_dataset(&manifest, &spec, features.path()).map_err(|e| e.to_string())?;
    let job = TrainJob {
        spec,
        model: ModelConfig::new(Architecture::Conv3, FilterShape::Square3x3, data.n_classes()),
        train: TrainConfig::default(),
        k_folds: folds,
        n_runs: 1,
        workers,
    };
    let outcome = train_dataset(&data, &job, &|_| {}).map_err(|e| e.to_string())?;
    let median = 100.0 * outcome.report.median;
    check(
        (median - target).abs() <= 7.0,
        format!("median {median:.2}% vs {target:.2}% (+-7)"),
    )
}

fn full_dataset() -> Outcome {
    let esc = std::env::var("TFRBENCH_ESC50_MANIFEST").ok();
    let us8k = std::env::var("TFRBENCH_US8K_MANIFEST").ok();
    if esc.is_none() && us8k.is_none() {
        return Ok("SKIPPED (set TFRBENCH_ESC50_MANIFEST and/or TFRBENCH_US8K_MANIFEST)".into());
    }
    let mut lines = Vec::new();
    if let Some(path) = esc {
        lines.push(format!("ESC-50 narrow mel: {}", reproduce(&path, "narrow", 5, 55.00)?));
    }
    if let Some(path) = us8k {
        lines.push(format!("UrbanSound8K wide mel: {}", reproduce(&path, "wide", 10, 74.66)?));
    }
    Ok(lines.join("; "))
}
