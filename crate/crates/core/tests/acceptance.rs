//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mammalvox::allometry;
use mammalvox::analysis::{estimate_f0, f0_track, spectral_peaks, spectrogram};
use mammalvox::engine::{
    breathing_session_with, post_process, render_utterance, tract_configs, BreathingOptions, NoiseSource, RenderRequest,
    Resonator, UtteranceVoice,
};
use mammalvox::voice::{apply_affect, resolve_preset, ParamKind, PARAMS};
use mammalvox::wav::{encode_wav, read_wav, write_wav};
use mammalvox::{AffectState, AudioBuffer, Error, UtteranceKind, VoiceParams};
use sha2::{Digest, Sha256};

/// SHA-256 of the WAV for `golden_request()`, recorded on x86_64 Linux.
const GOLDEN_WAV_SHA256: &str = "7ac90e17530fe87f5864ae3609a8ce40e322e5f3c47254f48bdc8b15bb564cbc";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn miro() -> VoiceParams {
    resolve_preset("miro", &VoiceParams::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn a1_allometric_trio() -> Outcome {
    let start = Instant::now();
    let p = allometry::profile(2.0).unwrap();
    let elapsed = start.elapsed();
    let ok = rel(p.breathing_rate, 0.70) <= 0.01
        && rel(p.fundamental_frequency, 758.0) <= 0.01
        && rel(p.tract_length, 6.62) <= 0.01
        && elapsed < Duration::from_millis(1);
    outcome(
        ok,
        format!(
            "B={:.4} Hz F0={:.2} Hz L={:.4} cm in {:?}",
            p.breathing_rate, p.fundamental_frequency, p.tract_length, elapsed
        ),
    )
}

fn a2_formant_placement() -> Outcome {
    // Closed-form values for M = 2 kg, mouth opening 0.1, computed outside
    // the crate: (2n - 1.1) * 35000 / (4 * (3.15 + 11.53 log10 2)).
    const ORACLE: [f64; 3] = [1189.4197, 3832.5745, 6475.7293];
    let start = Instant::now();
    let params = resolve_preset("breath", &miro()).unwrap();
    let effective = apply_affect(&params, AffectState::NEUTRAL);
    let configs = tract_configs(effective.tract_length, effective.mouth_open_base, 44_100.0).unwrap();
    let mut voice = UtteranceVoice::new(&effective, UtteranceKind::Breath.template(), 2.0, 1.0, 42).unwrap();
    let raw = AudioBuffer::new(44_100, (0..voice.len()).map(|_| voice.next_sample() as f32).collect());
    let buffer = post_process(&raw, false);
    let peaks = spectral_peaks(&spectrogram(&buffer, 2048, 256).unwrap(), 3).unwrap();
    let elapsed = start.elapsed();
    let engine_matches_oracle = configs.iter().zip(ORACLE).all(|(c, o)| rel(c.center_frequency, o) < 1e-6);
    let within = peaks.complete && peaks.peaks.iter().zip(ORACLE).all(|(p, o)| rel(*p, o) <= 0.05);
    outcome(
        engine_matches_oracle && within && elapsed < Duration::from_secs(2),
        format!("peaks {:?} vs oracle {ORACLE:?} in {elapsed:?}", round(&peaks.peaks)),
    )
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 10.0).round() / 10.0).collect()
}

fn a3_pitch_fidelity() -> Outcome {
    let params = miro();
    let out = render_utterance(&RenderRequest::new(params, AffectState::NEUTRAL, 5, UtteranceKind::Voiced)).unwrap();
    let d = out.duration();
    let expected = mammalvox::engine::pitch_contour(d / 2.0, d, params.f0_base, params.f0_excursion, 0);
    let window = out.slice_seconds(d / 2.0 - 0.05, 0.1);
    let measured = estimate_f0(&window, (200.0, 3000.0)).unwrap().frequency.unwrap_or(0.0);
    let peak_err = rel(measured, expected);

    let mut worst: f64 = 0.0;
    let mut worst_at = 0.0;
    let steps = 24;
    for i in 0..steps {
        let f0 = 100.0 * 20f64.powf(i as f64 / (steps - 1) as f64);
        // Constant pitch needs a static tract: a moving formant shifts the
        // phase of every partial and with it the instantaneous frequency.
        let p = VoiceParams { f0_base: f0, f0_excursion: 0.0, mouth_open_depth: 0.0, uvula_depth: 0.0, ..params };
        let out = render_utterance(&RenderRequest::new(p, AffectState::NEUTRAL, 6, UtteranceKind::Voiced)).unwrap();
        let mid = out.slice_seconds(out.duration() / 2.0 - 0.1, 0.2);
        let got = estimate_f0(&mid, (60.0, 2500.0)).unwrap().frequency.unwrap_or(0.0);
        if rel(got, f0) > worst {
            worst = rel(got, f0);
            worst_at = f0;
        }
    }
    outcome(
        peak_err <= 0.02 && worst <= 0.005,
        format!(
            "contour peak {measured:.2} Hz vs {expected:.2} Hz ({:.3}%); sweep worst {:.3}% at {worst_at:.0} Hz",
            100.0 * peak_err,
            100.0 * worst
        ),
    )
}

fn f0_std(buffer: &AudioBuffer) -> f64 {
    let track = f0_track(buffer, (200.0, 3000.0), 2048, 512).unwrap();
    let f: Vec<f64> = track.iter().filter_map(|(_, e)| e.frequency).collect();
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    (f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / f.len() as f64).sqrt()
}

fn a4_affect_contrasts() -> Outcome {
    let params = miro();
    let render = |affect| render_utterance(&RenderRequest::new(params, affect, 11, UtteranceKind::Voiced)).unwrap();
    let excited = render(AffectState::new(0.0, 1.0));
    let calm = render(AffectState::new(0.0, -1.0));
    let ratio = excited.duration() / calm.duration();
    let happy = f0_std(&render(AffectState::new(1.0, 0.0)));
    let sad = f0_std(&render(AffectState::new(-1.0, 0.0)));
    outcome(
        excited.duration() < calm.duration() && rel(ratio, 0.25) <= 0.10 && happy >= 3.0 * sad,
        format!(
            "duration +1/-1 arousal {:.3}/{:.3} s = {ratio:.4} (1:4 mapping); F0 sd +1/-1 valence {happy:.1}/{sad:.1} Hz = {:.1}x",
            excited.duration(),
            calm.duration(),
            happy / sad
        ),
    )
}

fn golden_request() -> RenderRequest {
    RenderRequest::new(miro(), AffectState::new(0.5, -0.25), 2024, UtteranceKind::Voiced)
}

fn a5_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let path = dir.path().join(format!("run{i}.wav"));
            write_wav(&render_utterance(&golden_request()).unwrap(), &path).unwrap();
            std::fs::read(&path).unwrap()
        })
        .collect();
    let digest = format!("{:x}", Sha256::digest(&files[0]));
    outcome(
        files[0] == files[1] && digest == GOLDEN_WAV_SHA256,
        format!("runs identical: {}; sha256 {digest}", files[0] == files[1]),
    )
}

/// Exhalation count from the loudness envelope: rising crossings of a
/// quarter of the envelope maximum, with hysteresis.
fn exhalation_peaks(buffer: &AudioBuffer) -> usize {
    let frame = (0.02 * buffer.sample_rate as f64) as usize;
    let rms: Vec<f64> = buffer
        .samples
        .chunks(frame)
        .map(|c| (c.iter().map(|&s| (s as f64).powi(2)).sum::<f64>() / c.len() as f64).sqrt())
        .collect();
    let smooth: Vec<f64> = (0..rms.len())
        .map(|i| {
            let lo = i.saturating_sub(5);
            let hi = (i + 5).min(rms.len() - 1);
            rms[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let top = smooth.iter().cloned().fold(0.0, f64::max);
    let (on, off) = (0.25 * top, 0.125 * top);
    let mut above = false;
    let mut count = 0;
    for &e in &smooth {
        if !above && e > on {
            above = true;
            count += 1;
        } else if above && e < off {
            above = false;
        }
    }
    count
}

fn voiced_frames(buffer: &AudioBuffer) -> usize {
    f0_track(buffer, (100.0, 3000.0), 2048, 1024)
        .unwrap()
        .iter()
        .filter(|(_, e)| e.is_voiced())
        .count()
}

fn a6_breathing_session() -> Outcome {
    let params = miro();
    let default = BreathingOptions::default();
    let session = breathing_session_with(&params, AffectState::NEUTRAL, 10.0, 1, &default).unwrap();
    let peaks = exhalation_peaks(&session.buffer);
    let never = BreathingOptions { p_voc: 0.0, ..default };
    let quiet = breathing_session_with(&params, AffectState::NEUTRAL, 10.0, 1, &never).unwrap();
    let voiced_quiet = voiced_frames(&quiet.buffer);
    let always = BreathingOptions { p_voc: 1.0, ..default };
    let vocal = breathing_session_with(&params, AffectState::NEUTRAL, 10.0, 1, &always).unwrap();
    let voiced_vocal = voiced_frames(&vocal.buffer);
    outcome(
        peaks == 7 && voiced_quiet == 0 && voiced_vocal > 0,
        format!(
            "{peaks} exhalation peaks in 10 s ({} scheduled); voiced frames p_voc=0: {voiced_quiet}, p_voc=1: {voiced_vocal}",
            session.cycles.len()
        ),
    )
}

fn random_params(rng: &mut NoiseSource) -> VoiceParams {
    let mut p = VoiceParams::default();
    for info in PARAMS {
        let u = rng.uniform();
        let value = match info.kind {
            ParamKind::Flag => (u < 0.5) as u8 as f64,
            ParamKind::Integer => (info.min + u * (info.max - info.min + 1.0)).floor().min(info.max),
            ParamKind::Real if info.name == "mass" => info.min * (info.max / info.min).powf(u),
            ParamKind::Real => info.min + u * (info.max - info.min),
        };
        assign(&mut p, info.name, value);
    }
    p
}

/// Stores a draw without any checks, so cross-field violations reach the
/// renderer and are refused there.
fn assign(p: &mut VoiceParams, name: &str, value: f64) {
    match name {
        "mass" => p.mass = value,
        "f0_base" => p.f0_base = value,
        "f0_excursion" => p.f0_excursion = value,
        "voice_quality" => p.voice_quality = value,
        "aspiration" => p.aspiration = value,
        "quantisation_steps" => p.quantisation_steps = value as u32,
        "dual_folds_enabled" => p.dual_folds_enabled = value != 0.0,
        "fold_detune" => p.fold_detune = value,
        "tract_length" => p.tract_length = value,
        "mouth_open_base" => p.mouth_open_base = value,
        "mouth_open_depth" => p.mouth_open_depth = value,
        "syllabic_rate" => p.syllabic_rate = value,
        "uvula_rate" => p.uvula_rate = value,
        "uvula_depth" => p.uvula_depth = value,
        "airflow_scale" => p.airflow_scale = value,
        "sample_rate" => p.sample_rate = value as u32,
        other => panic!("unknown parameter {other}"),
    }
}

/// True when every resonator's impulse response is below -60 dBFS by 1 s.
fn resonators_decay(configs: &[mammalvox::engine::ResonatorConfig; 3], sr: f64) -> bool {
    configs.iter().all(|c| {
        let mut r = Resonator::new(c, sr);
        let n = sr as usize;
        let mut zeros = 0;
        let mut last_second_peak: f64 = 0.0;
        for i in 0..n {
            let y = r.process(if i == 0 { 1.0 } else { 0.0 });
            if !y.is_finite() {
                return false;
            }
            if i > 2 && y == 0.0 {
                zeros += 1;
                if zeros > 16 {
                    return true;
                }
            } else {
                zeros = 0;
            }
            if i >= n - n / 100 {
                last_second_peak = last_second_peak.max(y.abs());
            }
        }
        last_second_peak < 1e-3
    })
}

fn a7_numerical_hygiene() -> Outcome {
    let start = Instant::now();
    let mut rng = NoiseSource::new(0xA7);
    let mut rendered = 0;
    let mut refused = 0;
    let mut samples = 0usize;
    let mut failures = Vec::new();
    while rendered < 10_000 {
        let params = random_params(&mut rng);
        let affect = AffectState::new(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        let kind = UtteranceKind::NAMED[(rng.uniform() * 6.0) as usize % 6];
        let request = RenderRequest::new(params, affect, rng.next_u64(), kind);
        let out = match render_utterance(&request) {
            Ok(out) => out,
            Err(Error::Domain { .. } | Error::DurationCap { .. }) => {
                refused += 1;
                continue;
            }
            Err(e) => {
                failures.push(format!("unexpected error {e}"));
                break;
            }
        };
        rendered += 1;
        samples += out.len();
        if let Some(bad) = out.samples.iter().find(|s| !s.is_finite() || s.abs() > 1.0) {
            failures.push(format!("sample {bad} for {params:?}"));
        }
        let effective = apply_affect(&params, affect);
        let sr = effective.sample_rate as f64;
        for mouth in [effective.mouth_open_base, effective.mouth_open_base + effective.mouth_open_depth] {
            let configs = tract_configs(effective.tract_length, mouth.min(1.0), sr).unwrap();
            if !resonators_decay(&configs, sr) {
                failures.push(format!("slow decay for {configs:?}"));
            }
        }
        if failures.len() > 5 {
            break;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "{rendered} renders ({refused} invalid draws resampled, {:.1} M samples) in {:.1} s{}",
            samples as f64 / 1e6,
            elapsed.as_secs_f64(),
            failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
        ),
    )
}

fn a8_scaling_sweep() -> Outcome {
    let (lo, hi) = allometry::MASS_RANGE_KG;
    let mut prev: Option<allometry::AllometricProfile> = None;
    let mut violations = Vec::new();
    for i in 0..1000 {
        let m = lo * (hi / lo).powf(i as f64 / 999.0);
        let p = allometry::profile(m).unwrap();
        let c = p.lung_capacity_litres();
        let q_long = allometry::flow_rate_unsimplified(c, p.breathing_rate).unwrap();
        if rel(p.flow_rate, q_long) > 0.01 {
            violations.push(format!("flow forms disagree at {m}"));
        }
        if rel(p.utterance_duration, 0.42 * c / p.flow_rate) > 1e-12 {
            violations.push(format!("duration inconsistent at {m}"));
        }
        if let Some(q) = prev {
            if !(p.lung_capacity > q.lung_capacity
                && p.breathing_rate < q.breathing_rate
                && p.fundamental_frequency < q.fundamental_frequency
                && p.tract_length >= q.tract_length
                && p.utterance_duration > q.utterance_duration)
            {
                violations.push(format!("monotonicity broken at {m}"));
            }
        }
        prev = Some(p);
    }
    let f0 = allometry::fundamental_frequency(1.0).unwrap();
    let l = allometry::tract_length(1.0).unwrap();
    outcome(
        violations.is_empty() && f0 == 1000.0 && l == 3.15,
        format!(
            "1000 masses, {} violations; F0(1 kg) = {f0} Hz, L(1 kg) = {l} cm{}",
            violations.len(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    )
}

fn a9_io_round_trip() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = NoiseSource::new(9);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let len = (rng.uniform() * 5000.0) as usize;
        let buf = AudioBuffer::new(44_100, (0..len).map(|_| rng.sample() as f32).collect());
        let path = dir.path().join(format!("{i}.wav"));
        write_wav(&buf, &path).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.len(), buf.len());
        for (a, b) in buf.samples.iter().zip(&back.samples) {
            worst = worst.max((a - b).abs() as f64);
        }
    }
    let tone = AudioBuffer::new(
        44_100,
        (0..44_100)
            .map(|i| (0.5 * (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 44_100.0).sin()) as f32)
            .collect(),
    );
    let spec = spectrogram(&read_back(&tone), 2048, 256).unwrap();
    let bin = spec.resolution();
    let all_frames = spec.magnitudes.iter().all(|frame| {
        let k = frame.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        (spec.frequency_bins[k] - 1000.0).abs() <= bin
    });
    outcome(
        worst <= 1.0 / 32768.0 && all_frames,
        format!("max round-trip error {worst:.3e} (bound {:.3e}); 1 kHz peak within one bin in every frame: {all_frames}", 1.0 / 32768.0),
    )
}

fn read_back(buf: &AudioBuffer) -> AudioBuffer {
    mammalvox::wav::decode_wav(&encode_wav(buf)).unwrap()
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("A1", "allometric trio at 2 kg", a1_allometric_trio),
        ("A2", "formant placement in breath", a2_formant_placement),
        ("A3", "pitch fidelity", a3_pitch_fidelity),
        ("A4", "affect contrasts", a4_affect_contrasts),
        ("A5", "determinism", a5_determinism),
        ("A6", "breathing session", a6_breathing_session),
        ("A7", "numerical hygiene fuzz", a7_numerical_hygiene),
        ("A8", "scaling-law sweep", a8_scaling_sweep),
        ("A9", "I/O round trip", a9_io_round_trip),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!("{id} {} {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
