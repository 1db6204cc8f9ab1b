use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::engine::AudioBuffer;
use crate::{Error, Result};

/// Normalised correlation below which a buffer is called unvoiced.
pub const CLARITY_THRESHOLD: f64 = 0.3;
/// Fraction of the highest key maximum the chosen peak must reach.
const PEAK_FRACTION: f64 = 0.9;
/// Periodicity must persist out to at least this lag, seconds. Noise shaped
/// by a resonance correlates at the resonance period but not this far out.
const SUSTAIN_S: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F0Estimate {
    /// Hz; `None` when unvoiced.
    pub frequency: Option<f64>,
    /// Normalised correlation at the chosen lag.
    pub clarity: f64,
}

impl F0Estimate {
    pub fn is_voiced(&self) -> bool {
        self.frequency.is_some()
    }
}

/// Fundamental frequency of the buffer within `search_range` (Hz).
///
/// The lag comes from the normalised square difference function: the
/// first key maximum reaching 90% of the best one, interpolated. Clarity
/// is the smaller of the correlation at that lag and its mean over the
/// multiples of the lag between 10 and 20 ms, so a ringing resonance is
/// not mistaken for a voice.
pub fn estimate_f0(buffer: &AudioBuffer, search_range: (f64, f64)) -> Result<F0Estimate> {
    if buffer.is_empty() {
        return Err(Error::domain("buffer length", 0.0, "> 0 samples"));
    }
    let sr = buffer.sample_rate as f64;
    let (lo, hi) = search_range;
    if !(lo > 0.0 && hi > lo && hi < sr / 2.0) {
        return Err(Error::domain("search range low", lo, format!("0 < low < high < {}", sr / 2.0)));
    }
    let needed = (4.0 * sr / lo).ceil() as usize;
    if buffer.len() < needed {
        return Err(Error::domain(
            "buffer length",
            buffer.len() as f64,
            format!(">= {needed} samples (4 periods of {lo} Hz)"),
        ));
    }

    let x: Vec<f64> = buffer.samples.iter().map(|&s| s as f64).collect();
    let unvoiced = F0Estimate { frequency: None, clarity: 0.0 };
    if x.iter().all(|&s| s == 0.0) {
        return Ok(unvoiced);
    }
    let tau_min = ((sr / hi).floor() as usize).max(1);
    let tau_max = ((sr / lo).ceil() as usize).min(x.len() / 2);
    let sustain = (SUSTAIN_S * sr).ceil();
    let horizon = (tau_max + (2.0 * sustain) as usize + 2).min(x.len() - 1);
    let d = nsdf(&x, horizon + 1);
    let Some((tau, peak)) = pick_lag(&d, tau_min, tau_max) else {
        return Ok(unvoiced);
    };
    let sustained = sustained_correlation(&d, tau, sustain);
    let clarity = peak.min(sustained).max(0.0);
    if clarity < CLARITY_THRESHOLD {
        return Ok(F0Estimate { frequency: None, clarity });
    }
    Ok(F0Estimate { frequency: Some(sr / tau), clarity })
}

/// Frame-by-frame estimates; times are frame centres in seconds.
pub fn f0_track(buffer: &AudioBuffer, search_range: (f64, f64), window: usize, hop: usize) -> Result<Vec<(f64, F0Estimate)>> {
    if hop < 1 {
        return Err(Error::domain("hop", hop as f64, ">= 1 sample"));
    }
    if buffer.len() < window {
        return Err(Error::domain("buffer length", buffer.len() as f64, format!(">= window ({window})")));
    }
    let sr = buffer.sample_rate as f64;
    (0..=(buffer.len() - window) / hop)
        .map(|f| {
            let start = f * hop;
            let frame = AudioBuffer::new(buffer.sample_rate, buffer.samples[start..start + window].to_vec());
            Ok(((start as f64 + 0.5 * window as f64) / sr, estimate_f0(&frame, search_range)?))
        })
        .collect()
}

/// Mean of `d` at the multiples of `tau` in [sustain, 2 sustain] (at least
/// one multiple), linearly interpolated.
fn sustained_correlation(d: &[f64], tau: f64, sustain: f64) -> f64 {
    let first = (sustain / tau).ceil().max(1.0) as usize;
    let last = ((2.0 * sustain / tau).floor() as usize).max(first);
    let mut sum = 0.0;
    let mut count = 0;
    for k in first..=last {
        let lag = k as f64 * tau;
        let i = lag.floor() as usize;
        if i + 1 >= d.len() {
            break;
        }
        let frac = lag - i as f64;
        sum += d[i] * (1.0 - frac) + d[i + 1] * frac;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Normalised square difference function for lags 0..max_lag.
fn nsdf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let max_lag = max_lag.min(n);
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(size, Complex::default());
    planner.plan_fft_forward(size).process(&mut buf);
    for z in &mut buf {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let acf: Vec<f64> = buf[..max_lag].iter().map(|z| z.re / size as f64).collect();

    let mut m = 2.0 * acf[0];
    let mut out = Vec::with_capacity(max_lag);
    for (tau, &r) in acf.iter().enumerate() {
        if tau > 0 {
            m -= x[tau - 1] * x[tau - 1] + x[n - tau] * x[n - tau];
        }
        out.push(if m > 0.0 { 2.0 * r / m } else { 0.0 });
    }
    out
}

/// First key maximum within [tau_min, tau_max] reaching 90% of the largest.
/// Key maxima are the highest points of the positive lobes that follow the
/// first negative-going zero crossing.
fn pick_lag(d: &[f64], tau_min: usize, tau_max: usize) -> Option<(f64, f64)> {
    let mut keys: Vec<usize> = Vec::new();
    let mut tau = 1;
    while tau < d.len() && d[tau] > 0.0 {
        tau += 1;
    }
    let mut best: Option<usize> = None;
    while tau < d.len() {
        if d[tau] > 0.0 {
            match best {
                Some(b) if d[b] >= d[tau] => {}
                _ => best = Some(tau),
            }
        } else if let Some(b) = best.take() {
            keys.push(b);
        }
        tau += 1;
    }
    if let Some(b) = best {
        keys.push(b);
    }
    keys.retain(|&k| k >= tau_min && k <= tau_max && k + 1 < d.len());
    // Compare interpolated heights: a peak straddling two lags reads low.
    let peaks: Vec<(f64, f64)> = keys.iter().map(|&k| parabolic(d, k)).collect();
    let top = peaks.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    peaks.into_iter().find(|p| p.1 >= PEAK_FRACTION * top)
}

fn parabolic(d: &[f64], k: usize) -> (f64, f64) {
    if k == 0 || k + 1 >= d.len() {
        return (k as f64, d[k]);
    }
    let (a, b, c) = (d[k - 1], d[k], d[k + 1]);
    let den = a - 2.0 * b + c;
    if den.abs() < 1e-300 {
        return (k as f64, b);
    }
    let shift = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
    (k as f64 + shift, b - 0.25 * (a - c) * shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{GlottalPulse, NoiseSource};

    fn tone(f0: f64, seconds: f64) -> AudioBuffer {
        let sr = 44_100.0;
        let pulse = GlottalPulse::for_voice(0.5, f0, sr);
        let n = (seconds * sr) as usize;
        AudioBuffer::new(44_100, (0..n).map(|i| (0.5 * pulse.sample((f0 * i as f64 / sr).fract())) as f32).collect())
    }

    #[test]
    fn glottal_tone_at_440() {
        let e = estimate_f0(&tone(440.0, 0.2), (60.0, 2000.0)).unwrap();
        assert!((e.frequency.unwrap() - 440.0).abs() < 2.0, "{e:?}");
        assert!(e.clarity > 0.9);
    }

    #[test]
    fn noise_is_unvoiced() {
        let mut rng = NoiseSource::new(5);
        let buf = AudioBuffer::new(44_100, (0..8820).map(|_| rng.sample() as f32).collect());
        assert!(!estimate_f0(&buf, (60.0, 2000.0)).unwrap().is_voiced());
        assert!(!estimate_f0(&AudioBuffer::silence(44_100, 8820), (60.0, 2000.0)).unwrap().is_voiced());
    }

    #[test]
    fn preconditions() {
        assert!(estimate_f0(&AudioBuffer::new(44_100, vec![]), (60.0, 2000.0)).is_err());
        // 4 periods of 60 Hz need 2940 samples
        assert!(estimate_f0(&tone(440.0, 0.05), (60.0, 2000.0)).is_err());
        assert!(estimate_f0(&tone(440.0, 0.2), (500.0, 100.0)).is_err());
    }

    #[test]
    fn sweep_within_half_percent() {
        let mut f = 100.0;
        while f <= 2000.0 {
            let e = estimate_f0(&tone(f, 0.15), (80.0, 2500.0)).unwrap();
            let got = e.frequency.unwrap();
            assert!((got / f - 1.0).abs() < 0.005, "{f}: {got}");
            f *= 1.07;
        }
    }

    #[test]
    fn track_frames() {
        let t = f0_track(&tone(300.0, 0.5), (80.0, 1000.0), 4096, 2048).unwrap();
        assert_eq!(t.len(), (22_050 - 4096) / 2048 + 1);
        assert!(t.iter().all(|(_, e)| (e.frequency.unwrap() - 300.0).abs() < 1.5));
    }
}
