use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::allometry;
use crate::Result;

/// Formant bandwidth as a fraction of the centre frequency.
pub const BANDWIDTH_FRACTION: f64 = 0.10;
pub const MIN_BANDWIDTH_HZ: f64 = 50.0;
/// Relative levels of F1..F3 before normalisation (0, -6, -12 dB).
pub const FORMANT_LEVELS: [f64; 3] = [1.0, 0.5, 0.25];
/// Highest representable centre, as a fraction of the sample rate.
const MAX_CENTER_FRACTION: f64 = 0.45;
/// F2/F3 fade out as their nominal centre moves from here to the maximum.
const FADE_START_FRACTION: f64 = 0.40;
/// Filter states below this with zero input are flushed to exact zero.
pub(crate) const SILENCE_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorConfig {
    /// Hz
    pub center_frequency: f64,
    /// Hz
    pub bandwidth: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Coefficients {
    b0: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl ResonatorConfig {
    /// Constant 0 dB peak-gain band-pass biquad (b1 = 0, b2 = -b0).
    fn coefficients(&self, sample_rate: f64) -> Coefficients {
        let w0 = 2.0 * PI * self.center_frequency / sample_rate;
        let q = self.center_frequency / self.bandwidth;
        let alpha = libm::sin(w0) / (2.0 * q);
        let a0 = 1.0 + alpha;
        Coefficients {
            b0: alpha / a0,
            b2: -alpha / a0,
            a1: -2.0 * libm::cos(w0) / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    /// Magnitude of the complex-conjugate pole pair; < 1 means stable.
    pub fn pole_radius(&self, sample_rate: f64) -> f64 {
        self.coefficients(sample_rate).a2.abs().sqrt()
    }

    /// Complex response (re, im) of the gained resonator at `freq`.
    fn response(&self, freq: f64, sample_rate: f64) -> (f64, f64) {
        let c = self.coefficients(sample_rate);
        let w = 2.0 * PI * freq / sample_rate;
        let (c1, s1) = (libm::cos(w), libm::sin(w));
        let (c2, s2) = (libm::cos(2.0 * w), libm::sin(2.0 * w));
        // numerator b0 + b2 z^-2, denominator 1 + a1 z^-1 + a2 z^-2, z = e^{jw}
        let (nr, ni) = (c.b0 + c.b2 * c2, -c.b2 * s2);
        let (dr, di) = (1.0 + c.a1 * c1 + c.a2 * c2, -c.a1 * s1 - c.a2 * s2);
        let den = dr * dr + di * di;
        let re = (nr * dr + ni * di) / den;
        let im = (ni * dr - nr * di) / den;
        (self.gain * re, self.gain * im)
    }

    pub fn is_valid(&self, sample_rate: f64) -> bool {
        self.center_frequency > 0.0
            && self.center_frequency < sample_rate / 2.0
            && self.bandwidth > 0.0
            && self.gain.is_finite()
            && self.pole_radius(sample_rate) < 1.0
    }
}

/// The three formant resonators for a tract length and mouth opening.
///
/// Centres follow the uniform-tube law; a centre that would reach 45% of
/// the sample rate is pinned there and (for F2/F3) faded out. Gains are
/// scaled so the parallel sum has unit magnitude at F1.
pub fn tract_configs(tract_length: f64, mouth_opening: f64, sample_rate: f64) -> Result<[ResonatorConfig; 3]> {
    let max_center = MAX_CENTER_FRACTION * sample_rate;
    let fade_start = FADE_START_FRACTION * sample_rate;
    let mut configs = [ResonatorConfig { center_frequency: 0.0, bandwidth: 0.0, gain: 0.0 }; 3];
    for (i, cfg) in configs.iter_mut().enumerate() {
        let nominal = allometry::formant_frequency(i as u32 + 1, mouth_opening, tract_length)?;
        let center = nominal.min(max_center);
        let fade = if i == 0 {
            1.0
        } else {
            ((max_center - nominal) / (max_center - fade_start)).clamp(0.0, 1.0)
        };
        *cfg = ResonatorConfig {
            center_frequency: center,
            bandwidth: (BANDWIDTH_FRACTION * center).max(MIN_BANDWIDTH_HZ),
            gain: FORMANT_LEVELS[i] * fade,
        };
    }
    let f1 = configs[0].center_frequency;
    let (re, im) = configs
        .iter()
        .map(|c| c.response(f1, sample_rate))
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let norm = (re * re + im * im).sqrt();
    if norm > 0.0 {
        for c in &mut configs {
            c.gain /= norm;
        }
    }
    Ok(configs)
}

/// Transposed direct-form II biquad with silence flushing.
#[derive(Debug, Clone, Default)]
pub struct Resonator {
    coeffs: Coefficients,
    gain: f64,
    s1: f64,
    s2: f64,
}

impl Resonator {
    pub fn new(config: &ResonatorConfig, sample_rate: f64) -> Self {
        let mut r = Self::default();
        r.set(config, sample_rate);
        r
    }

    /// Swaps coefficients keeping the filter state.
    pub fn set(&mut self, config: &ResonatorConfig, sample_rate: f64) {
        self.coeffs = config.coefficients(sample_rate);
        self.gain = config.gain;
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let c = &self.coeffs;
        let y = c.b0 * x + self.s1;
        self.s1 = -c.a1 * y + self.s2;
        self.s2 = c.b2 * x - c.a2 * y;
        if x == 0.0 && self.s1.abs() < SILENCE_EPSILON && self.s2.abs() < SILENCE_EPSILON {
            self.s1 = 0.0;
            self.s2 = 0.0;
        }
        self.gain * y
    }

    pub fn reset(&mut self) {
        self.s1 = 0.0;
        self.s2 = 0.0;
    }
}

/// Parallel bank of the three formant resonators.
#[derive(Debug, Clone, Default)]
pub struct VocalTract {
    resonators: [Resonator; 3],
}

impl VocalTract {
    pub fn new(configs: &[ResonatorConfig; 3], sample_rate: f64) -> Self {
        let mut t = Self::default();
        t.configure(configs, sample_rate);
        t
    }

    pub fn configure(&mut self, configs: &[ResonatorConfig; 3], sample_rate: f64) {
        for (r, c) in self.resonators.iter_mut().zip(configs) {
            r.set(c, sample_rate);
        }
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        self.resonators.iter_mut().map(|r| r.process(x)).sum()
    }
}
