use std::f64::consts::PI;

use super::NoiseSource;
use crate::voice::{VoiceParams, Voicing};

/// Level (relative to the fundamental) that the first partial above
/// Nyquist may reach: -70 dB.
const ALIAS_FLOOR: f64 = 3.162_277_660_168_379_5e-4;
const MAX_ROLLOFF: f64 = 0.995;
/// Brightness cutoff of the pulse spectrum at voice_quality 0 and 1, Hz.
const LAX_CUTOFF_HZ: f64 = 1000.0;
const TENSE_CUTOFF_HZ: f64 = 8000.0;

/// Geometric rolloff `a` of the glottal pulse for a given voice quality.
///
/// The pulse has partials `a^k / k`; `a -> 1` is the plain sawtooth.
/// Voice quality sets a cutoff frequency `fc` and `a = exp(-f0 / fc)`, so
/// the tilt is the same in Hz whatever the pitch. A ceiling on `a` keeps
/// the first partial above Nyquist at least 70 dB below the fundamental,
/// so the pulse is band-limited by construction.
pub fn glottal_rolloff(voice_quality: f64, f0: f64, sample_rate: f64) -> f64 {
    if !(f0 > 0.0) {
        return 0.0;
    }
    let harmonics = libm::floor(0.5 * sample_rate / f0);
    if harmonics < 1.0 {
        return 0.0;
    }
    let ceiling = libm::pow(ALIAS_FLOOR * (harmonics + 1.0), 1.0 / harmonics).min(MAX_ROLLOFF);
    let cutoff = LAX_CUTOFF_HZ + (TENSE_CUTOFF_HZ - LAX_CUTOFF_HZ) * voice_quality.clamp(0.0, 1.0);
    libm::exp(-f0 / cutoff).min(ceiling)
}

/// Glottal pulse shape for one rolloff setting, normalised to unit peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlottalPulse {
    rolloff: f64,
    norm: f64,
}

impl GlottalPulse {
    pub fn new(rolloff: f64) -> Self {
        let rolloff = rolloff.clamp(0.0, MAX_ROLLOFF);
        let norm = if rolloff < 1e-9 { 1.0 } else { 1.0 / libm::asin(rolloff) };
        Self { rolloff, norm }
    }

    pub fn for_voice(voice_quality: f64, f0: f64, sample_rate: f64) -> Self {
        Self::new(glottal_rolloff(voice_quality, f0, sample_rate))
    }

    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    /// Sum over k of `a^k sin(k theta) / k`, in closed form.
    pub fn sample(&self, phase: f64) -> f64 {
        let theta = 2.0 * PI * phase;
        let a = self.rolloff;
        if a < 1e-9 {
            return libm::sin(theta);
        }
        libm::atan2(a * libm::sin(theta), 1.0 - a * libm::cos(theta)) * self.norm
    }
}

/// One glottal pulse sample at `phase` in [0, 1) for a voice at `f0`.
pub fn glottal_sample(phase: f64, voice_quality: f64, f0: f64, sample_rate: f64) -> f64 {
    GlottalPulse::for_voice(voice_quality, f0, sample_rate).sample(phase)
}

/// Larynx controls that stay fixed between control ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LarynxSettings {
    pub voicing: Voicing,
    pub voice_quality: f64,
    pub aspiration: f64,
    pub dual_folds: bool,
    pub fold_detune: f64,
    pub sample_rate: f64,
}

impl LarynxSettings {
    pub fn from_params(params: &VoiceParams, voicing: Voicing) -> Self {
        Self {
            voicing,
            voice_quality: params.voice_quality,
            aspiration: params.aspiration,
            dual_folds: params.dual_folds_enabled,
            fold_detune: params.fold_detune,
            sample_rate: params.sample_rate as f64,
        }
    }
}

/// The sound source: one or two fold sets plus turbulent noise, gated by airflow.
#[derive(Debug, Clone)]
pub struct Larynx {
    phase: f64,
    phase2: f64,
    pulse: GlottalPulse,
    pulse2: GlottalPulse,
    noise: NoiseSource,
}

impl Larynx {
    pub fn new(seed: u64) -> Self {
        Self {
            phase: 0.0,
            phase2: 0.0,
            pulse: GlottalPulse::new(0.0),
            pulse2: GlottalPulse::new(0.0),
            noise: NoiseSource::new(seed),
        }
    }

    /// Recomputes the band-limit for the current pitch; call at control rate.
    pub fn retune(&mut self, f0: f64, settings: &LarynxSettings) {
        self.pulse = GlottalPulse::for_voice(settings.voice_quality, f0, settings.sample_rate);
        if settings.dual_folds {
            self.pulse2 = GlottalPulse::for_voice(
                settings.voice_quality,
                f0 + settings.fold_detune,
                settings.sample_rate,
            );
        }
    }

    /// One excitation sample. The noise source advances on every call so
    /// the random stream does not depend on the airflow.
    pub fn process(&mut self, airflow: f64, f0: f64, settings: &LarynxSettings) -> f64 {
        let noise = self.noise.sample();
        let source = match settings.voicing {
            Voicing::Unvoiced => noise,
            Voicing::Voiced => {
                let mut glottal = self.pulse.sample(self.phase);
                self.phase = advance(self.phase, f0 / settings.sample_rate);
                if settings.dual_folds {
                    glottal = 0.5 * (glottal + self.pulse2.sample(self.phase2));
                    self.phase2 =
                        advance(self.phase2, (f0 + settings.fold_detune) / settings.sample_rate);
                }
                (1.0 - settings.aspiration) * glottal + settings.aspiration * noise
            }
        };
        if airflow == 0.0 {
            0.0
        } else {
            source * airflow
        }
    }
}

fn advance(phase: f64, step: f64) -> f64 {
    let next = phase + step;
    next - libm::floor(next)
}
