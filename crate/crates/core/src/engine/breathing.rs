use serde::{Deserialize, Serialize};

use super::{derive_seed, post_process, AudioBuffer, NoiseSource, UtteranceVoice, RENDER_CAP_S};
use crate::allometry;
use crate::voice::{AffectMapping, AffectState, UtteranceKind, VoiceParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreathingOptions {
    /// Probability that an exhalation carries a voiced utterance.
    pub p_voc: f64,
    /// Inhalation loudness relative to an exhaled breath.
    pub inhale_level: f64,
}

impl Default for BreathingOptions {
    fn default() -> Self {
        Self { p_voc: 0.3, inhale_level: 0.1 }
    }
}

/// One breath: inhalation over the first half-period, exhalation over the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreathCycle {
    pub start: f64,
    pub exhale_start: f64,
    pub end: f64,
    pub voiced: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreathingSession {
    pub buffer: AudioBuffer,
    pub breathing_rate: f64,
    /// Cycles whose exhalation starts inside the session.
    pub cycles: Vec<BreathCycle>,
}

/// Continuous breathing with stochastic vocalisation on exhalation, using
/// the default options.
pub fn breathing_session(
    params: &VoiceParams,
    affect: AffectState,
    wall_duration: f64,
    seed: u64,
) -> Result<BreathingSession> {
    breathing_session_with(params, affect, wall_duration, seed, &BreathingOptions::default())
}

pub fn breathing_session_with(
    params: &VoiceParams,
    affect: AffectState,
    wall_duration: f64,
    seed: u64,
    options: &BreathingOptions,
) -> Result<BreathingSession> {
    if !(wall_duration > 0.0) || !wall_duration.is_finite() {
        return Err(Error::domain("session duration", wall_duration, "> 0 s"));
    }
    if wall_duration > RENDER_CAP_S {
        return Err(Error::DurationCap { requested: wall_duration, cap: RENDER_CAP_S });
    }
    if !(0.0..=1.0).contains(&options.p_voc) {
        return Err(Error::domain("p_voc", options.p_voc, "[0, 1]"));
    }
    if !(0.0..=1.0).contains(&options.inhale_level) {
        return Err(Error::domain("inhale_level", options.inhale_level, "[0, 1]"));
    }
    params.validate()?;
    let mapping = AffectMapping::default();
    let affect = affect.clamped();
    let effective = mapping.apply(params, affect);
    effective.check_pitch_headroom()?;

    let rate = allometry::breathing_rate(params.mass)? * mapping.breathing_factor(affect.arousal);
    let period = 1.0 / rate;
    let half = 0.5 * period;
    let sr = params.sample_rate as f64;
    let total = libm::round(wall_duration * sr) as usize;
    let mut mix = vec![0.0f64; total];
    let mut dice = NoiseSource::new(derive_seed(seed, 0));
    let mut cycles = Vec::new();

    let breath = UtteranceKind::Breath.template();
    let voiced = UtteranceKind::Voiced.template();
    let airflow = effective.airflow_scale;
    let mut segment = 0u64;
    let mut k = 0u32;
    loop {
        let start = k as f64 * period;
        if start >= wall_duration {
            break;
        }
        let exhale_start = start + half;
        let vocalise = dice.uniform() < options.p_voc;
        if exhale_start < wall_duration {
            cycles.push(BreathCycle { start, exhale_start, end: start + period, voiced: vocalise });
        }
        let parts = [
            (start, breath, airflow * options.inhale_level),
            (exhale_start, if vocalise { voiced } else { breath }, airflow),
        ];
        for (at, template, level) in parts {
            segment += 1;
            let offset = libm::round(at * sr) as usize;
            if offset >= total || level == 0.0 {
                continue;
            }
            let mut voice = UtteranceVoice::new(&effective, template, half, level, derive_seed(seed, segment))?;
            for slot in mix[offset..].iter_mut().take(voice.len()) {
                *slot += voice.next_sample();
            }
        }
        k += 1;
    }

    let raw = AudioBuffer::new(params.sample_rate, mix.into_iter().map(|s| s as f32).collect());
    Ok(BreathingSession { buffer: post_process(&raw, false), breathing_rate: rate, cycles })
}
