use serde::{Deserialize, Serialize};

use super::VoiceParams;

/// A point in the valence/arousal plane, both axes in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AffectState {
    pub valence: f64,
    pub arousal: f64,
}

impl AffectState {
    pub const NEUTRAL: AffectState = AffectState { valence: 0.0, arousal: 0.0 };

    /// Clamps both components to [-1, 1]; NaN becomes 0.
    pub fn new(valence: f64, arousal: f64) -> Self {
        Self {
            valence: clamp_unit(valence),
            arousal: clamp_unit(arousal),
        }
    }

    pub fn clamped(self) -> Self {
        Self::new(self.valence, self.arousal)
    }
}

fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-1.0, 1.0)
    }
}

/// How affect bends the sliders. Each curve is log-linear on either side
/// of neutral, passing through 1 at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffectMapping {
    /// airflow multiplier at arousal -1
    pub airflow_calm: f64,
    /// airflow multiplier at arousal +1
    pub airflow_excited: f64,
    /// f0 excursion multiplier at valence -1
    pub excursion_negative: f64,
    /// f0 excursion multiplier at valence +1
    pub excursion_positive: f64,
    /// voice-quality shift per unit of positive valence
    pub quality_shift: f64,
    /// breathing-rate multiplier at arousal +1 (inverse at -1)
    pub breathing_excited: f64,
}

impl Default for AffectMapping {
    fn default() -> Self {
        Self {
            airflow_calm: 0.5,
            airflow_excited: 2.0,
            excursion_negative: 0.1,
            excursion_positive: 1.5,
            quality_shift: 0.3,
            breathing_excited: std::f64::consts::SQRT_2,
        }
    }
}

fn log_linear(x: f64, at_minus_one: f64, at_plus_one: f64) -> f64 {
    if x >= 0.0 {
        at_plus_one.powf(x)
    } else {
        at_minus_one.powf(-x)
    }
}

impl AffectMapping {
    pub fn airflow_factor(&self, arousal: f64) -> f64 {
        log_linear(arousal, self.airflow_calm, self.airflow_excited)
    }

    pub fn excursion_factor(&self, valence: f64) -> f64 {
        log_linear(valence, self.excursion_negative, self.excursion_positive)
    }

    pub fn breathing_factor(&self, arousal: f64) -> f64 {
        self.breathing_excited.powf(arousal)
    }

    pub fn apply(&self, params: &VoiceParams, affect: AffectState) -> VoiceParams {
        let affect = affect.clamped();
        let mut out = *params;
        if affect.arousal != 0.0 {
            out.airflow_scale *= self.airflow_factor(affect.arousal);
        }
        if affect.valence != 0.0 {
            out.f0_excursion *= self.excursion_factor(affect.valence);
        }
        if affect.valence > 0.0 {
            out.voice_quality = (out.voice_quality + affect.valence * self.quality_shift).min(1.0);
        }
        out
    }
}

/// Effective sliders for an affect state under the default mapping.
pub fn apply_affect(params: &VoiceParams, affect: AffectState) -> VoiceParams {
    AffectMapping::default().apply(params, affect)
}
