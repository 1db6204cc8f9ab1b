use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Voicing {
    /// Vocal folds vibrate; aspiration mixes in at the `aspiration` slider.
    Voiced,
    /// Folds held close together: noise excitation only.
    Unvoiced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AirflowShape {
    /// One attack-sustain-release exhalation.
    Sustained,
    /// `syllables` separate puffs inside the utterance (laugh, cough).
    Pulsed,
    /// Slow build then an abrupt release (sneeze).
    Burst,
}

/// How a vocalisation type drives the lungs, larynx and tract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VocalTemplate {
    pub voicing: Voicing,
    pub airflow: AirflowShape,
    /// Number of puffs for pulsed airflow; when non-zero the mouth also
    /// cycles once per puff instead of at `syllabic_rate`.
    pub syllables: u32,
    /// Whether the uvula modulation is active.
    pub uvula: bool,
    /// Hold the mouth at `mouth_open_base` for the whole utterance.
    pub static_tract: bool,
    /// Multiplier on the allometric utterance duration.
    pub duration_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtteranceKind {
    Voiced,
    Breath,
    Snore,
    Laugh,
    Sneeze,
    Cough,
    Templated(VocalTemplate),
}

impl UtteranceKind {
    pub const NAMED: [UtteranceKind; 6] = [
        UtteranceKind::Voiced,
        UtteranceKind::Breath,
        UtteranceKind::Snore,
        UtteranceKind::Laugh,
        UtteranceKind::Sneeze,
        UtteranceKind::Cough,
    ];

    pub fn template(&self) -> VocalTemplate {
        use AirflowShape::*;
        use Voicing::*;
        let t = |voicing, airflow, syllables, uvula, static_tract, duration_scale| VocalTemplate {
            voicing,
            airflow,
            syllables,
            uvula,
            static_tract,
            duration_scale,
        };
        match self {
            UtteranceKind::Voiced => t(Voiced, Sustained, 0, true, false, 1.0),
            UtteranceKind::Breath => t(Unvoiced, Sustained, 0, false, true, 1.0),
            UtteranceKind::Snore => t(Unvoiced, Sustained, 0, true, true, 1.0),
            UtteranceKind::Laugh => t(Voiced, Pulsed, 5, true, false, 1.0),
            UtteranceKind::Sneeze => t(Voiced, Burst, 1, false, false, 0.6),
            UtteranceKind::Cough => t(Unvoiced, Pulsed, 2, false, true, 0.5),
            UtteranceKind::Templated(t) => *t,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UtteranceKind::Voiced => "voiced",
            UtteranceKind::Breath => "breath",
            UtteranceKind::Snore => "snore",
            UtteranceKind::Laugh => "laugh",
            UtteranceKind::Sneeze => "sneeze",
            UtteranceKind::Cough => "cough",
            UtteranceKind::Templated(_) => "templated",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::NAMED.iter().copied().find(|k| k.name() == name)
    }
}
