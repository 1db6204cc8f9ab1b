//! Sample generation: lungs (airflow envelope) → larynx (glottal pulse and
//! aspiration) → vocal tract (three parallel formant resonators and the
//! uvula) → post-processing.
//!
//! Everything here is deterministic for a fixed seed. Transcendental
//! functions come from `libm` so results do not depend on the platform C
//! library.

mod breathing;
mod glottal;
mod post;
mod render;
mod resonator;
mod rng;
mod shapes;
mod stream;
mod voice;

pub use breathing::{breathing_session, breathing_session_with, BreathCycle, BreathingOptions, BreathingSession};
pub use glottal::{glottal_rolloff, glottal_sample, GlottalPulse, Larynx, LarynxSettings};
pub use post::{normalize_peak, post_process, soft_clip, DcBlocker, PostChain};
pub use render::{render_utterance, utterance_duration_for, RenderRequest};
pub use resonator::{tract_configs, Resonator, ResonatorConfig, VocalTract};
pub use rng::{derive_seed, NoiseSource};
pub use shapes::{
    airflow_gain, lungs_envelope, lungs_envelope_with_reference, mouth_trajectory, pitch_contour,
    reference_flow, template_envelope, uvula_modulate,
};
pub use stream::{StreamEngine, Telemetry, BLOCK_SIZE};
pub use voice::UtteranceVoice;

use serde::{Deserialize, Serialize};

/// Longest utterance or session a single call will render, seconds.
pub const RENDER_CAP_S: f64 = 30.0;
/// Samples between control-rate updates (mouth, formants, pulse shape).
pub const CONTROL_INTERVAL: usize = 32;
/// Time after which a silent input is guaranteed to produce exact zeros.
pub const RING_OUT_S: f64 = 0.25;

/// Mono samples at a fixed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioBuffer {
    pub sample_rate: u32,
    pub samples: Vec<f32>,
}

impl AudioBuffer {
    pub fn new(sample_rate: u32, samples: Vec<f32>) -> Self {
        Self { sample_rate, samples }
    }

    pub fn silence(sample_rate: u32, len: usize) -> Self {
        Self::new(sample_rate, vec![0.0; len])
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.samples.iter().map(|&s| (s as f64) * (s as f64)).sum();
        (sum / self.samples.len() as f64).sqrt()
    }

    /// Copy of `[start, start + len)` in seconds, clipped to the buffer.
    pub fn slice_seconds(&self, start: f64, len: f64) -> AudioBuffer {
        let sr = self.sample_rate as f64;
        let a = ((start * sr).round().max(0.0) as usize).min(self.samples.len());
        let b = (((start + len) * sr).round().max(0.0) as usize).min(self.samples.len());
        AudioBuffer::new(self.sample_rate, self.samples[a..b].to_vec())
    }
}
