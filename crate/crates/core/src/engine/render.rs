use serde::{Deserialize, Serialize};

use super::{post_process, AudioBuffer, UtteranceVoice, RENDER_CAP_S};
use crate::allometry;
use crate::voice::{apply_affect, AffectState, UtteranceKind, VoiceParams};
use crate::{Error, Result};

/// Everything needed to render one vocalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderRequest {
    pub params: VoiceParams,
    #[serde(default)]
    pub affect: AffectState,
    pub seed: u64,
    pub kind: UtteranceKind,
}

impl RenderRequest {
    pub fn new(params: VoiceParams, affect: AffectState, seed: u64, kind: UtteranceKind) -> Self {
        Self { params, affect, seed, kind }
    }
}

/// Length of the utterance the effective sliders call for: usable lung
/// volume over the scaled flow, times the template's duration factor.
/// With no airflow at all the neutral length is used (and nothing sounds).
pub fn utterance_duration_for(effective: &VoiceParams, kind: &UtteranceKind) -> Result<f64> {
    let profile = allometry::profile(effective.mass)?;
    let scale = if effective.airflow_scale > 0.0 { effective.airflow_scale } else { 1.0 };
    let seconds = allometry::utterance_duration(
        profile.lung_capacity_litres(),
        profile.flow_rate * scale,
    )?;
    Ok(seconds * kind.template().duration_scale)
}

/// Renders one vocalisation: affect applied, lungs → larynx → tract →
/// post-processing (no normalisation). Identical requests give
/// bit-identical buffers.
pub fn render_utterance(request: &RenderRequest) -> Result<AudioBuffer> {
    request.params.validate()?;
    let effective = apply_affect(&request.params, request.affect);
    effective.check_pitch_headroom()?;
    let duration = utterance_duration_for(&effective, &request.kind)?;
    if duration > RENDER_CAP_S {
        return Err(Error::DurationCap { requested: duration, cap: RENDER_CAP_S });
    }
    let mut voice = UtteranceVoice::new(
        &effective,
        request.kind.template(),
        duration,
        effective.airflow_scale,
        request.seed,
    )?;
    let samples = (0..voice.len()).map(|_| voice.next_sample() as f32).collect();
    let raw = AudioBuffer::new(effective.sample_rate, samples);
    Ok(post_process(&raw, false))
}
