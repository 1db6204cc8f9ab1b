use serde::{Deserialize, Serialize};

use super::{derive_seed, tract_configs, utterance_duration_for, PostChain, UtteranceVoice, RENDER_CAP_S, RING_OUT_S};
use crate::voice::{apply_affect, AffectState, UtteranceKind, VoiceParams};
use crate::{Error, Result};

/// Samples per block; pending updates are absorbed only at block starts.
pub const BLOCK_SIZE: usize = 256;

/// Snapshot of the running voice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    /// Hz
    pub f0: f64,
    pub mouth_opening: f64,
    /// Hz
    pub formants: [f64; 3],
    /// An utterance is sounding.
    pub active: bool,
}

/// Pull-based live renderer.
///
/// Setters only queue changes; they take effect at the next block
/// boundary. [`StreamEngine::next_block`] does not allocate.
#[derive(Debug, Clone)]
pub struct StreamEngine {
    params: VoiceParams,
    affect: AffectState,
    seed: u64,
    pending_params: Option<VoiceParams>,
    pending_affect: Option<AffectState>,
    pending_vocalise: Option<UtteranceKind>,
    voice: Option<UtteranceVoice>,
    ring_left: usize,
    post: PostChain,
    position: u64,
    utterances: u64,
}

impl StreamEngine {
    pub fn new(params: VoiceParams, affect: AffectState, seed: u64) -> Result<Self> {
        params.validate()?;
        let affect = affect.clamped();
        apply_affect(&params, affect).check_pitch_headroom()?;
        Ok(Self {
            params,
            affect,
            seed,
            pending_params: None,
            pending_affect: None,
            pending_vocalise: None,
            voice: None,
            ring_left: 0,
            post: PostChain::new(params.sample_rate as f64),
            position: 0,
            utterances: 0,
        })
    }

    /// Parameters as they will be after pending updates are absorbed.
    pub fn params(&self) -> &VoiceParams {
        self.pending_params.as_ref().unwrap_or(&self.params)
    }

    pub fn affect(&self) -> AffectState {
        self.pending_affect.unwrap_or(self.affect)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_rate(&self) -> u32 {
        self.params.sample_rate
    }

    /// Samples rendered so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Queues a full parameter set. Rejected sets leave the engine untouched.
    pub fn set_params(&mut self, params: VoiceParams) -> Result<()> {
        params.validate()?;
        apply_affect(&params, self.affect()).check_pitch_headroom()?;
        self.pending_params = Some(params);
        Ok(())
    }

    pub fn set_affect(&mut self, affect: AffectState) -> Result<()> {
        let affect = affect.clamped();
        apply_affect(self.params(), affect).check_pitch_headroom()?;
        self.pending_affect = Some(affect);
        Ok(())
    }

    /// Queues an utterance, replacing any that is sounding. Returns its
    /// length in seconds under the pending parameters.
    pub fn vocalise(&mut self, kind: UtteranceKind) -> Result<f64> {
        let effective = apply_affect(self.params(), self.affect());
        let duration = utterance_duration_for(&effective, &kind)?;
        if duration > RENDER_CAP_S {
            return Err(Error::DurationCap { requested: duration, cap: RENDER_CAP_S });
        }
        self.pending_vocalise = Some(kind);
        Ok(duration)
    }

    pub fn telemetry(&self) -> Telemetry {
        match &self.voice {
            Some(v) if !v.is_finished() => Telemetry {
                f0: v.f0(),
                mouth_opening: v.mouth_opening(),
                formants: v.formant_centers(),
                active: true,
            },
            _ => {
                let p = apply_affect(&self.params, self.affect);
                let formants = tract_configs(p.tract_length, p.mouth_open_base, p.sample_rate as f64)
                    .map(|c| c.map(|r| r.center_frequency))
                    .unwrap_or([0.0; 3]);
                Telemetry { f0: p.f0_base, mouth_opening: p.mouth_open_base, formants, active: false }
            }
        }
    }

    fn absorb(&mut self) {
        let params_changed = self.pending_params.is_some() || self.pending_affect.is_some();
        if let Some(p) = self.pending_params.take() {
            if p.sample_rate != self.params.sample_rate {
                self.voice = None;
                self.post = PostChain::new(p.sample_rate as f64);
            }
            self.params = p;
        }
        if let Some(a) = self.pending_affect.take() {
            self.affect = a;
        }
        let effective = apply_affect(&self.params, self.affect);
        if let Some(kind) = self.pending_vocalise.take() {
            self.utterances += 1;
            let duration = utterance_duration_for(&effective, &kind);
            self.voice = duration.and_then(|d| {
                UtteranceVoice::new(
                    &effective,
                    kind.template(),
                    d,
                    effective.airflow_scale,
                    derive_seed(self.seed, self.utterances),
                )
            })
            .ok();
            self.ring_left = (RING_OUT_S * effective.sample_rate as f64) as usize;
        } else if params_changed {
            if let Some(v) = self.voice.as_mut() {
                v.update_params(&effective, effective.airflow_scale);
            }
        }
    }

    /// Fills `out` with the next samples. Updates are absorbed whenever the
    /// stream position crosses a multiple of [`BLOCK_SIZE`].
    pub fn next_block(&mut self, out: &mut [f32]) {
        for slot in out.iter_mut() {
            if self.position % BLOCK_SIZE as u64 == 0 {
                self.absorb();
            }
            let raw = match self.voice.as_mut() {
                Some(v) => {
                    let s = v.next_sample();
                    if v.is_finished() {
                        if self.ring_left == 0 {
                            self.voice = None;
                        } else {
                            self.ring_left -= 1;
                        }
                    }
                    s
                }
                None => 0.0,
            };
            *slot = self.post.process(raw) as f32;
            self.position += 1;
        }
    }
}
