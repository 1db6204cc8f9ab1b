use super::glottal::{Larynx, LarynxSettings};
use super::resonator::{tract_configs, ResonatorConfig, VocalTract};
use super::shapes::{mouth_trajectory, pitch_contour, template_envelope, uvula_modulate};
use super::{BLOCK_SIZE, CONTROL_INTERVAL};
use crate::voice::{AirflowShape, VocalTemplate, VoiceParams, Voicing};
use crate::{Error, Result};

/// Output trim per excitation type, bringing noise-excited and
/// pulse-excited tracts to a similar loudness.
const VOICED_TRIM: f64 = 0.5;
const UNVOICED_TRIM: f64 = 2.5;
/// Burst templates turn into turbulence after this fraction of the utterance.
const BURST_NOISE_ONSET: f64 = 0.65;
const BURST_ASPIRATION: f64 = 0.9;

/// One vocalisation in progress, rendered sample by sample.
///
/// Holds no heap data, so it can live inside a real-time render loop.
#[derive(Debug, Clone)]
pub struct UtteranceVoice {
    params: VoiceParams,
    template: VocalTemplate,
    sample_rate: f64,
    duration: f64,
    total: usize,
    index: usize,
    level: f64,
    gain: f64,
    settings: LarynxSettings,
    larynx: Larynx,
    tract: VocalTract,
    ramp: Option<Ramp>,
    f0_now: f64,
    mouth_now: f64,
    configs: [ResonatorConfig; 3],
}

/// Linear glide of f0_base and the formant centres over one block.
#[derive(Debug, Clone, Copy)]
struct Ramp {
    f0_from: f64,
    tract_from: f64,
    pos: usize,
}

impl UtteranceVoice {
    /// `params` are the effective (affect-applied) sliders; `airflow_ratio`
    /// is the flow relative to the body's neutral flow: it sets the envelope
    /// peak (clamped at 1) and the make-up gain above 1.
    pub fn new(
        params: &VoiceParams,
        template: VocalTemplate,
        duration: f64,
        airflow_ratio: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::domain("utterance duration", duration, "a finite value > 0 s"));
        }
        if !(airflow_ratio >= 0.0) || !airflow_ratio.is_finite() {
            return Err(Error::domain("airflow ratio", airflow_ratio, ">= 0"));
        }
        let sample_rate = params.sample_rate as f64;
        let configs = tract_configs(params.tract_length, params.mouth_open_base, sample_rate)?;
        let mut voice = Self {
            params: *params,
            template,
            sample_rate,
            duration,
            total: libm::round(duration * sample_rate) as usize,
            index: 0,
            level: 0.0,
            gain: 0.0,
            settings: LarynxSettings::from_params(params, template.voicing),
            larynx: Larynx::new(seed),
            tract: VocalTract::new(&configs, sample_rate),
            ramp: None,
            f0_now: params.f0_base,
            mouth_now: params.mouth_open_base,
            configs,
        };
        voice.set_airflow(airflow_ratio);
        Ok(voice)
    }

    fn set_airflow(&mut self, ratio: f64) {
        let trim = match self.template.voicing {
            Voicing::Voiced => VOICED_TRIM,
            Voicing::Unvoiced => UNVOICED_TRIM,
        };
        self.level = ratio.min(1.0);
        self.gain = ratio.max(1.0) * trim;
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn position(&self) -> usize {
        self.index
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn is_finished(&self) -> bool {
        self.index >= self.total
    }

    pub fn params(&self) -> &VoiceParams {
        &self.params
    }

    pub fn f0(&self) -> f64 {
        self.f0_now
    }

    pub fn mouth_opening(&self) -> f64 {
        self.mouth_now
    }

    pub fn formant_centers(&self) -> [f64; 3] {
        self.configs.map(|c| c.center_frequency)
    }

    /// Swaps in new effective sliders mid-utterance. f0_base and the
    /// formant centres glide over one block; the rest switch at once.
    /// The utterance length is fixed when the voice is created.
    pub fn update_params(&mut self, params: &VoiceParams, airflow_ratio: f64) {
        let (f0_from, tract_from) = match self.ramp {
            Some(r) => (self.ramped(r.f0_from, self.params.f0_base, r.pos), self.ramped(r.tract_from, self.params.tract_length, r.pos)),
            None => (self.params.f0_base, self.params.tract_length),
        };
        self.ramp = Some(Ramp { f0_from, tract_from, pos: 0 });
        self.params = *params;
        self.settings = LarynxSettings::from_params(params, self.template.voicing);
        self.set_airflow(airflow_ratio);
    }

    fn ramped(&self, from: f64, to: f64, pos: usize) -> f64 {
        from + (to - from) * (pos as f64 / BLOCK_SIZE as f64).min(1.0)
    }

    fn control_update(&mut self, t: f64) {
        let p = &self.params;
        let u = t / self.duration;
        self.mouth_now = if self.template.static_tract {
            p.mouth_open_base
        } else {
            let rate = if self.template.syllables > 0 {
                self.template.syllables as f64 / self.duration
            } else {
                p.syllabic_rate
            };
            mouth_trajectory(t, rate, p.mouth_open_base, p.mouth_open_depth)
        };
        let target = tract_configs(p.tract_length, self.mouth_now, self.sample_rate);
        let configs = match (self.ramp, target) {
            (Some(r), Ok(to)) => {
                let from = tract_configs(r.tract_from, self.mouth_now, self.sample_rate).unwrap_or(to);
                let w = (r.pos as f64 / BLOCK_SIZE as f64).min(1.0);
                let mut mixed = to;
                for (m, (a, b)) in mixed.iter_mut().zip(from.iter().zip(&to)) {
                    m.center_frequency = a.center_frequency + (b.center_frequency - a.center_frequency) * w;
                    m.bandwidth = a.bandwidth + (b.bandwidth - a.bandwidth) * w;
                    m.gain = a.gain + (b.gain - a.gain) * w;
                }
                Some(mixed)
            }
            (None, Ok(to)) => Some(to),
            (_, Err(_)) => None,
        };
        if let Some(c) = configs {
            self.configs = c;
            self.tract.configure(&self.configs, self.sample_rate);
        }
        if self.template.airflow == AirflowShape::Burst && u > BURST_NOISE_ONSET {
            self.settings.aspiration = self.params.aspiration.max(BURST_ASPIRATION);
        }
        let f0 = self.current_f0(t);
        self.larynx.retune(f0, &self.settings);
    }

    fn current_f0(&self, t: f64) -> f64 {
        let p = &self.params;
        let base = match self.ramp {
            Some(r) => self.ramped(r.f0_from, p.f0_base, r.pos),
            None => p.f0_base,
        };
        pitch_contour(t, self.duration, base, p.f0_excursion, p.quantisation_steps)
    }

    /// Next output sample (before post-processing). Past the end the tract
    /// keeps ringing on zero input.
    #[inline]
    pub fn next_sample(&mut self) -> f64 {
        if self.index >= self.total {
            return self.tract.process(0.0) * self.gain;
        }
        let t = self.index as f64 / self.sample_rate;
        if self.index % CONTROL_INTERVAL == 0 || self.ramp.is_some() && self.ramp.unwrap().pos == 0 {
            self.control_update(t);
        }
        let airflow = template_envelope(&self.template, t, self.duration) * self.level;
        self.f0_now = self.current_f0(t);
        let excitation = self.larynx.process(airflow, self.f0_now, &self.settings);
        let mut y = self.tract.process(excitation);
        if self.template.uvula {
            y = uvula_modulate(y, t, self.params.uvula_rate, self.params.uvula_depth);
        }
        if let Some(r) = self.ramp.as_mut() {
            r.pos += 1;
            if r.pos > BLOCK_SIZE {
                self.ramp = None;
            }
        }
        self.index += 1;
        y * self.gain
    }
}
