//! The designer-facing parameter set: every slider of the voice-design
//! panel, the affect plane, utterance templates and named presets.

mod affect;
mod preset;
mod template;

pub use affect::{apply_affect, AffectMapping, AffectState};
pub use preset::{resolve_preset, OverrideValue, Preset, PresetKind, PresetRegistry};
pub use template::{AirflowShape, UtteranceKind, VocalTemplate, Voicing};

use serde::{Deserialize, Serialize};

use crate::allometry;
use crate::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;
pub const DEFAULT_MASS_KG: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Real,
    Integer,
    Flag,
}

/// Name and legal range of one slider.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamInfo {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub kind: ParamKind,
}

impl ParamInfo {
    const fn real(name: &'static str, min: f64, max: f64) -> Self {
        Self { name, min, max, kind: ParamKind::Real }
    }

    pub fn range_text(&self) -> String {
        match self.kind {
            ParamKind::Flag => "{false, true}".to_string(),
            _ => format!("[{}, {}]", self.min, self.max),
        }
    }
}

pub const PARAMS: &[ParamInfo] = &[
    ParamInfo::real("mass", allometry::MASS_RANGE_KG.0, allometry::MASS_RANGE_KG.1),
    ParamInfo::real("f0_base", 10.0, 8000.0),
    ParamInfo::real("f0_excursion", 0.0, 2.0),
    ParamInfo::real("voice_quality", 0.0, 1.0),
    ParamInfo::real("aspiration", 0.0, 1.0),
    ParamInfo { name: "quantisation_steps", min: 0.0, max: 64.0, kind: ParamKind::Integer },
    ParamInfo { name: "dual_folds_enabled", min: 0.0, max: 1.0, kind: ParamKind::Flag },
    ParamInfo::real("fold_detune", 0.0, 100.0),
    ParamInfo::real("tract_length", allometry::TRACT_LENGTH_FLOOR_CM, 100.0),
    ParamInfo::real("mouth_open_base", 0.0, 1.0),
    ParamInfo::real("mouth_open_depth", 0.0, 1.0),
    ParamInfo::real("syllabic_rate", 0.1, 20.0),
    ParamInfo::real("uvula_rate", 1.0, 100.0),
    ParamInfo::real("uvula_depth", 0.0, 1.0),
    ParamInfo::real("airflow_scale", 0.0, 4.0),
    ParamInfo { name: "sample_rate", min: 16_000.0, max: 48_000.0, kind: ParamKind::Integer },
];

pub fn param_info(name: &str) -> Option<&'static ParamInfo> {
    PARAMS.iter().find(|p| p.name == name)
}

/// Complete slider state of the synthesiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoiceParams {
    /// Body mass, kg. Drives lung capacity, airflow and breathing rate at render time.
    pub mass: f64,
    /// Hz
    pub f0_base: f64,
    /// Peak rise of the rise-fall contour as a fraction of `f0_base`.
    pub f0_excursion: f64,
    /// Spectral tilt of the glottal pulse, 0 = lax/dark, 1 = tense/bright.
    pub voice_quality: f64,
    /// Noise share of the excitation.
    pub aspiration: f64,
    /// 0 = continuous contour.
    pub quantisation_steps: u32,
    pub dual_folds_enabled: bool,
    /// Hz offset of the second fold set.
    pub fold_detune: f64,
    /// cm
    pub tract_length: f64,
    /// 0 = open, 1 = closed.
    pub mouth_open_base: f64,
    pub mouth_open_depth: f64,
    /// Hz
    pub syllabic_rate: f64,
    /// Hz
    pub uvula_rate: f64,
    pub uvula_depth: f64,
    /// Multiplier on the allometric flow rate.
    pub airflow_scale: f64,
    pub sample_rate: u32,
}

impl Default for VoiceParams {
    fn default() -> Self {
        params_from_mass(DEFAULT_MASS_KG).expect("default mass is in range")
    }
}

/// Slider positions implied by a body mass; everything not mass-dependent
/// sits at its default.
pub fn params_from_mass(mass: f64) -> Result<VoiceParams> {
    let profile = allometry::profile(mass)?;
    Ok(VoiceParams {
        mass,
        f0_base: profile.fundamental_frequency,
        f0_excursion: 0.25,
        voice_quality: 0.5,
        aspiration: 0.05,
        quantisation_steps: 0,
        dual_folds_enabled: false,
        fold_detune: 8.0,
        tract_length: profile.tract_length,
        mouth_open_base: 0.1,
        mouth_open_depth: 0.4,
        syllabic_rate: 3.0,
        uvula_rate: 25.0,
        uvula_depth: 0.0,
        airflow_scale: 1.0,
        sample_rate: DEFAULT_SAMPLE_RATE,
    })
}

impl VoiceParams {
    /// Moves the body-size slider, re-deriving the mass-dependent sliders.
    pub fn set_mass(&mut self, mass: f64) -> Result<()> {
        let profile = allometry::profile(mass)?;
        let mut next = *self;
        next.mass = mass;
        next.f0_base = profile.fundamental_frequency;
        next.tract_length = profile.tract_length;
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "mass" => self.mass,
            "f0_base" => self.f0_base,
            "f0_excursion" => self.f0_excursion,
            "voice_quality" => self.voice_quality,
            "aspiration" => self.aspiration,
            "quantisation_steps" => self.quantisation_steps as f64,
            "dual_folds_enabled" => f64::from(u8::from(self.dual_folds_enabled)),
            "fold_detune" => self.fold_detune,
            "tract_length" => self.tract_length,
            "mouth_open_base" => self.mouth_open_base,
            "mouth_open_depth" => self.mouth_open_depth,
            "syllabic_rate" => self.syllabic_rate,
            "uvula_rate" => self.uvula_rate,
            "uvula_depth" => self.uvula_depth,
            "airflow_scale" => self.airflow_scale,
            "sample_rate" => self.sample_rate as f64,
            _ => return Err(Error::UnknownParameter(name.to_string())),
        })
    }

    /// Sets one slider. The update is all-or-nothing: on error `self` is
    /// unchanged. Setting `mass` re-derives `f0_base` and `tract_length`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if name == "mass" {
            check_field(param_info(name).unwrap(), value)?;
            return self.set_mass(value);
        }
        let mut next = *self;
        next.set_raw(name, value)?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    /// Range-checks and stores a field without the cross-field checks.
    pub(crate) fn set_raw(&mut self, name: &str, value: f64) -> Result<()> {
        let info = param_info(name).ok_or_else(|| Error::UnknownParameter(name.to_string()))?;
        check_field(info, value)?;
        match name {
            "mass" => self.mass = value,
            "f0_base" => self.f0_base = value,
            "f0_excursion" => self.f0_excursion = value,
            "voice_quality" => self.voice_quality = value,
            "aspiration" => self.aspiration = value,
            "quantisation_steps" => self.quantisation_steps = value as u32,
            "dual_folds_enabled" => self.dual_folds_enabled = value != 0.0,
            "fold_detune" => self.fold_detune = value,
            "tract_length" => self.tract_length = value,
            "mouth_open_base" => self.mouth_open_base = value,
            "mouth_open_depth" => self.mouth_open_depth = value,
            "syllabic_rate" => self.syllabic_rate = value,
            "uvula_rate" => self.uvula_rate = value,
            "uvula_depth" => self.uvula_depth = value,
            "airflow_scale" => self.airflow_scale = value,
            "sample_rate" => self.sample_rate = value as u32,
            _ => unreachable!("PARAMS and set_raw disagree on `{name}`"),
        }
        Ok(())
    }

    /// Checks every slider range plus the cross-field constraints.
    pub fn validate(&self) -> Result<()> {
        for info in PARAMS {
            check_field(info, self.get(info.name)?)?;
        }
        if self.mouth_open_base + self.mouth_open_depth > 1.0 {
            return Err(Error::domain(
                "mouth_open_base + mouth_open_depth",
                self.mouth_open_base + self.mouth_open_depth,
                "<= 1",
            ));
        }
        self.check_pitch_headroom()
    }

    /// The highest fundamental the contour (and second fold set) can reach
    /// must stay below Nyquist.
    pub(crate) fn check_pitch_headroom(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        let peak = self.peak_f0();
        if peak.is_finite() && peak < nyquist {
            Ok(())
        } else {
            Err(Error::domain(
                "peak fundamental f0_base*(1+f0_excursion)+fold_detune",
                peak,
                format!("< {nyquist} Hz (Nyquist)"),
            ))
        }
    }

    pub fn peak_f0(&self) -> f64 {
        let detune = if self.dual_folds_enabled { self.fold_detune } else { 0.0 };
        self.f0_base * (1.0 + self.f0_excursion) + detune
    }
}

fn check_field(info: &ParamInfo, value: f64) -> Result<()> {
    let in_range = value.is_finite() && value >= info.min && value <= info.max;
    let well_formed = match info.kind {
        ParamKind::Real => true,
        ParamKind::Integer => value.fract() == 0.0,
        ParamKind::Flag => value == 0.0 || value == 1.0,
    };
    if in_range && well_formed {
        Ok(())
    } else {
        Err(Error::domain(info.name, value, info.range_text()))
    }
}
