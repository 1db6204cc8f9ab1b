//! Body-mass scaling laws for the mammalian vocal apparatus.
//!
//! Every quantity the synthesiser needs (lung capacity, breathing rate,
//! airflow, fundamental frequency, vocal-tract length and formant
//! placement) is a closed-form function of body mass. All functions are
//! pure and reject inputs outside the supported domain instead of
//! extrapolating.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of sound in the vocal tract, cm/s.
pub const SPEED_OF_SOUND_CM_S: f64 = 35_000.0;
/// Shortest vocal tract the model will produce, cm.
pub const TRACT_LENGTH_FLOOR_CM: f64 = 1.0;
/// Lowest formant centre the model will produce, Hz.
pub const FORMANT_FLOOR_HZ: f64 = 30.0;
/// Supported body-mass range, kg.
pub const MASS_RANGE_KG: (f64, f64) = (0.01, 10_000.0);

/// Fraction of lung volume used per breath/vocalisation.
pub const USABLE_LUNG_FRACTION: f64 = 0.42;
/// Airflow restriction imposed by the closed vocal folds.
pub const AIRFLOW_RESTRICTION: f64 = 2.62;
/// Rounded constant of the simplified flow-rate law.
pub const FLOW_CONSTANT: f64 = 0.32;

const LUNG_COEFF_ML: f64 = 53.5;
const LUNG_EXPONENT: f64 = 1.06;
const BREATH_COEFF_HZ: f64 = 0.84;
const BREATH_EXPONENT: f64 = -0.26;
const F0_EXPONENT: f64 = -0.4;
const TRACT_INTERCEPT_CM: f64 = 3.15;
const TRACT_SLOPE_CM: f64 = 11.53;

fn check_mass(mass: f64) -> Result<f64> {
    let (lo, hi) = MASS_RANGE_KG;
    if mass.is_finite() && (lo..=hi).contains(&mass) {
        Ok(mass)
    } else {
        Err(Error::domain("mass", mass, format!("[{lo}, {hi}] kg")))
    }
}

fn check_positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "a finite value > 0"))
    }
}

/// Lung capacity in millilitres.
pub fn lung_capacity(mass: f64) -> Result<f64> {
    let mass = check_mass(mass)?;
    Ok(LUNG_COEFF_ML * mass.powf(LUNG_EXPONENT))
}

/// Resting breathing rate in Hz.
pub fn breathing_rate(mass: f64) -> Result<f64> {
    let mass = check_mass(mass)?;
    Ok(BREATH_COEFF_HZ * mass.powf(BREATH_EXPONENT))
}

/// Volumetric flow rate (L/s) from capacity in litres and breathing rate in Hz.
pub fn flow_rate(capacity_l: f64, breathing_rate: f64) -> Result<f64> {
    let capacity_l = check_positive("lung capacity", capacity_l)?;
    let breathing_rate = check_positive("breathing rate", breathing_rate)?;
    Ok(FLOW_CONSTANT * capacity_l * breathing_rate)
}

/// Unsimplified flow-rate law: usable volume expelled over half a breath,
/// slowed by the fold restriction. Agrees with [`flow_rate`] to ~0.2%.
pub fn flow_rate_unsimplified(capacity_l: f64, breathing_rate: f64) -> Result<f64> {
    let capacity_l = check_positive("lung capacity", capacity_l)?;
    let breathing_rate = check_positive("breathing rate", breathing_rate)?;
    let half_breath = 1.0 / (2.0 * breathing_rate);
    Ok(USABLE_LUNG_FRACTION * capacity_l / (AIRFLOW_RESTRICTION * half_breath))
}

/// Length of one vocalisation in seconds: usable lung volume over flow.
pub fn utterance_duration(capacity_l: f64, flow_rate: f64) -> Result<f64> {
    let capacity_l = check_positive("lung capacity", capacity_l)?;
    let flow_rate = check_positive("flow rate", flow_rate)?;
    Ok(USABLE_LUNG_FRACTION * capacity_l / flow_rate)
}

/// Mean fundamental frequency in Hz (the underlying law is in kHz).
pub fn fundamental_frequency(mass: f64) -> Result<f64> {
    let mass = check_mass(mass)?;
    Ok(1000.0 * mass.powf(F0_EXPONENT))
}

/// Vocal-tract length in cm, base-10 logarithm, clamped at
/// [`TRACT_LENGTH_FLOOR_CM`] (the raw law goes negative below ~0.53 kg).
pub fn tract_length(mass: f64) -> Result<f64> {
    let mass = check_mass(mass)?;
    Ok(raw_tract_length(mass).max(TRACT_LENGTH_FLOOR_CM))
}

pub(crate) fn raw_tract_length(mass: f64) -> f64 {
    TRACT_INTERCEPT_CM + TRACT_SLOPE_CM * mass.log10()
}

/// Resonance of a uniform tube closed at the glottis, with the mouth end
/// blending from open (`mouth_opening = 0`) to closed (`1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormantSpec {
    pub index: u32,
    pub mouth_opening: f64,
    pub speed_of_sound: f64,
    pub tract_length: f64,
    pub frequency: f64,
}

impl FormantSpec {
    pub fn new(index: u32, mouth_opening: f64, tract_length: f64) -> Result<Self> {
        Self::with_speed_of_sound(index, mouth_opening, tract_length, SPEED_OF_SOUND_CM_S)
    }

    pub fn with_speed_of_sound(
        index: u32,
        mouth_opening: f64,
        tract_length: f64,
        speed_of_sound: f64,
    ) -> Result<Self> {
        if index < 1 {
            return Err(Error::domain("formant index", index as f64, "n >= 1"));
        }
        if !(0.0..=1.0).contains(&mouth_opening) {
            return Err(Error::domain("mouth opening", mouth_opening, "[0, 1]"));
        }
        let tract_length = check_positive("tract length", tract_length)?;
        let speed_of_sound = check_positive("speed of sound", speed_of_sound)?;
        let frequency = raw_formant(index, mouth_opening, tract_length, speed_of_sound)
            .max(FORMANT_FLOOR_HZ);
        Ok(Self {
            index,
            mouth_opening,
            speed_of_sound,
            tract_length,
            frequency,
        })
    }
}

pub(crate) fn raw_formant(index: u32, mouth_opening: f64, tract_length: f64, c: f64) -> f64 {
    (2.0 * index as f64 - (mouth_opening + 1.0)) * c / (4.0 * tract_length)
}

/// Centre frequency (Hz) of formant `n` for the given mouth opening and tract length.
pub fn formant_frequency(n: u32, mouth_opening: f64, tract_length: f64) -> Result<f64> {
    FormantSpec::new(n, mouth_opening, tract_length).map(|f| f.frequency)
}

/// Everything that follows from body mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllometricProfile {
    /// kg
    pub mass: f64,
    /// mL
    pub lung_capacity: f64,
    /// Hz
    pub breathing_rate: f64,
    /// L/s
    pub flow_rate: f64,
    /// Hz
    pub fundamental_frequency: f64,
    /// cm
    pub tract_length: f64,
    /// s
    pub utterance_duration: f64,
}

impl AllometricProfile {
    pub fn lung_capacity_litres(&self) -> f64 {
        self.lung_capacity / 1000.0
    }
}

/// Derives the full profile for a body mass.
pub fn profile(mass: f64) -> Result<AllometricProfile> {
    let lung_capacity = lung_capacity(mass)?;
    let breathing_rate = breathing_rate(mass)?;
    let capacity_l = lung_capacity / 1000.0;
    let flow = flow_rate(capacity_l, breathing_rate)?;
    Ok(AllometricProfile {
        mass,
        lung_capacity,
        breathing_rate,
        flow_rate: flow,
        fundamental_frequency: fundamental_frequency(mass)?,
        tract_length: tract_length(mass)?,
        utterance_duration: utterance_duration(capacity_l, flow)?,
    })
}
