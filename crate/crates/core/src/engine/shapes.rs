//! Time-varying control curves: airflow envelope, pitch contour, mouth
//! trajectory and uvula modulation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::allometry;
use crate::voice::{AirflowShape, VocalTemplate};
use crate::{Error, Result};

const ATTACK_FRACTION: f64 = 0.10;
const RELEASE_FRACTION: f64 = 0.15;
const REFERENCE_MASS_KG: f64 = 2.0;

/// Allometric flow rate of the 2 kg reference body, L/s.
pub fn reference_flow() -> f64 {
    static FLOW: OnceLock<f64> = OnceLock::new();
    *FLOW.get_or_init(|| {
        allometry::profile(REFERENCE_MASS_KG)
            .expect("reference mass is in range")
            .flow_rate
    })
}

fn raised_cosine(x: f64) -> f64 {
    0.5 * (1.0 - libm::cos(PI * x.clamp(0.0, 1.0)))
}

/// Attack-sustain-release shape in [0, 1] (10% attack, 15% release).
fn exhale_shape(t: f64, duration: f64) -> f64 {
    let attack = ATTACK_FRACTION * duration;
    let release = RELEASE_FRACTION * duration;
    if t < attack {
        raised_cosine(t / attack)
    } else if t > duration - release {
        raised_cosine((duration - t) / release)
    } else {
        1.0
    }
}

/// Airflow at time `t` of an exhalation lasting `duration`, with the peak
/// set by `flow_rate` relative to the 2 kg reference flow and clamped to 1.
/// The part above 1 is returned by [`airflow_gain`] for the mix stage.
pub fn lungs_envelope(t: f64, duration: f64, flow_rate: f64) -> Result<f64> {
    lungs_envelope_with_reference(t, duration, flow_rate, reference_flow())
}

pub fn lungs_envelope_with_reference(
    t: f64,
    duration: f64,
    flow_rate: f64,
    reference: f64,
) -> Result<f64> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::domain("duration", duration, "> 0 s"));
    }
    if !(0.0..=duration).contains(&t) {
        return Err(Error::domain("t", t, format!("[0, {duration}] s")));
    }
    if !(flow_rate >= 0.0) || !(reference > 0.0) {
        return Err(Error::domain("flow rate", flow_rate, ">= 0 with a positive reference"));
    }
    Ok(exhale_shape(t, duration) * (flow_rate / reference).min(1.0))
}

/// Make-up gain for flows above the reference (linear, applied pre-limiter).
pub fn airflow_gain(flow_rate: f64, reference: f64) -> f64 {
    (flow_rate / reference).max(1.0)
}

/// Unit-peak airflow shape for a vocalisation template.
pub fn template_envelope(template: &VocalTemplate, t: f64, duration: f64) -> f64 {
    if !(duration > 0.0) || t < 0.0 || t > duration {
        return 0.0;
    }
    match template.airflow {
        AirflowShape::Sustained => exhale_shape(t, duration),
        AirflowShape::Pulsed => {
            let count = template.syllables.max(1) as f64;
            let s = libm::sin(PI * count * t / duration);
            s * s
        }
        AirflowShape::Burst => {
            // slow build to 40% over 60%, jump to the peak at 70%, decay to 0
            let u = t / duration;
            if u < 0.6 {
                0.4 * raised_cosine(u / 0.6)
            } else if u < 0.7 {
                0.4 + 0.6 * raised_cosine((u - 0.6) / 0.1)
            } else {
                raised_cosine((1.0 - u) / 0.3)
            }
        }
    }
}

/// Rise-fall intonation: a half-sine hump over the utterance, optionally
/// quantised to `quantisation_steps` equal levels (sample-and-hold).
pub fn pitch_contour(
    t: f64,
    duration: f64,
    f0_base: f64,
    f0_excursion: f64,
    quantisation_steps: u32,
) -> f64 {
    if !(duration > 0.0) || t <= 0.0 || t >= duration {
        return f0_base;
    }
    let hump = libm::sin(PI * t / duration).clamp(0.0, 1.0);
    let level = if quantisation_steps > 0 {
        let k = quantisation_steps as f64;
        libm::round(hump * k) / k
    } else {
        hump
    };
    f0_base * (1.0 + f0_excursion * level)
}

/// Mouth opening: one open-close cycle per syllable period, starting at `base`.
pub fn mouth_trajectory(t: f64, syllabic_rate: f64, base: f64, depth: f64) -> f64 {
    if depth == 0.0 {
        return base;
    }
    let cycle = 0.5 * (1.0 - libm::cos(2.0 * PI * syllabic_rate * t));
    (base + depth * cycle).clamp(0.0, 1.0)
}

/// Uvula flutter as amplitude modulation; `depth = 0` is the identity.
pub fn uvula_modulate(sample: f64, t: f64, uvula_rate: f64, uvula_depth: f64) -> f64 {
    if uvula_depth == 0.0 {
        return sample;
    }
    let m = 0.5 * (1.0 + libm::cos(2.0 * PI * uvula_rate * t));
    sample * (1.0 - uvula_depth * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voice::UtteranceKind;
    use std::collections::BTreeSet;

    #[test]
    fn envelope_examples() {
        let q = reference_flow();
        assert_eq!(lungs_envelope(0.0, 2.0, q).unwrap(), 0.0);
        assert_eq!(lungs_envelope(1.0, 2.0, q).unwrap(), 1.0);
        assert_eq!(lungs_envelope(2.0, 2.0, q).unwrap(), 0.0);
        // doubled flow clamps at the envelope and reappears as +6 dB gain
        assert_eq!(lungs_envelope(1.0, 2.0, 2.0 * q).unwrap(), 1.0);
        assert!((20.0 * airflow_gain(2.0 * q, q).log10() - 6.0206).abs() < 1e-3);
        assert_eq!(lungs_envelope(1.0, 2.0, 0.5 * q).unwrap(), 0.5);
        assert!(lungs_envelope(2.5, 2.0, q).is_err());
        assert!(lungs_envelope(-0.1, 2.0, q).is_err());
    }

    #[test]
    fn envelope_is_smooth_and_bounded() {
        let q = reference_flow();
        let d = 1.7;
        let mut prev = 0.0;
        for i in 0..=1700 {
            let v = lungs_envelope(i as f64 / 1000.0 * d / 1.7, d, q).unwrap();
            assert!((0.0..=1.0).contains(&v));
            assert!((v - prev).abs() < 0.02);
            prev = v;
        }
    }

    #[test]
    fn contour_examples() {
        let (d, f0, e) = (1.87, 758.0, 0.25);
        assert_eq!(pitch_contour(0.0, d, f0, e, 0), f0);
        assert_eq!(pitch_contour(d, d, f0, e, 0), f0);
        assert!((pitch_contour(d / 2.0, d, f0, e, 0) - f0 * 1.25).abs() < 1e-9);
    }

    #[test]
    fn one_quantisation_step_gives_one_plateau() {
        let (d, f0, e) = (2.0, 500.0, 0.3);
        let levels: BTreeSet<u64> = (0..=20_000)
            .map(|i| pitch_contour(d * i as f64 / 20_000.0, d, f0, e, 1).to_bits())
            .collect();
        let above: Vec<f64> = levels.iter().map(|b| f64::from_bits(*b)).filter(|v| *v > f0).collect();
        assert_eq!(above.len(), 1);
        assert!((above[0] - f0 * 1.3).abs() < 1e-9);

        let levels: BTreeSet<u64> = (0..=20_000)
            .map(|i| pitch_contour(d * i as f64 / 20_000.0, d, f0, e, 4).to_bits())
            .collect();
        assert_eq!(levels.len(), 5);
    }

    #[test]
    fn mouth_examples() {
        for t in [0.0, 0.3, 1.7] {
            assert_eq!(mouth_trajectory(t, 3.0, 0.2, 0.0), 0.2);
        }
        assert_eq!(mouth_trajectory(0.0, 3.0, 0.2, 0.5), 0.2);
        // 2 Hz over 2 s: count local maxima
        let xs: Vec<f64> = (0..=2000).map(|i| mouth_trajectory(i as f64 / 1000.0, 2.0, 0.1, 0.6)).collect();
        let maxima = xs.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).count();
        assert_eq!(maxima, 4);
    }

    #[test]
    fn uvula_examples() {
        for (i, x) in [0.3, -0.7, 1.0].iter().enumerate() {
            assert_eq!(uvula_modulate(*x, i as f64 * 0.01, 25.0, 0.0), *x);
        }
        let min = (0..4410)
            .map(|i| uvula_modulate(1.0, i as f64 / 44_100.0, 25.0, 0.5))
            .fold(f64::INFINITY, f64::min);
        assert!((min - 0.5).abs() < 1e-6);
    }

    #[test]
    fn template_envelopes_stay_in_unit_range() {
        for kind in UtteranceKind::NAMED {
            let t = kind.template();
            let d = 1.3;
            for i in 0..=1000 {
                let v = template_envelope(&t, d * i as f64 / 1000.0, d);
                assert!((0.0..=1.0).contains(&v), "{kind:?} {v}");
            }
            assert_eq!(template_envelope(&t, 0.0, d), 0.0);
        }
    }
}
