use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{UtteranceKind, VoiceParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    Animal,
    Vocalisation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OverrideValue {
    Flag(bool),
    Number(f64),
}

impl OverrideValue {
    pub fn as_f64(self) -> f64 {
        match self {
            OverrideValue::Flag(b) => f64::from(u8::from(b)),
            OverrideValue::Number(x) => x,
        }
    }
}

/// A named set of slider positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    pub kind: PresetKind,
    #[serde(default)]
    pub overrides: BTreeMap<String, OverrideValue>,
    /// Utterance template for vocalisation-type presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<UtteranceKind>,
}

impl Preset {
    fn new(name: &str, kind: PresetKind, overrides: &[(&str, OverrideValue)]) -> Self {
        Self {
            name: name.to_string(),
            kind,
            overrides: overrides.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            template: None,
        }
    }

    /// Applies the overrides to `base`. A `mass` override is applied
    /// first and re-derives the mass-dependent sliders; the result must
    /// pass [`VoiceParams::validate`].
    pub fn apply(&self, base: &VoiceParams) -> Result<VoiceParams> {
        let mut params = *base;
        if let Some(mass) = self.overrides.get("mass") {
            let mass = mass.as_f64();
            let profile = crate::allometry::profile(mass)?;
            params.mass = mass;
            params.f0_base = profile.fundamental_frequency;
            params.tract_length = profile.tract_length;
        }
        for (name, value) in self.overrides.iter().filter(|(k, _)| k.as_str() != "mass") {
            params.set_raw(name, value.as_f64())?;
        }
        params.validate()?;
        Ok(params)
    }

    /// Applies the preset as a designer would press its button: an animal
    /// replaces the whole voice (keeping the sample rate), a vocalisation
    /// adjusts the current one.
    pub fn layer(&self, current: &VoiceParams) -> Result<VoiceParams> {
        match self.kind {
            PresetKind::Animal => self.apply(&VoiceParams { sample_rate: current.sample_rate, ..VoiceParams::default() }),
            PresetKind::Vocalisation => self.apply(current),
        }
    }

    /// An animal preset pinning every slider to its value in `params`.
    pub fn capture(name: &str, params: &VoiceParams) -> Self {
        let overrides = super::PARAMS
            .iter()
            .map(|info| {
                let v = params.get(info.name).expect("listed parameter");
                let v = if info.kind == super::ParamKind::Flag { OverrideValue::Flag(v != 0.0) } else { n(v) };
                (info.name.to_string(), v)
            })
            .collect();
        Self { name: name.to_string(), kind: PresetKind::Animal, overrides, template: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetRegistry {
    pub presets: Vec<Preset>,
}

fn n(x: f64) -> OverrideValue {
    OverrideValue::Number(x)
}

impl PresetRegistry {
    /// The shipped animals and vocalisation types.
    pub fn builtin() -> Self {
        use PresetKind::*;
        let animal = |name: &str, mass: f64| Preset::new(name, Animal, &[("mass", n(mass))]);
        let mut presets = vec![
            animal("rat", 0.3),
            animal("cat", 4.0),
            animal("dog", 15.0),
            animal("sheep", 60.0),
            animal("cow", 600.0),
            Preset::new(
                "miro",
                Animal,
                &[
                    ("mass", n(2.0)),
                    ("dual_folds_enabled", OverrideValue::Flag(false)),
                    ("uvula_rate", n(25.0)),
                    ("uvula_depth", n(0.25)),
                    ("voice_quality", n(0.6)),
                    ("aspiration", n(0.05)),
                    ("mouth_open_base", n(0.1)),
                    ("mouth_open_depth", n(0.4)),
                    ("syllabic_rate", n(3.0)),
                ],
            ),
        ];
        let vocal = |name: &str, kind: UtteranceKind, overrides: &[(&str, OverrideValue)]| {
            let mut p = Preset::new(name, Vocalisation, overrides);
            p.template = Some(kind);
            p
        };
        presets.extend([
            vocal("normal", UtteranceKind::Voiced, &[]),
            vocal(
                "breath",
                UtteranceKind::Breath,
                &[("mouth_open_depth", n(0.0)), ("uvula_depth", n(0.0))],
            ),
            vocal(
                "snore",
                UtteranceKind::Snore,
                &[
                    ("mouth_open_base", n(0.5)),
                    ("mouth_open_depth", n(0.0)),
                    ("uvula_rate", n(25.0)),
                    ("uvula_depth", n(0.6)),
                ],
            ),
            vocal(
                "laugh",
                UtteranceKind::Laugh,
                &[("f0_excursion", n(0.4)), ("aspiration", n(0.15))],
            ),
            vocal(
                "sneeze",
                UtteranceKind::Sneeze,
                &[("f0_excursion", n(0.5)), ("aspiration", n(0.5))],
            ),
            vocal(
                "cough",
                UtteranceKind::Cough,
                &[("aspiration", n(0.6)), ("mouth_open_depth", n(0.0))],
            ),
        ]);
        Self { presets }
    }

    pub fn get(&self, name: &str) -> Result<&Preset> {
        self.presets
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownPreset {
                name: name.to_string(),
                available: self.names(),
            })
    }

    pub fn names(&self) -> Vec<String> {
        self.presets.iter().map(|p| p.name.clone()).collect()
    }

    pub fn resolve(&self, name: &str, base: &VoiceParams) -> Result<VoiceParams> {
        self.get(name)?.apply(base)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serialises")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

fn builtin_registry() -> &'static PresetRegistry {
    static REGISTRY: OnceLock<PresetRegistry> = OnceLock::new();
    REGISTRY.get_or_init(PresetRegistry::builtin)
}

/// Resolves a shipped preset onto `base`.
pub fn resolve_preset(name: &str, base: &VoiceParams) -> Result<VoiceParams> {
    builtin_registry().resolve(name, base)
}
