use mammalvox::voice::{Preset, PresetRegistry};
use mammalvox::wav::quantise;
use mammalvox::{AffectState, Error, StreamEngine, UtteranceKind, VoiceParams, BLOCK_SIZE};

use crate::protocol::{AudioFrame, ClientMessage, Envelope, ErrorCode, ServerMessage, SessionState, PROTOCOL_VERSION};

/// One designer's voice: the engine, its preset library and the frame
/// counter. Transport-free, so everything here is deterministic.
#[derive(Debug, Clone)]
pub struct Session {
    id: u64,
    engine: StreamEngine,
    presets: PresetRegistry,
    default_kind: UtteranceKind,
    next_frame: u64,
    block: [f32; BLOCK_SIZE],
}

impl Session {
    pub fn new(id: u64, params: VoiceParams, seed: u64, presets: PresetRegistry) -> mammalvox::Result<Self> {
        Ok(Self {
            id,
            engine: StreamEngine::new(params, AffectState::NEUTRAL, seed)?,
            presets,
            default_kind: UtteranceKind::Voiced,
            next_frame: 0,
            block: [0.0; BLOCK_SIZE],
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn sample_rate(&self) -> u32 {
        self.engine.params().sample_rate
    }

    /// Sequence number of the next frame [`Session::next_frame`] returns.
    pub fn next_sequence(&self) -> u64 {
        self.next_frame
    }

    /// State as of the next frame.
    pub fn state(&self) -> SessionState {
        SessionState {
            session_id: self.id,
            params: *self.engine.params(),
            affect: self.engine.affect(),
            seed: self.engine.seed(),
            position: self.engine.position(),
        }
    }

    pub fn hello(&self) -> ServerMessage {
        ServerMessage::Hello {
            protocol_version: PROTOCOL_VERSION,
            sample_rate: self.sample_rate(),
            block_size: BLOCK_SIZE,
            state: self.state(),
        }
    }

    /// Parses and handles one text frame. Always exactly one reply.
    pub fn handle_text(&mut self, text: &str) -> ServerMessage {
        match serde_json::from_str::<Envelope>(text) {
            Ok(env) => self.handle_message(env.id, &env.message),
            Err(e) => error(lenient_id(text), ErrorCode::BadMessage, e.to_string()),
        }
    }

    /// Applies one message. Changes take effect at the start of the next
    /// frame; a rejected message leaves the session untouched.
    pub fn handle_message(&mut self, id: Option<u64>, message: &ClientMessage) -> ServerMessage {
        let mut duration = None;
        let mut preset = None;
        let outcome = match message {
            ClientMessage::SetParam { name, value } => {
                let mut next = *self.engine.params();
                next.set(name, value.as_f64()).and_then(|_| self.engine.set_params(next))
            }
            ClientMessage::SetAffect { valence, arousal } => {
                let legal = |x: f64| (-1.0..=1.0).contains(&x);
                if legal(*valence) && legal(*arousal) {
                    self.engine.set_affect(AffectState::new(*valence, *arousal))
                } else {
                    return error(id, ErrorCode::OutOfRange, format!("valence {valence}, arousal {arousal}: both must lie in [-1, 1]"));
                }
            }
            ClientMessage::ApplyPreset { name } => self.presets.get(name).cloned().and_then(|p| {
                let next = p.layer(self.engine.params())?;
                self.engine.set_params(next)?;
                if let Some(kind) = p.template {
                    self.default_kind = kind;
                }
                Ok(())
            }),
            ClientMessage::Vocalise { kind } => self.engine.vocalise(kind.unwrap_or(self.default_kind)).map(|d| {
                duration = Some(d);
            }),
            ClientMessage::GetState => Ok(()),
            ClientMessage::ExportPreset { name } => {
                preset = Some(Preset::capture(name, self.engine.params()));
                Ok(())
            }
        };
        match outcome {
            Ok(()) => ServerMessage::Ack {
                id,
                request: message.name().to_string(),
                frame: self.next_frame,
                state: self.state(),
                duration,
                preset,
            },
            Err(e) => error(id, code_for(&e), e.to_string()),
        }
    }

    pub fn next_frame(&mut self) -> AudioFrame {
        self.engine.next_block(&mut self.block);
        let mut samples = [0i16; BLOCK_SIZE];
        for (q, &s) in samples.iter_mut().zip(&self.block) {
            *q = quantise(s);
        }
        let sequence = self.next_frame;
        self.next_frame += 1;
        AudioFrame { sequence, samples }
    }

    /// Voice state as of the last rendered sample; pending updates show up
    /// once the next frame has absorbed them.
    pub fn telemetry(&self) -> ServerMessage {
        let t = self.engine.telemetry();
        ServerMessage::Telemetry {
            frame: self.next_frame,
            f0: t.f0,
            mouth_opening: t.mouth_opening,
            formants: t.formants,
            active: t.active,
        }
    }
}

pub(crate) fn error(id: Option<u64>, code: ErrorCode, message: impl Into<String>) -> ServerMessage {
    ServerMessage::Error { id, code, message: message.into() }
}

fn code_for(e: &Error) -> ErrorCode {
    match e {
        Error::UnknownParameter(_) => ErrorCode::UnknownParameter,
        Error::UnknownPreset { .. } => ErrorCode::UnknownPreset,
        Error::DurationCap { .. } => ErrorCode::DurationCap,
        _ => ErrorCode::OutOfRange,
    }
}

/// Best-effort id from a message that failed to parse.
fn lenient_id(text: &str) -> Option<u64> {
    serde_json::from_str::<serde_json::Value>(text).ok()?.get("id")?.as_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn session() -> Session {
        Session::new(1, VoiceParams::default(), 3, PresetRegistry::builtin()).unwrap()
    }

    fn send(s: &mut Session, v: serde_json::Value) -> ServerMessage {
        s.handle_text(&v.to_string())
    }

    #[test]
    fn set_param_is_acked_with_effective_frame() {
        let mut s = session();
        s.next_frame();
        s.next_frame();
        match send(&mut s, json!({"type": "set_param", "name": "f0_base", "value": 500, "id": 9})) {
            ServerMessage::Ack { id, request, frame, state, .. } => {
                assert_eq!((id, request.as_str(), frame), (Some(9), "set_param", 2));
                assert_eq!(state.params.f0_base, 500.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(s.telemetry(), ServerMessage::Telemetry { f0, .. } if f0 != 500.0));
        s.next_frame();
        assert!(matches!(s.telemetry(), ServerMessage::Telemetry { f0, .. } if f0 == 500.0));
    }

    #[test]
    fn out_of_range_names_the_range() {
        let mut s = session();
        let before = s.state();
        match send(&mut s, json!({"type": "set_param", "name": "mouth_open_base", "value": 2.0})) {
            ServerMessage::Error { code, message, .. } => {
                assert_eq!(code, ErrorCode::OutOfRange);
                assert!(message.contains("[0, 1]"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(s.state(), before);
    }

    #[test]
    fn error_codes() {
        let mut s = session();
        let before = s.state();
        let cases = [
            ("not json", ErrorCode::BadMessage),
            (r#"{"type": "set_param", "name": "loudness", "value": 1}"#, ErrorCode::UnknownParameter),
            (r#"{"type": "apply_preset", "name": "unicorn"}"#, ErrorCode::UnknownPreset),
            (r#"{"type": "set_param", "name": "f0_base", "value": 1e9}"#, ErrorCode::OutOfRange),
            (r#"{"type": "set_param", "name": "quantisation_steps", "value": 2.5}"#, ErrorCode::OutOfRange),
            (r#"{"type": "set_param", "name": "mass", "value": -1}"#, ErrorCode::OutOfRange),
            (r#"{"type": "vocalise", "kind": "howl", "id": 7}"#, ErrorCode::BadMessage),
            (r#"{"type": "set_affect", "valence": 1.5, "arousal": 0}"#, ErrorCode::OutOfRange),
        ];
        for (text, want) in cases {
            match s.handle_text(text) {
                ServerMessage::Error { code, .. } => assert_eq!(code, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(s.handle_text(r#"{"type": "warp", "id": 7}"#), ServerMessage::Error { id: Some(7), .. }));
        assert_eq!(s.state(), before);
    }

    #[test]
    fn miro_preset_disables_dual_folds() {
        let mut s = session();
        send(&mut s, json!({"type": "set_param", "name": "dual_folds_enabled", "value": true}));
        assert!(s.state().params.dual_folds_enabled);
        assert!(matches!(send(&mut s, json!({"type": "apply_preset", "name": "miro"})), ServerMessage::Ack { .. }));
        match send(&mut s, json!({"type": "get_state"})) {
            ServerMessage::Ack { state, .. } => assert!(!state.params.dual_folds_enabled),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vocalisation_preset_sets_default_kind() {
        let mut s = session();
        send(&mut s, json!({"type": "apply_preset", "name": "sneeze"}));
        let sneeze = match send(&mut s, json!({"type": "vocalise"})) {
            ServerMessage::Ack { duration, .. } => duration.unwrap(),
            other => panic!("{other:?}"),
        };
        let voiced = match send(&mut s, json!({"type": "vocalise", "kind": "voiced"})) {
            ServerMessage::Ack { duration, .. } => duration.unwrap(),
            other => panic!("{other:?}"),
        };
        assert!((sneeze / voiced - 0.6).abs() < 1e-9);
    }

    #[test]
    fn export_preset_reproduces_state() {
        let mut s = session();
        send(&mut s, json!({"type": "apply_preset", "name": "cow"}));
        send(&mut s, json!({"type": "set_param", "name": "aspiration", "value": 0.3}));
        let preset = match send(&mut s, json!({"type": "export_preset", "name": "my cow"})) {
            ServerMessage::Ack { preset, .. } => preset.unwrap(),
            other => panic!("{other:?}"),
        };
        assert_eq!(preset.name, "my cow");
        assert_eq!(preset.layer(&VoiceParams::default()).unwrap(), s.state().params);
    }

    #[test]
    fn silent_session_streams_zeros() {
        let mut s = session();
        for i in 0..20 {
            let f = s.next_frame();
            assert_eq!(f.sequence, i);
            assert!(f.samples.iter().all(|&x| x == 0));
        }
        assert_eq!(s.state().position, 20 * BLOCK_SIZE as u64);
    }

    #[test]
    fn identical_logs_give_identical_audio() {
        let run = || {
            let mut s = session();
            let mut out = Vec::new();
            let script = [
                (0, json!({"type": "apply_preset", "name": "miro"})),
                (3, json!({"type": "vocalise", "kind": "laugh"})),
                (40, json!({"type": "set_affect", "valence": 1, "arousal": 0.5})),
                (90, json!({"type": "set_param", "name": "f0_base", "value": 600})),
            ];
            for frame in 0..200 {
                for (_, m) in script.iter().filter(|(f, _)| *f == frame) {
                    s.handle_text(&m.to_string());
                }
                out.push(s.next_frame());
            }
            out
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert!(a.iter().any(|f| f.samples.iter().any(|&x| x != 0)));
    }
}
