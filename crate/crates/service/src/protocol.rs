//! Wire format.
//!
//! Control traffic is JSON text frames tagged by `type`. Audio travels in
//! binary frames: an 8-byte little-endian sequence number followed by
//! [`BLOCK_SIZE`] little-endian 16-bit PCM samples.

use mammalvox::voice::{OverrideValue, Preset};
use mammalvox::{AffectState, UtteranceKind, VoiceParams, BLOCK_SIZE};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

/// Bytes in one binary audio frame.
pub const FRAME_BYTES: usize = 8 + 2 * BLOCK_SIZE;

/// A client message plus an optional correlation id echoed in the reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    #[serde(flatten)]
    pub message: ClientMessage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    SetParam { name: String, value: OverrideValue },
    SetAffect { valence: f64, arousal: f64 },
    ApplyPreset { name: String },
    /// Without a kind, the template of the last vocalisation preset is used.
    Vocalise {
        #[serde(default)]
        kind: Option<UtteranceKind>,
    },
    GetState,
    ExportPreset { name: String },
}

impl ClientMessage {
    pub fn name(&self) -> &'static str {
        match self {
            ClientMessage::SetParam { .. } => "set_param",
            ClientMessage::SetAffect { .. } => "set_affect",
            ClientMessage::ApplyPreset { .. } => "apply_preset",
            ClientMessage::Vocalise { .. } => "vocalise",
            ClientMessage::GetState => "get_state",
            ClientMessage::ExportPreset { .. } => "export_preset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Not JSON, unknown type, or missing/mistyped fields.
    BadMessage,
    UnknownParameter,
    /// Value outside its legal range or violating a cross-field limit.
    OutOfRange,
    UnknownPreset,
    DurationCap,
    /// Binary frames are server-to-client only.
    UnexpectedBinary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: u64,
    pub params: VoiceParams,
    pub affect: AffectState,
    pub seed: u64,
    /// Samples streamed so far.
    pub position: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello {
        protocol_version: u32,
        sample_rate: u32,
        block_size: usize,
        state: SessionState,
    },
    Ack {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        request: String,
        /// Sequence number of the first audio frame reflecting the request.
        frame: u64,
        state: SessionState,
        /// Seconds, for `vocalise`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration: Option<f64>,
        /// For `export_preset`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        preset: Option<Preset>,
    },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        code: ErrorCode,
        message: String,
    },
    Telemetry {
        frame: u64,
        f0: f64,
        mouth_opening: f64,
        formants: [f64; 3],
        active: bool,
    },
    /// Frames `first..first + count` were dropped because the client fell
    /// behind.
    Gap { first: u64, count: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioFrame {
    pub sequence: u64,
    pub samples: [i16; BLOCK_SIZE],
}

impl AudioFrame {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRAME_BYTES);
        out.extend_from_slice(&self.sequence.to_le_bytes());
        for s in self.samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != FRAME_BYTES {
            return None;
        }
        let sequence = u64::from_le_bytes(bytes[..8].try_into().ok()?);
        let mut samples = [0i16; BLOCK_SIZE];
        for (s, c) in samples.iter_mut().zip(bytes[8..].chunks_exact(2)) {
            *s = i16::from_le_bytes([c[0], c[1]]);
        }
        Some(Self { sequence, samples })
    }
}
