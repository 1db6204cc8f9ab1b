//! Mammal-like vocalisations from body mass and affect.
//!
//! [`allometry`] turns a body mass into lung capacity, breathing rate,
//! pitch and vocal-tract length. [`voice`] holds the designer-facing
//! parameters, presets and the affect mapping. [`engine`] renders audio
//! through a lungs, larynx and vocal-tract chain, offline or block by
//! block. [`analysis`] measures the results and [`wav`] stores them.

pub mod allometry;
pub mod analysis;
pub mod engine;
mod error;
pub mod voice;
pub mod wav;

pub use engine::{
    breathing_session, render_utterance, AudioBuffer, RenderRequest, StreamEngine, Telemetry, BLOCK_SIZE,
};
pub use error::{Error, Result};
pub use voice::{AffectState, UtteranceKind, VoiceParams};
