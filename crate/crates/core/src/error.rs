use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside the supported domain {expected}")]
    Domain {
        quantity: String,
        value: f64,
        expected: String,
    },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("unknown preset `{name}`; available presets: {}", .available.join(", "))]
    UnknownPreset { name: String, available: Vec<String> },
    #[error("requested duration {requested:.3} s exceeds the {cap:.1} s render cap")]
    DurationCap { requested: f64, cap: f64 },
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("wav: {0}")]
    Wav(#[from] crate::wav::WavError),
    #[error("preset file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("png: {0}")]
    Png(#[from] png::EncodingError),
}

impl Error {
    pub(crate) fn domain(quantity: &str, value: f64, expected: impl Into<String>) -> Self {
        Error::Domain {
            quantity: quantity.to_string(),
            value,
            expected: expected.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for I/O failures (as opposed to bad input).
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Png(png::EncodingError::IoError(_)))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
