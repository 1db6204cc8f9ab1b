//! Measurement tools: STFT spectrograms, F0 estimation and spectral peaks.

mod export;
mod peaks;
mod pitch;
mod spectrogram;

pub use export::{spectrogram_csv, spectrogram_png, write_spectrogram_csv, write_spectrogram_png};
pub use peaks::{spectral_peaks, PeakSet};
pub use pitch::{estimate_f0, f0_track, F0Estimate, CLARITY_THRESHOLD};
pub use spectrogram::{spectrogram, spectrogram_with, Spectrogram, Window, FLOOR_DB};

/// Default analysis window, samples.
pub const DEFAULT_WINDOW: usize = 2048;
/// Default hop, samples.
pub const DEFAULT_HOP: usize = 256;
