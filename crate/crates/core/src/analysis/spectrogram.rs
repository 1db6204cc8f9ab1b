use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::engine::AudioBuffer;
use crate::{Error, Result};

/// Magnitudes below this are clamped, dB.
pub const FLOOR_DB: f64 = -120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Symmetric Hann.
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann if len == 1 => vec![1.0],
            Window::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * libm::cos(2.0 * PI * n as f64 / (len - 1) as f64))
                .collect(),
        }
    }
}

/// Magnitude STFT in dB.
///
/// Scaled so that a full-scale sine centred on a bin reads 0 dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub sample_rate: u32,
    pub window: Window,
    pub window_len: usize,
    pub hop: usize,
    /// Centre of each frame, seconds.
    pub frame_times: Vec<f64>,
    /// Bin centres from 0 to sample_rate / 2, Hz.
    pub frequency_bins: Vec<f64>,
    /// frames × bins, dB.
    pub magnitudes: Vec<Vec<f64>>,
    amplitude_scale: f64,
}

pub fn spectrogram(buffer: &AudioBuffer, window_len: usize, hop: usize) -> Result<Spectrogram> {
    spectrogram_with(buffer, window_len, hop, Window::Hann)
}

pub fn spectrogram_with(buffer: &AudioBuffer, window_len: usize, hop: usize, window: Window) -> Result<Spectrogram> {
    if window_len < 2 {
        return Err(Error::domain("window", window_len as f64, ">= 2 samples"));
    }
    if hop < 1 {
        return Err(Error::domain("hop", hop as f64, ">= 1 sample"));
    }
    if buffer.len() < window_len {
        return Err(Error::domain(
            "buffer length",
            buffer.len() as f64,
            format!(">= window ({window_len} samples)"),
        ));
    }
    let sr = buffer.sample_rate as f64;
    let w = window.coefficients(window_len);
    let amplitude_scale = 2.0 / w.iter().sum::<f64>();
    let frames = (buffer.len() - window_len) / hop + 1;
    let bins = window_len / 2 + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window_len);
    let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
    let mut frame = vec![Complex::default(); window_len];
    let mut magnitudes = Vec::with_capacity(frames);
    for f in 0..frames {
        let start = f * hop;
        for (slot, (x, c)) in frame.iter_mut().zip(buffer.samples[start..start + window_len].iter().zip(&w)) {
            *slot = Complex::new(*x as f64 * c, 0.0);
        }
        fft.process_with_scratch(&mut frame, &mut scratch);
        magnitudes.push(
            frame[..bins]
                .iter()
                .map(|z| to_db(z.norm() * amplitude_scale))
                .collect(),
        );
    }
    Ok(Spectrogram {
        sample_rate: buffer.sample_rate,
        window,
        window_len,
        hop,
        frame_times: (0..frames).map(|f| (f * hop) as f64 / sr + 0.5 * window_len as f64 / sr).collect(),
        frequency_bins: (0..bins).map(|k| k as f64 * sr / window_len as f64).collect(),
        magnitudes,
        amplitude_scale,
    })
}

fn to_db(amplitude: f64) -> f64 {
    if amplitude > 0.0 {
        (20.0 * libm::log10(amplitude)).max(FLOOR_DB)
    } else {
        FLOOR_DB
    }
}

impl Spectrogram {
    pub fn frame_count(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn bin_count(&self) -> usize {
        self.frequency_bins.len()
    }

    /// Bin spacing, Hz.
    pub fn resolution(&self) -> f64 {
        self.sample_rate as f64 / self.window_len as f64
    }

    /// Sum over frames of the windowed-frame energy, recovered from the dB
    /// grid. With a rectangular window and hop equal to the window this is
    /// the energy of the analysed samples.
    pub fn energy(&self) -> f64 {
        let n = self.window_len;
        let unscale = 1.0 / self.amplitude_scale;
        self.magnitudes
            .iter()
            .map(|frame| {
                frame
                    .iter()
                    .enumerate()
                    .map(|(k, &db)| {
                        let x = libm::pow(10.0, db / 20.0) * unscale;
                        let weight = if k == 0 || (n % 2 == 0 && k == n / 2) { 1.0 } else { 2.0 };
                        weight * x * x
                    })
                    .sum::<f64>()
                    / n as f64
            })
            .sum()
    }

    /// Per-bin power averaged over frames, dB.
    pub fn mean_power_db(&self) -> Vec<f64> {
        let frames = self.frame_count().max(1) as f64;
        let mut acc = vec![0.0; self.bin_count()];
        for frame in &self.magnitudes {
            for (a, &db) in acc.iter_mut().zip(frame) {
                *a += libm::pow(10.0, db / 10.0);
            }
        }
        acc.into_iter()
            .map(|p| (10.0 * libm::log10(p / frames)).max(FLOOR_DB))
            .collect()
    }

    /// Index of the bin nearest `freq`.
    pub fn bin_of(&self, freq: f64) -> usize {
        ((freq / self.resolution()).round().max(0.0) as usize).min(self.bin_count() - 1)
    }
}
