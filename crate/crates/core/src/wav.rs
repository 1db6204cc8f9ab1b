//! 16-bit mono PCM WAV files.
//!
//! Writing always produces the canonical 44-byte header (RIFF, `fmt `,
//! `data`). Reading accepts extra chunks before `data` and skips them.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::engine::AudioBuffer;
use crate::{Error as CrateError, Result};

const FULL_SCALE: f64 = 32767.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WavError {
    #[error("missing `{0}` chunk")]
    MissingChunk(&'static str),
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("unsupported format: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavSpec {
    pub sample_rate: u32,
    pub bit_depth: u16,
    pub channels: u16,
}

impl WavSpec {
    pub fn mono16(sample_rate: u32) -> Self {
        Self { sample_rate, bit_depth: 16, channels: 1 }
    }
}

/// Maps [-1, 1] onto i16, rounding half away from zero and clamping.
pub fn quantise(sample: f32) -> i16 {
    let v = (sample as f64 * FULL_SCALE).round();
    v.clamp(-32768.0, 32767.0) as i16
}

pub fn dequantise(value: i16) -> f32 {
    (value as f64 / FULL_SCALE) as f32
}

pub fn encode_wav(buffer: &AudioBuffer) -> Vec<u8> {
    let data_len = buffer.samples.len() as u32 * 2;
    let spec = WavSpec::mono16(buffer.sample_rate);
    let block_align = spec.channels * spec.bit_depth / 8;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&spec.channels.to_le_bytes());
    out.extend_from_slice(&spec.sample_rate.to_le_bytes());
    out.extend_from_slice(&(spec.sample_rate * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&spec.bit_depth.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &buffer.samples {
        out.extend_from_slice(&quantise(s).to_le_bytes());
    }
    out
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer, WavError> {
    if bytes.len() < 12 {
        return Err(WavError::MissingChunk("RIFF"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(WavError::Malformed("no RIFF signature".into()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(WavError::Malformed("RIFF form is not WAVE".into()));
    }
    let mut pos = 12;
    let mut spec: Option<WavSpec> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let len = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if len < 16 || body + 16 > bytes.len() {
                    return Err(WavError::Malformed("`fmt ` chunk too short".into()));
                }
                let format = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let sample_rate = u32_at(bytes, body + 4);
                let bit_depth = u16_at(bytes, body + 14);
                if format != 1 {
                    return Err(WavError::Unsupported(format!("format tag {format}, expected PCM (1)")));
                }
                if channels != 1 {
                    return Err(WavError::Unsupported(format!("{channels} channels, expected mono")));
                }
                if bit_depth != 16 {
                    return Err(WavError::Unsupported(format!("{bit_depth}-bit samples, expected 16-bit")));
                }
                if sample_rate == 0 {
                    return Err(WavError::Malformed("sample rate is zero".into()));
                }
                spec = Some(WavSpec { sample_rate, bit_depth, channels });
            }
            b"data" => {
                let spec = spec.ok_or(WavError::MissingChunk("fmt "))?;
                if body + len > bytes.len() {
                    return Err(WavError::Malformed(format!(
                        "`data` chunk declares {len} bytes but only {} remain",
                        bytes.len() - body
                    )));
                }
                if len % 2 != 0 {
                    return Err(WavError::Malformed("odd `data` length for 16-bit samples".into()));
                }
                let samples = bytes[body..body + len]
                    .chunks_exact(2)
                    .map(|c| dequantise(i16::from_le_bytes([c[0], c[1]])))
                    .collect();
                return Ok(AudioBuffer::new(spec.sample_rate, samples));
            }
            _ => {}
        }
        pos = body + len + (len & 1);
    }
    Err(WavError::MissingChunk(if spec.is_some() { "data" } else { "fmt " }))
}

pub fn write_wav(buffer: &AudioBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_wav(buffer)).map_err(|e| CrateError::io(path, e))
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| CrateError::io(path, e))?;
    Ok(decode_wav(&bytes)?)
}
