use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::Spectrogram;
use crate::{Error, Result};

/// Level rendered black, dB.
const IMAGE_TOP_DB: f64 = 0.0;
/// Span from black to white, dB.
const IMAGE_RANGE_DB: f64 = 100.0;

/// CSV grid: one row per frame, first column the frame time, then one
/// column per frequency bin.
pub fn spectrogram_csv(spec: &Spectrogram) -> String {
    let mut out = String::from("time_s");
    for f in &spec.frequency_bins {
        let _ = write!(out, ",{f:.3}");
    }
    out.push('\n');
    for (t, frame) in spec.frame_times.iter().zip(&spec.magnitudes) {
        let _ = write!(out, "{t:.6}");
        for m in frame {
            let _ = write!(out, ",{m:.2}");
        }
        out.push('\n');
    }
    out
}

/// 8-bit greyscale PNG, time left to right, low frequencies at the bottom.
/// Dark is loud: 0 dB is black and -100 dB or less is white.
pub fn spectrogram_png(spec: &Spectrogram) -> Result<Vec<u8>> {
    let width = spec.frame_count() as u32;
    let height = spec.bin_count() as u32;
    let mut pixels = vec![0u8; (width * height) as usize];
    for (x, frame) in spec.magnitudes.iter().enumerate() {
        for (k, &db) in frame.iter().enumerate() {
            let y = height as usize - 1 - k;
            let level = ((IMAGE_TOP_DB - db) / IMAGE_RANGE_DB).clamp(0.0, 1.0);
            pixels[y * width as usize + x] = (level * 255.0).round() as u8;
        }
    }
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width, height);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(&pixels)?;
    }
    Ok(out)
}

pub fn write_spectrogram_csv(spec: &Spectrogram, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, spectrogram_csv(spec)).map_err(|e| Error::io(path, e))
}

pub fn write_spectrogram_png(spec: &Spectrogram, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, spectrogram_png(spec)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::spectrogram;
    use crate::engine::AudioBuffer;

    #[test]
    fn csv_shape() {
        let s = spectrogram(&AudioBuffer::silence(8000, 1024), 256, 256).unwrap();
        let csv = spectrogram_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 4);
        assert!(lines.iter().all(|l| l.split(',').count() == 1 + 129));
        assert!(lines[1].ends_with(",-120.00"));
    }

    #[test]
    fn silence_is_a_white_image() {
        let s = spectrogram(&AudioBuffer::silence(8000, 1024), 256, 256).unwrap();
        let bytes = spectrogram_png(&s).unwrap();
        let decoder = png::Decoder::new(bytes.as_slice());
        let mut reader = decoder.read_info().unwrap();
        let mut img = vec![0; reader.output_buffer_size()];
        let info = reader.next_frame(&mut img).unwrap();
        assert_eq!((info.width, info.height), (4, 129));
        assert!(img[..info.buffer_size()].iter().all(|&p| p == 255));
    }
}
