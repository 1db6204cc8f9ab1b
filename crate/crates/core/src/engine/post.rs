use std::f64::consts::PI;

use super::resonator::SILENCE_EPSILON;
use super::AudioBuffer;

const DC_CUTOFF_HZ: f64 = 20.0;
/// Below this magnitude the limiter is transparent.
const CLIP_KNEE: f64 = 0.8;
/// -3 dBFS
pub const NORMALIZE_PEAK: f64 = 0.707_945_784_384_137_9;

/// Monotone limiter: identity up to the knee, then a tanh curve that
/// approaches but never reaches full scale.
pub fn soft_clip(x: f64) -> f64 {
    let a = x.abs();
    if a <= CLIP_KNEE {
        return x;
    }
    let span = 1.0 - CLIP_KNEE;
    let y = CLIP_KNEE + span * libm::tanh((a - CLIP_KNEE) / span);
    y.copysign(x)
}

/// First-order DC-removal high-pass.
#[derive(Debug, Clone)]
pub struct DcBlocker {
    pole: f64,
    x1: f64,
    y1: f64,
}

impl DcBlocker {
    pub fn new(sample_rate: f64) -> Self {
        Self {
            pole: libm::exp(-2.0 * PI * DC_CUTOFF_HZ / sample_rate),
            x1: 0.0,
            y1: 0.0,
        }
    }

    /// Starts the filter as if `x0` had been present forever, so a
    /// constant offset produces no start-up transient.
    pub fn settle(&mut self, x0: f64) {
        self.x1 = x0;
        self.y1 = 0.0;
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let mut y = x - self.x1 + self.pole * self.y1;
        if x == 0.0 && self.x1 == 0.0 && y.abs() < SILENCE_EPSILON {
            y = 0.0;
        }
        self.x1 = x;
        self.y1 = y;
        y
    }
}

/// Streaming post-processing: DC removal then the limiter.
#[derive(Debug, Clone)]
pub struct PostChain {
    dc: DcBlocker,
}

impl PostChain {
    pub fn new(sample_rate: f64) -> Self {
        Self { dc: DcBlocker::new(sample_rate) }
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        soft_clip(self.dc.process(x))
    }
}

/// Scales the buffer so its peak sits at -3 dBFS. Silence is left alone.
pub fn normalize_peak(buffer: &mut AudioBuffer) {
    let peak = buffer.peak() as f64;
    if peak > 0.0 {
        let g = NORMALIZE_PEAK / peak;
        for s in &mut buffer.samples {
            *s = (*s as f64 * g) as f32;
        }
    }
}

/// DC removal, soft limiting and optional -3 dBFS peak normalisation.
pub fn post_process(buffer: &AudioBuffer, normalize: bool) -> AudioBuffer {
    let mut dc = DcBlocker::new(buffer.sample_rate as f64);
    if let Some(&first) = buffer.samples.first() {
        dc.settle(first as f64);
    }
    let samples = buffer
        .samples
        .iter()
        .map(|&s| soft_clip(dc.process(s as f64)) as f32)
        .collect();
    let mut out = AudioBuffer::new(buffer.sample_rate, samples);
    if normalize {
        normalize_peak(&mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silence_stays_silent() {
        let b = AudioBuffer::silence(44_100, 1000);
        assert_eq!(post_process(&b, true), b);
    }

    #[test]
    fn dc_offset_is_removed() {
        let b = AudioBuffer::new(44_100, vec![0.5; 44_100]);
        let out = post_process(&b, false);
        let mean = out.samples.iter().map(|&s| s as f64).sum::<f64>() / out.len() as f64;
        assert!(mean.abs() < 0.001);

        let tone: Vec<f32> = (0..44_100)
            .map(|i| (0.5 + 0.3 * (2.0 * PI * 440.0 * i as f64 / 44_100.0).sin()) as f32)
            .collect();
        let out = post_process(&AudioBuffer::new(44_100, tone), false);
        let mean = out.samples.iter().map(|&s| s as f64).sum::<f64>() / out.len() as f64;
        assert!(mean.abs() < 0.001, "{mean}");
    }

    #[test]
    fn limiter_contract() {
        assert!(soft_clip(1.5) <= 1.0);
        assert!(soft_clip(-1.5) >= -1.0);
        assert_eq!(soft_clip(0.3), 0.3);
        let mut prev = soft_clip(-10.0);
        for i in -1000..=1000 {
            let y = soft_clip(i as f64 / 100.0);
            assert!(y >= prev);
            assert!(y.abs() <= 1.0);
            prev = y;
        }
        // continuous at the knee
        assert!((soft_clip(CLIP_KNEE + 1e-9) - CLIP_KNEE).abs() < 1e-8);
    }

    #[test]
    fn normalises_to_minus_three_db() {
        let b = AudioBuffer::new(44_100, vec![0.0, 0.1, -0.2, 0.05]);
        let out = post_process(&b, true);
        assert!((out.peak() as f64 - NORMALIZE_PEAK).abs() < 1e-6);
    }
}
