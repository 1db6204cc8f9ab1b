use serde::{Deserialize, Serialize};

use super::Spectrogram;
use crate::{Error, Result};

/// A peak must exceed every bin within this distance.
const NEIGHBOURHOOD_BINS: usize = 3;
/// Half-width of the window the local median is taken over: this many Hz,
/// or this fraction of the peak frequency if wider.
const MEDIAN_HALF_WIDTH_HZ: f64 = 600.0;
const MEDIAN_HALF_WIDTH_FRACTION: f64 = 0.5;
/// Required height above the local median, dB.
const MIN_PROMINENCE_DB: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    /// Hz, ascending.
    pub peaks: Vec<f64>,
    /// False when fewer peaks qualified than were asked for.
    pub complete: bool,
}

/// The `count` most prominent maxima of the time-averaged spectrum.
pub fn spectral_peaks(spec: &Spectrogram, count: usize) -> Result<PeakSet> {
    if count < 1 {
        return Err(Error::domain("peak count", count as f64, ">= 1"));
    }
    let p = spec.mean_power_db();
    let n = p.len();
    let mut window = Vec::new();
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for k in 1..n.saturating_sub(1) {
        let lo = k.saturating_sub(NEIGHBOURHOOD_BINS);
        let hi = (k + NEIGHBOURHOOD_BINS).min(n - 1);
        if (lo..=hi).any(|j| j != k && p[j] >= p[k]) {
            continue;
        }
        let half_hz = MEDIAN_HALF_WIDTH_HZ.max(MEDIAN_HALF_WIDTH_FRACTION * k as f64 * spec.resolution());
        let half = ((half_hz / spec.resolution()).round() as usize).max(NEIGHBOURHOOD_BINS + 1);
        window.clear();
        window.extend_from_slice(&p[k.saturating_sub(half)..=(k + half).min(n - 1)]);
        window.sort_by(f64::total_cmp);
        let median = window[window.len() / 2];
        let prominence = p[k] - median;
        if prominence >= MIN_PROMINENCE_DB {
            let (a, b, c) = (p[k - 1], p[k], p[k + 1]);
            let den = a - 2.0 * b + c;
            let shift = if den != 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
            candidates.push(((k as f64 + shift) * spec.resolution(), prominence));
        }
    }
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    candidates.truncate(count);
    let mut peaks: Vec<f64> = candidates.into_iter().map(|c| c.0).collect();
    peaks.sort_by(f64::total_cmp);
    Ok(PeakSet { complete: peaks.len() == count, peaks })
}
