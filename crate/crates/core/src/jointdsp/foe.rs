//! Joint frequency offset estimation over a group of comb-locked channels.

use super::pilots::{block_phase_slope, pair_products, tone_search};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sigkit::DualPolSignal;

#[derive(Clone, Debug, PartialEq)]
pub struct FoeEstimate {
    /// Shared offset: intercept of the line fit at channel index 0.
    pub f0: f64,
    /// Per-index spacing error: slope of the line fit.
    pub delta_f: f64,
    /// Raw per-channel estimates `(index, Hz)`.
    pub raw: Vec<(i32, f64)>,
}

impl FoeEstimate {
    pub fn offset_at(&self, index: i32) -> f64 {
        self.f0 + index as f64 * self.delta_f
    }
}

/// Frequency offset of one synchronized channel from its sync pilots.
pub fn channel_offset<T: Real>(channel: &DualPolSignal<T>, pilot: &DualPolSignal<T>, sync_len: usize) -> f64 {
    let span = (2 * sync_len).min(channel.len());
    let margin = 32.min(span / 8);
    let range = margin..span - margin;
    let products = pair_products(channel, pilot, range.clone());
    let coarse = tone_search(&products, channel.sample_rate, 4);
    block_phase_slope(channel, pilot, range, 64, coarse)
}

/// Exact least-squares line through `(index, offset)` pairs.
pub fn fit_line(points: &[(i32, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mi = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let mf = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mi).powi(2)).sum();
    if sxx == 0.0 {
        return (mf, 0.0);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mi) * (p.1 - mf)).sum();
    let slope = sxy / sxx;
    (mf - slope * mi, slope)
}

/// Estimates every channel's offset from its pilots and fits
/// `offset(i) = f0 + i * delta_f`.
///
/// `channels` holds `(comb index, synchronized 2-SPS stream, pilot waveform)`.
pub fn joint_foe<T: Real>(
    channels: &[(i32, &DualPolSignal<T>, &DualPolSignal<T>)],
    sync_len: usize,
    symbol_rate: f64,
) -> Result<FoeEstimate> {
    if channels.is_empty() {
        return Err(Error::Input("joint FOE needs at least one channel".into()));
    }
    let limit = symbol_rate / 4.0;
    let mut raw = Vec::with_capacity(channels.len());
    for &(index, stream, pilot) in channels {
        let f = channel_offset(stream, pilot, sync_len);
        if f.abs() > limit {
            return Err(Error::FoeRange { channel: index, offset_hz: f, limit_hz: limit });
        }
        raw.push((index, f));
    }
    let (f0, delta_f) = fit_line(&raw);
    Ok(FoeEstimate { f0, delta_f, raw })
}

/// Smallest spacing error worth a corrective shift: one tenth of a cycle
/// over the frame.
pub fn delta_f_threshold(frame_duration: f64) -> f64 {
    1.0 / (10.0 * frame_duration)
}
