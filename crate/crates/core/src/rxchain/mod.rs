//! Per-channel coherent receiver: optical demultiplexer, downconversion
//! against a receiver comb line, and the 2-SPS ADC.

use num_complex::Complex;

use crate::channel::{apply_phase, quantize, SPEED_OF_LIGHT};
use crate::error::{config, Result};
use crate::scalar::{real, Real};
use crate::sigkit::{frequency_shift, ops, resample, DualPolSignal};
use crate::txchain::CombModel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DemuxShape {
    IdealRect,
    /// Amplitude `exp(-(ln 2 / 2) (2 |f - f_c| / bw)^(2 order))`, 3 dB down at the band edges.
    SuperGaussian(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverConfig {
    pub demux_bw: f64,
    pub demux_shape: DemuxShape,
    pub adc_enob: f64,
    pub clip_sigma: f64,
    pub rx_comb: CombModel,
    pub out_sps: usize,
    /// Sampling instant misalignment, in output samples.
    pub timing_offset: f64,
}

/// Optical bandwidth in Hz of `delta_lambda_m` at `lambda_m`.
pub fn wavelength_to_bandwidth(delta_lambda_m: f64, lambda_m: f64) -> f64 {
    SPEED_OF_LIGHT * delta_lambda_m / (lambda_m * lambda_m)
}

impl ReceiverConfig {
    pub fn new(rx_comb: CombModel) -> Self {
        Self {
            demux_bw: wavelength_to_bandwidth(0.3e-9, 1550e-9),
            demux_shape: DemuxShape::IdealRect,
            adc_enob: 4.5,
            clip_sigma: 3.0,
            rx_comb,
            out_sps: 2,
            timing_offset: 0.0,
        }
    }

    pub fn validate(&self, symbol_rate: f64) -> Result<()> {
        if !(self.demux_bw > symbol_rate) {
            return config(format!("demux bandwidth {:.4e} must exceed the symbol rate {symbol_rate:.4e}", self.demux_bw));
        }
        if self.out_sps != 2 {
            return config(format!("receiver output must be 2 samples per symbol, got {}", self.out_sps));
        }
        if !(self.adc_enob > 1.0) {
            return config(format!("adc_enob must be > 1 (or inf), got {}", self.adc_enob));
        }
        if !self.timing_offset.is_finite() {
            return config("timing offset must be finite");
        }
        if let DemuxShape::SuperGaussian(0) = self.demux_shape {
            return config("super-Gaussian order must be >= 1");
        }
        self.rx_comb.validate()
    }
}

/// Band-pass filter of width `demux_bw` centered on the nominal grid
/// position of `channel_index`.
pub fn wss_demux<T: Real>(superchannel: &DualPolSignal<T>, channel_index: i32, cfg: &ReceiverConfig) -> Result<DualPolSignal<T>> {
    let n = cfg.rx_comb.half_width();
    if channel_index.abs() > n {
        return config(format!("channel index {channel_index} outside the receiver comb ({} lines)", cfg.rx_comb.num_lines));
    }
    let center = channel_index as f64 * cfg.rx_comb.spacing - superchannel.center_offset;
    let half = cfg.demux_bw / 2.0;
    let fs = superchannel.sample_rate;
    let shape = cfg.demux_shape;
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    Ok(superchannel.map_pols(|p| {
        ops::filter_spectrum(p, fs, |f| {
            let d = (f - center).abs();
            match shape {
                DemuxShape::IdealRect => {
                    if d <= half {
                        one
                    } else {
                        zero
                    }
                }
                DemuxShape::SuperGaussian(order) => {
                    let a = (-(std::f64::consts::LN_2 / 2.0) * (d / half).powi(2 * order as i32)).exp();
                    Complex::new(real(a), T::zero())
                }
            }
        })
    }))
}

/// Mixes `channel_index` down with its receiver comb line, optionally with
/// the LO phase trajectory `lo_phase` (radians per sample).
pub fn coherent_downconvert<T: Real>(
    band: &DualPolSignal<T>,
    channel_index: i32,
    cfg: &ReceiverConfig,
    lo_phase: Option<&[f64]>,
) -> DualPolSignal<T> {
    let lo = cfg.rx_comb.line_frequency(channel_index);
    let shifted = frequency_shift(band, -(lo - band.center_offset));
    let mut out = match lo_phase {
        Some(phase) => {
            let neg: Vec<f64> = phase.iter().map(|p| -p).collect();
            apply_phase(&shifted, &neg)
        }
        None => shifted,
    };
    out.center_offset = lo;
    out
}

/// Samples at `out_sps * symbol_rate` (with the configured timing offset) and
/// quantizes at `adc_enob`. Content beyond the new Nyquist band is discarded
/// by the ideal anti-alias filter of the whole-buffer resampler.
pub fn adc<T: Real>(signal: &DualPolSignal<T>, symbol_rate: f64, cfg: &ReceiverConfig) -> Result<DualPolSignal<T>> {
    let target = cfg.out_sps as f64 * symbol_rate;
    let delayed = if cfg.timing_offset != 0.0 {
        let delay_in = cfg.timing_offset * signal.sample_rate / target;
        ops::delay_signal(signal, delay_in)
    } else {
        signal.clone()
    };
    let sampled = resample(&delayed, target)?;
    Ok(quantize(&sampled, cfg.adc_enob, cfg.clip_sigma))
}
