//! Root-raised-cosine pulse shaping.

use crate::error::{config, Result};
use crate::scalar::{real, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct PulseShapeSpec<T: Real> {
    pub beta: f64,
    pub span_symbols: usize,
    pub sps: usize,
    /// Unit-energy taps, `span_symbols * sps + 1` long, centered.
    pub taps: Vec<T>,
}

impl<T: Real> PulseShapeSpec<T> {
    pub fn center(&self) -> usize {
        self.taps.len() / 2
    }
}

/// Continuous RRC impulse response for symbol period 1, not normalized.
///
/// The removable singularities at `t = 0` and `|t| = 1/(4 beta)` use their
/// closed-form limits.
pub fn rrc_impulse(t: f64, beta: f64) -> f64 {
    use std::f64::consts::PI;
    if t == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 {
        let x = 4.0 * beta * t;
        if (1.0 - x * x).abs() < 1e-10 {
            let a = PI / (4.0 * beta);
            return beta / std::f64::consts::SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
        }
        let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
        num / (PI * t * (1.0 - x * x))
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Raised-cosine spectrum for symbol rate 1 (the squared RRC magnitude), unit
/// height in the passband.
pub fn raised_cosine_spectrum(f: f64, beta: f64) -> f64 {
    let f = f.abs();
    let f1 = 0.5 * (1.0 - beta);
    let f2 = 0.5 * (1.0 + beta);
    if f <= f1 {
        1.0
    } else if f > f2 {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI / beta * (f - f1)).cos())
    }
}

/// Unit-energy RRC taps sampled at `sps` samples per symbol.
pub fn rrc_taps<T: Real>(beta: f64, sps: usize, span_symbols: usize) -> Result<PulseShapeSpec<T>> {
    if !(0.0..=1.0).contains(&beta) {
        return config(format!("roll-off {beta} outside [0, 1]"));
    }
    if sps < 2 {
        return config(format!("samples per symbol must be >= 2, got {sps}"));
    }
    if span_symbols < 8 || span_symbols % 2 != 0 {
        return config(format!("span must be an even number of symbols >= 8, got {span_symbols}"));
    }
    let n = span_symbols * sps + 1;
    let center = (n / 2) as i64;
    let raw: Vec<f64> = (0..n as i64)
        .map(|k| rrc_impulse((k - center) as f64 / sps as f64, beta))
        .collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    // mirror the positive half so the taps are symmetric to the last bit
    let mut taps = vec![T::zero(); n];
    for k in 0..=center as usize {
        let v = real::<T>(raw[center as usize + k] / norm);
        taps[center as usize + k] = v;
        taps[center as usize - k] = v;
    }
    Ok(PulseShapeSpec { beta, span_symbols, sps, taps })
}
