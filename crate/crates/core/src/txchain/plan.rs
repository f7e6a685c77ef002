use crate::error::{config, Result};
use crate::sigkit::ConstellationSpec;
use crate::scalar::Real;

/// How the y polarization is generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolMux {
    /// Independent data on y.
    Independent,
    /// y carries the x payload delayed by `polmux_delay` payload symbols
    /// (split-delay-combine emulation); its pilots stay independent.
    DelayedCopy,
}

/// Channel plan of the transmitted superchannel.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPlan<T: Real> {
    pub symbol_rate: f64,
    pub spacing: f64,
    pub beta: f64,
    pub constellation: ConstellationSpec<T>,
    pub num_channels: usize,
    pub decorrelation_pattern: Vec<u32>,
    pub polmux: PolMux,
    pub polmux_delay: usize,
    /// Per-channel power gain in dB, one per channel (low index first).
    pub gains_db: Vec<f64>,
    pub span_symbols: usize,
    /// DAC rate in samples per symbol.
    pub dac_sps: usize,
}

/// Default decorrelation cycle `1-2-3-4-1-2-...`.
pub fn default_decorrelation(num_channels: usize) -> Vec<u32> {
    (0..num_channels).map(|j| (j % 4) as u32 + 1).collect()
}

/// Deterministic per-line power ripple spanning `ripple_db` peak to peak.
pub fn flatness_ripple(num_channels: usize, ripple_db: f64) -> Vec<f64> {
    (0..num_channels)
        .map(|j| {
            let phase = 2.0 * std::f64::consts::PI * 1.5 * j as f64 / num_channels.max(1) as f64;
            -0.5 * ripple_db * (1.0 - phase.cos())
        })
        .collect()
}

impl<T: Real> ChannelPlan<T> {
    pub fn new(symbol_rate: f64, spacing: f64, beta: f64, constellation: ConstellationSpec<T>, num_channels: usize) -> Self {
        Self {
            symbol_rate,
            spacing,
            beta,
            constellation,
            num_channels,
            decorrelation_pattern: default_decorrelation(num_channels),
            polmux: PolMux::Independent,
            polmux_delay: 250,
            gains_db: vec![0.0; num_channels],
            span_symbols: 16,
            dac_sps: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.symbol_rate > 0.0) || !(self.spacing > 0.0) {
            return config("symbol rate and spacing must be positive");
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return config(format!("roll-off {} outside [0, 1]", self.beta));
        }
        if self.num_channels % 2 == 0 || self.num_channels == 0 {
            return config(format!("number of channels must be odd, got {}", self.num_channels));
        }
        if self.decorrelation_pattern.len() != self.num_channels {
            return config(format!(
                "decorrelation pattern has {} entries for {} channels",
                self.decorrelation_pattern.len(),
                self.num_channels
            ));
        }
        if self.gains_db.len() != self.num_channels {
            return config(format!("gain vector has {} entries for {} channels", self.gains_db.len(), self.num_channels));
        }
        if self.dac_sps < 2 {
            return config("DAC samples per symbol must be >= 2");
        }
        Ok(())
    }

    /// `spacing - symbol_rate`; negative for super-Nyquist plans.
    pub fn guard_band(&self) -> f64 {
        self.spacing - self.symbol_rate
    }

    pub fn half_width(&self) -> i32 {
        (self.num_channels / 2) as i32
    }

    /// Channel indices from lowest to highest frequency.
    pub fn indices(&self) -> impl Iterator<Item = i32> {
        let n = self.half_width();
        -n..=n
    }

    pub fn slot(&self, index: i32) -> usize {
        (index + self.half_width()) as usize
    }

    /// Smallest sample rate that holds every channel with a 25% margin.
    pub fn min_sim_rate(&self) -> f64 {
        2.0 * (self.num_channels as f64 * self.spacing / 2.0 + self.symbol_rate * (1.0 + self.beta) / 2.0) * 1.25
    }
}
