use crate::error::{config, Result};

/// Frequency comb: nominal grid `spacing`, shared center offset `f0` and
/// per-index spacing error `delta_f`.
#[derive(Clone, Debug, PartialEq)]
pub struct CombModel {
    pub f0: f64,
    pub delta_f: f64,
    pub linewidth: f64,
    pub spacing: f64,
    pub num_lines: usize,
}

impl CombModel {
    pub fn ideal(spacing: f64, num_lines: usize) -> Self {
        Self { f0: 0.0, delta_f: 0.0, linewidth: 0.0, spacing, num_lines }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) {
            return config(format!("comb spacing must be positive, got {}", self.spacing));
        }
        if !(self.linewidth >= 0.0) {
            return config(format!("comb linewidth must be >= 0, got {}", self.linewidth));
        }
        if self.num_lines % 2 == 0 {
            return config(format!("comb line count must be odd, got {}", self.num_lines));
        }
        if !self.f0.is_finite() || !self.delta_f.is_finite() {
            return config("comb offsets must be finite");
        }
        Ok(())
    }

    pub fn half_width(&self) -> i32 {
        (self.num_lines / 2) as i32
    }

    /// Offset of line `i` from its nominal grid position `i * spacing`.
    pub fn line_offset(&self, i: i32) -> f64 {
        self.f0 + i as f64 * self.delta_f
    }

    /// Absolute frequency of line `i` relative to the nominal superchannel center.
    pub fn line_frequency(&self, i: i32) -> f64 {
        i as f64 * self.spacing + self.line_offset(i)
    }
}
