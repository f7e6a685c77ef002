use crate::error::{config, Result};

/// Position of every symbol in a transmitted frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Sync,
    Cpe,
    Payload,
}

/// Pilot and payload layout: a synchronization sequence at the start of the
/// frame followed by a CPE pilot every `cpe_pilot_period` symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameMap {
    pub frame_len: usize,
    pub sync_pilot_len: usize,
    pub cpe_pilot_period: usize,
    pub sync_pilot_indices: Vec<usize>,
    pub cpe_pilot_indices: Vec<usize>,
    pub payload_indices: Vec<usize>,
}

impl FrameMap {
    pub fn new(frame_len: usize, sync_pilot_len: usize, cpe_pilot_period: usize) -> Result<Self> {
        if sync_pilot_len == 0 {
            return config("sync pilot length must be positive");
        }
        if frame_len <= sync_pilot_len {
            return config(format!(
                "frame length {frame_len} cannot accommodate {sync_pilot_len} sync pilots plus payload"
            ));
        }
        if cpe_pilot_period < 2 {
            return config(format!("CPE pilot period must be >= 2, got {cpe_pilot_period}"));
        }
        let sync_pilot_indices: Vec<usize> = (0..sync_pilot_len).collect();
        let mut cpe_pilot_indices = Vec::new();
        let mut payload_indices = Vec::new();
        for k in sync_pilot_len..frame_len {
            if (k - sync_pilot_len) % cpe_pilot_period == 0 {
                cpe_pilot_indices.push(k);
            } else {
                payload_indices.push(k);
            }
        }
        Ok(Self { frame_len, sync_pilot_len, cpe_pilot_period, sync_pilot_indices, cpe_pilot_indices, payload_indices })
    }

    /// Fraction of the frame spent on pilots.
    pub fn overhead(&self) -> f64 {
        (self.sync_pilot_len + self.cpe_pilot_indices.len()) as f64 / self.frame_len as f64
    }

    pub fn slot(&self, k: usize) -> SlotKind {
        if k < self.sync_pilot_len {
            SlotKind::Sync
        } else if (k - self.sync_pilot_len) % self.cpe_pilot_period == 0 {
            SlotKind::Cpe
        } else {
            SlotKind::Payload
        }
    }
}
