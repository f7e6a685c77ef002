use thiserror::Error;

/// Errors raised anywhere in the simulation and DSP chain.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or combination of parameters is outside the supported range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Several configuration problems collected before a run starts.
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    /// The synchronization pilot could not be located.
    #[error("synchronization failed: peak-to-sidelobe ratio {psr:.2} below {threshold:.2}")]
    SyncFailure { psr: f64, threshold: f64 },

    /// A per-channel frequency offset is outside the pilot-based capture range.
    #[error("frequency offset {offset_hz:.3e} Hz of channel {channel} exceeds capture range {limit_hz:.3e} Hz")]
    FoeRange { channel: i32, offset_hz: f64, limit_hz: f64 },

    /// Equalizer tap energy blew past the divergence bound.
    #[error("equalizer diverged at symbol {symbol}: tap energy {tap_energy:.3e}")]
    Diverged { symbol: usize, tap_energy: f64 },

    /// Mismatched or degenerate input data.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
