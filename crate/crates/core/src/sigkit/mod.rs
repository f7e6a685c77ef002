//! Signal containers and DSP primitives used by every other stage.

mod constellation;
pub mod ops;
mod pulse;
mod signal;

pub use constellation::{qam_constellation, ConstellationSpec};
pub use ops::{delay_signal, frequency_shift, resample};
pub use pulse::{raised_cosine_spectrum, rrc_impulse, rrc_taps, PulseShapeSpec};
pub use signal::DualPolSignal;
