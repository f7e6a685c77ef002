//! Simulation of comb-based optical superchannels and a joint receiver that
//! equalizes each channel together with the aliased spectra of its two
//! neighbors.
//!
//! Pipeline: [`txchain`] builds framed, pulse-shaped channels on comb lines,
//! [`channel`] adds noise, phase noise, dispersion and converter
//! quantization, [`rxchain`] demultiplexes and samples every channel at 2 SPS,
//! [`jointdsp`] recovers the symbols and [`metrics`] scores them. The
//! [`harness`] runs parameter sweeps from a TOML file.
//!
//! Signal code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common choices.

pub mod channel;
pub mod error;
pub mod harness;
pub mod jointdsp;
pub mod metrics;
pub mod rng;
pub mod rxchain;
pub mod scalar;
pub mod sigkit;
pub mod txchain;

pub use error::{Error, Result};
pub use rng::SeedStream;
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type Signal = sigkit::DualPolSignal<f64>;
pub type Signal32 = sigkit::DualPolSignal<f32>;
pub type Constellation = sigkit::ConstellationSpec<f64>;
pub type Constellation32 = sigkit::ConstellationSpec<f32>;
pub type PulseShape = sigkit::PulseShapeSpec<f64>;
pub type PulseShape32 = sigkit::PulseShapeSpec<f32>;
pub type Plan = txchain::ChannelPlan<f64>;
pub type Plan32 = txchain::ChannelPlan<f32>;
pub type Equalizer = jointdsp::EqualizerState<f64>;
pub type Equalizer32 = jointdsp::EqualizerState<f32>;
pub type Dsp = jointdsp::DspResult<f64>;
pub type Dsp32 = jointdsp::DspResult<f32>;
