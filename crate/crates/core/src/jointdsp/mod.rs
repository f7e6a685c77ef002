//! Pilot-based receiver DSP at 2 samples per symbol.

mod alias;
mod cpe;
mod equalizer;
mod foe;
mod pilots;
mod pipeline;
mod sync;
#[cfg(test)]
mod testutil;

pub use alias::{cd_compensate, effective_shift, matched_filter, prepare_aliased_inputs, stitch_wideband};
pub use cpe::{cpe, CpeDiagnostics};
pub use equalizer::{
    run_equalizer, Adaptation, EqualizerConfig, EqualizerDiagnostics, EqualizerMode, EqualizerState, TapInit, TrainingData,
    DIVERGENCE_TAP_ENERGY,
};
pub use foe::{channel_offset, delta_f_threshold, fit_line, joint_foe, FoeEstimate};
pub use pilots::pilot_waveform;
pub use pipeline::{pilot_frame, process, DspConfig, DspDiagnostics, DspResult, LinkParams, ReceivedChannel, Receiver};
pub use sync::{align, synchronize, SyncEstimate, MIN_PEAK_TO_SIDELOBE};
