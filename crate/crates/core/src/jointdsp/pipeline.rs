//! Full receive chain for one detected channel and its two neighbors.

use num_complex::Complex;
use serde::Serialize;

use super::alias::{cd_compensate, matched_filter, prepare_aliased_inputs, stitch_wideband};
use super::cpe::{cpe, CpeDiagnostics};
use super::equalizer::{run_equalizer, EqualizerConfig, EqualizerDiagnostics, EqualizerMode, EqualizerState, TrainingData};
use super::foe::{delta_f_threshold, joint_foe, FoeEstimate};
use super::pilots::pilot_waveform;
use super::sync::{align, synchronize, SyncEstimate};
use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::sigkit::{frequency_shift, ConstellationSpec, DualPolSignal};
use crate::txchain::{FrameMap, KnownPilots};

/// Receiver structure applied after the common front-end stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Receiver {
    /// 6x2 equalizer on the center stream and both aliased neighbors.
    Joint,
    /// Conventional 2x2 equalizer on the center stream.
    Single,
    /// Neighbors stitched onto a wideband grid, then a 2x2 equalizer at `sps`.
    Stitched { sps: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DspConfig {
    pub equalizer: EqualizerConfig,
    /// CPE pilots averaged per phase estimate.
    pub cpe_window: usize,
    pub cd_length_km: f64,
    pub cd_dispersion: f64,
    /// Fixed RRC matched filter ahead of the adaptive equalizer.
    pub matched_filter: bool,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self { equalizer: EqualizerConfig::default(), cpe_window: 5, cd_length_km: 0.0, cd_dispersion: 17.0, matched_filter: true }
    }
}

impl DspConfig {
    pub fn validate(&self) -> Result<()> {
        self.equalizer.validate()?;
        if self.cpe_window == 0 {
            return Err(Error::Config("cpe_window must be >= 1".into()));
        }
        if !(self.cd_length_km >= 0.0) {
            return Err(Error::Config("fiber length must be >= 0".into()));
        }
        Ok(())
    }
}

/// Link parameters the receiver knows a priori.
#[derive(Clone, Debug)]
pub struct LinkParams<'a, T: Real> {
    pub symbol_rate: f64,
    pub spacing: f64,
    pub beta: f64,
    pub map: &'a FrameMap,
    pub constellation: &'a ConstellationSpec<T>,
}

/// One detected channel: 2-SPS samples plus its known pilots.
#[derive(Clone, Debug)]
pub struct ReceivedChannel<T: Real> {
    pub index: i32,
    pub signal: DualPolSignal<T>,
    pub pilots: KnownPilots<T>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DspDiagnostics {
    pub peak_to_sidelobe: f64,
    pub raw_offsets: Vec<(i32, f64)>,
    pub delta_f_applied: bool,
    pub mse_trace: Vec<f64>,
    pub trace_block: usize,
    pub final_tap_energy: f64,
    /// Final taps as `[out][branch][tap] = [re, im]`.
    pub taps: Vec<Vec<Vec<[f64; 2]>>>,
    pub cpe_phases: Vec<f64>,
    pub cycle_slips: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct DspResult<T: Real> {
    /// Payload symbols in frame order.
    pub symbols_x: Vec<Complex<T>>,
    pub symbols_y: Vec<Complex<T>>,
    pub foe_estimate: f64,
    pub delta_f_estimate: f64,
    pub timing_offset: f64,
    pub diagnostics: DspDiagnostics,
}

/// Pilot-only frame: known symbols at pilot slots, zeros elsewhere.
pub fn pilot_frame<T: Real>(pilots: &KnownPilots<T>, map: &FrameMap) -> [Vec<Complex<T>>; 2] {
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = [vec![zero; map.frame_len], vec![zero; map.frame_len]];
    for p in 0..2 {
        for (j, &k) in map.sync_pilot_indices.iter().enumerate() {
            out[p][k] = pilots.sync[p][j];
        }
        for (j, &k) in map.cpe_pilot_indices.iter().enumerate() {
            out[p][k] = pilots.cpe[p][j];
        }
    }
    out
}

fn normalize<T: Real>(s: &DualPolSignal<T>) -> DualPolSignal<T> {
    let p = s.power().to_f64().unwrap();
    if p > 0.0 {
        s.scale(Complex::new(real(1.0 / p.sqrt()), T::zero()))
    } else {
        s.clone()
    }
}

/// Runs sync, CD compensation, FOE, equalization and CPE.
///
/// `channels` holds either the center channel alone (single receiver) or the
/// lower neighbor, center and upper neighbor in that order. Timing is
/// estimated once on the center channel and applied to all streams. The
/// shared offset `f0` is removed from every stream; the per-index spacing
/// error is only corrected (as a common shift of the center's share) when it
/// would rotate the frame by more than a tenth of a cycle, otherwise it is
/// left to the CPE.
pub fn process<T: Real>(
    channels: &[ReceivedChannel<T>],
    link: &LinkParams<'_, T>,
    receiver: Receiver,
    cfg: &DspConfig,
) -> Result<DspResult<T>> {
    cfg.validate()?;
    let center_slot = match (receiver, channels.len()) {
        (Receiver::Single, 1) => 0,
        (_, 3) => 1,
        (r, n) => return Err(Error::Input(format!("{r:?} receiver given {n} channels"))),
    };
    let map = link.map;
    let sync_len = map.sync_pilot_len;
    let center_index = channels[center_slot].index;

    let compensated: Vec<DualPolSignal<T>> = channels
        .iter()
        .map(|c| cd_compensate(&c.signal, cfg.cd_length_km, cfg.cd_dispersion))
        .collect();
    let pilot_waves = channels
        .iter()
        .map(|c| pilot_waveform(&c.pilots.sync, map.frame_len, link.beta, link.symbol_rate))
        .collect::<Result<Vec<_>>>()?;

    let sync: SyncEstimate = synchronize(&compensated[center_slot], &pilot_waves[center_slot], sync_len)?;
    let aligned: Vec<DualPolSignal<T>> = compensated.iter().map(|s| align(s, &sync)).collect();

    let foe: FoeEstimate = match receiver {
        Receiver::Single => {
            let e = joint_foe(&[(center_index, &aligned[0], &pilot_waves[0])], sync_len, link.symbol_rate)?;
            FoeEstimate { f0: e.raw[0].1, delta_f: 0.0, raw: e.raw }
        }
        _ => {
            let triple: Vec<(i32, &DualPolSignal<T>, &DualPolSignal<T>)> =
                (0..3).map(|i| (channels[i].index, &aligned[i], &pilot_waves[i])).collect();
            joint_foe(&triple, sync_len, link.symbol_rate)?
        }
    };
    let frame_duration = map.frame_len as f64 / link.symbol_rate;
    let apply_delta = foe.delta_f.abs() > delta_f_threshold(frame_duration);
    let common = foe.f0 + if apply_delta { center_index as f64 * foe.delta_f } else { 0.0 };
    let front = |s: &DualPolSignal<T>| -> DualPolSignal<T> {
        if cfg.matched_filter {
            normalize(&matched_filter(s, link.symbol_rate, link.beta))
        } else {
            normalize(s)
        }
    };
    let shifted: Vec<DualPolSignal<T>> = aligned.iter().map(|s| frequency_shift(s, -common)).collect();
    // stitching needs the full-band streams, so the stitched receiver skips the matched filter
    let streams: Vec<DualPolSignal<T>> = match receiver {
        Receiver::Stitched { .. } => shifted.iter().map(normalize).collect(),
        _ => shifted.iter().map(front).collect(),
    };

    let frame = pilot_frame(&channels[center_slot].pilots, map);
    let training = TrainingData { frame: [&frame[0], &frame[1]], map, constellation: link.constellation };
    let eq = &cfg.equalizer;
    let (equalized, state, eq_diag): ([Vec<Complex<T>>; 2], EqualizerState<T>, EqualizerDiagnostics) = match receiver {
        Receiver::Single => {
            let mut state = EqualizerState::new(EqualizerMode::Single2x2, eq.num_taps, 2, eq.step_train, eq.step_dd);
            let (out, d) = run_equalizer(&[&streams[0]], &training, &mut state, eq)?;
            (out, state, d)
        }
        Receiver::Joint => {
            let inputs = prepare_aliased_inputs(&streams[0], &streams[1], &streams[2], link.spacing);
            let mut state = EqualizerState::new(EqualizerMode::Joint6x2, eq.num_taps, 2, eq.step_train, eq.step_dd);
            let (out, d) = run_equalizer(&[&inputs[0], &inputs[1], &inputs[2]], &training, &mut state, eq)?;
            (out, state, d)
        }
        Receiver::Stitched { sps } => {
            if sps % 2 != 0 || sps < 2 {
                return Err(Error::Input(format!("stitched receiver needs an even sps, got {sps}")));
            }
            let wide = stitch_wideband(&streams[0], &streams[1], &streams[2], link.spacing, sps / 2)?;
            let wide = normalize(&wide);
            let t = eq.num_taps * (sps / 2);
            let taps = if t % 2 == 0 { t + 1 } else { t };
            let mut state = EqualizerState::new(EqualizerMode::Single2x2, taps, sps, eq.step_train, eq.step_dd);
            let (out, d) = run_equalizer(&[&wide], &training, &mut state, eq)?;
            (out, state, d)
        }
    };

    let (corrected, cpe_diag): (_, CpeDiagnostics) = cpe(&equalized, &channels[center_slot].pilots.cpe, map, cfg.cpe_window);
    let pick = |p: usize| map.payload_indices.iter().map(|&k| corrected[p][k]).collect::<Vec<_>>();

    let taps = state
        .taps
        .iter()
        .map(|o| {
            o.iter()
                .map(|b| b.iter().map(|w| [w.re.to_f64().unwrap(), w.im.to_f64().unwrap()]).collect())
                .collect()
        })
        .collect();
    let diagnostics = DspDiagnostics {
        peak_to_sidelobe: sync.peak_to_sidelobe,
        raw_offsets: foe.raw.clone(),
        delta_f_applied: apply_delta,
        mse_trace: eq_diag.mse_trace,
        trace_block: eq_diag.trace_block,
        final_tap_energy: eq_diag.final_tap_energy,
        taps,
        cpe_phases: cpe_diag.pilot_phases,
        cycle_slips: cpe_diag.cycle_slips,
    };
    Ok(DspResult {
        symbols_x: pick(0),
        symbols_y: pick(1),
        foe_estimate: foe.f0,
        delta_f_estimate: foe.delta_f,
        timing_offset: sync.offset,
        diagnostics,
    })
}
