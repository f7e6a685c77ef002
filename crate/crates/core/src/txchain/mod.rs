//! Transmitter: framing, pulse shaping and superchannel assembly.

mod comb;
mod frame;
mod plan;

use std::collections::HashMap;

use num_complex::Complex;
use rand::Rng;

pub use comb::CombModel;
pub use frame::{FrameMap, SlotKind};
pub use plan::{default_decorrelation, flatness_ripple, ChannelPlan, PolMux};

use crate::channel::apply_phase_noise;
use crate::error::{config, Result};
use crate::rng::SeedStream;
use crate::scalar::{real, Real};
use crate::sigkit::{frequency_shift, ops, resample, DualPolSignal, PulseShapeSpec};

/// Transmitted symbols of one channel plus everything the receiver may know.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelFrame<T: Real> {
    pub index: i32,
    /// Full frame per polarization.
    pub symbols: [Vec<Complex<T>>; 2],
    /// Constellation point index of every payload symbol, in `payload_indices` order.
    pub payload_points: [Vec<u16>; 2],
}

impl<T: Real> ChannelFrame<T> {
    pub fn pilots(&self, map: &FrameMap) -> KnownPilots<T> {
        let pick = |idx: &[usize], p: usize| idx.iter().map(|&k| self.symbols[p][k]).collect::<Vec<_>>();
        KnownPilots {
            sync: [pick(&map.sync_pilot_indices, 0), pick(&map.sync_pilot_indices, 1)],
            cpe: [pick(&map.cpe_pilot_indices, 0), pick(&map.cpe_pilot_indices, 1)],
        }
    }

    pub fn payload_symbols(&self, map: &FrameMap, pol: usize) -> Vec<Complex<T>> {
        map.payload_indices.iter().map(|&k| self.symbols[pol][k]).collect()
    }
}

/// Known pilot sequences of one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct KnownPilots<T: Real> {
    pub sync: [Vec<Complex<T>>; 2],
    pub cpe: [Vec<Complex<T>>; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct TxFrame<T: Real> {
    pub channels: Vec<ChannelFrame<T>>,
}

impl<T: Real> TxFrame<T> {
    pub fn channel(&self, index: i32) -> Option<&ChannelFrame<T>> {
        self.channels.iter().find(|c| c.index == index)
    }
}

fn qpsk<T: Real, R: Rng>(rng: &mut R) -> Complex<T> {
    let a = real::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let bits: u8 = rng.random_range(0..4);
    Complex::new(if bits & 2 == 0 { a } else { -a }, if bits & 1 == 0 { a } else { -a })
}

/// Independent frame content for one decorrelation seed: per polarization the
/// full symbol vector and the payload point indices.
fn seed_stream<T: Real>(plan: &ChannelPlan<T>, map: &FrameMap, seeds: &SeedStream, seed_index: u32) -> ([Vec<Complex<T>>; 2], [Vec<u16>; 2]) {
    let order = plan.constellation.order;
    let mut symbols = [Vec::new(), Vec::new()];
    let mut payload = [Vec::new(), Vec::new()];
    for pol in 0..2 {
        let mut sync_rng = seeds.substream(&format!("tx/sync/{seed_index}/{pol}"));
        let mut data_rng = seeds.substream(&format!("tx/data/{seed_index}/{pol}"));
        let mut v = Vec::with_capacity(map.frame_len);
        for k in 0..map.frame_len {
            match map.slot(k) {
                SlotKind::Sync => v.push(qpsk(&mut sync_rng)),
                SlotKind::Cpe => v.push(plan.constellation.points[data_rng.random_range(0..order)]),
                SlotKind::Payload => {
                    let p = data_rng.random_range(0..order);
                    payload[pol].push(p as u16);
                    v.push(plan.constellation.points[p]);
                }
            }
        }
        symbols[pol] = v;
    }
    (symbols, payload)
}

/// Builds the per-channel symbol frames.
///
/// Channels that share a decorrelation seed carry the same pilots and a
/// circularly shifted copy of the same payload.
pub fn build_frame<T: Real>(plan: &ChannelPlan<T>, map: &FrameMap, seeds: &SeedStream) -> Result<TxFrame<T>> {
    plan.validate()?;
    if map.frame_len <= map.sync_pilot_len {
        return config("frame length does not accommodate the sync pilots");
    }
    let mut cache: HashMap<u32, ([Vec<Complex<T>>; 2], [Vec<u16>; 2])> = HashMap::new();
    let mut occurrences: HashMap<u32, usize> = HashMap::new();
    let n_payload = map.payload_indices.len();
    let mut channels = Vec::with_capacity(plan.num_channels);
    for (slot, index) in plan.indices().enumerate() {
        let s = plan.decorrelation_pattern[slot];
        let (base_symbols, base_payload) = cache
            .entry(s)
            .or_insert_with(|| seed_stream(plan, map, seeds, s))
            .clone();
        let occ = occurrences.entry(s).or_insert(0);
        let shift = (*occ * (n_payload / 2 + 7919)) % n_payload.max(1);
        *occ += 1;

        let mut symbols = base_symbols;
        let mut payload = base_payload;
        if shift != 0 {
            for pol in 0..2 {
                payload[pol].rotate_left(shift);
                for (j, &k) in map.payload_indices.iter().enumerate() {
                    symbols[pol][k] = plan.constellation.points[payload[pol][j] as usize];
                }
            }
        }
        if plan.polmux == PolMux::DelayedCopy && n_payload > 0 {
            // y keeps its own pilots; its payload is the x payload delayed
            let mut y = payload[0].clone();
            y.rotate_right(plan.polmux_delay % n_payload);
            for (j, &k) in map.payload_indices.iter().enumerate() {
                symbols[1][k] = plan.constellation.points[y[j] as usize];
            }
            payload[1] = y;
        }
        channels.push(ChannelFrame { index, symbols, payload_points: payload });
    }
    Ok(TxFrame { channels })
}

/// Upsamples by `sim_sps` and applies the RRC pulse (circularly). A single
/// symbol produces `sqrt(sim_sps)` times the taps, so unit-energy symbols give
/// unit mean sample power.
pub fn shape_channel<T: Real>(
    symbols_x: &[Complex<T>],
    symbols_y: &[Complex<T>],
    pulse: &PulseShapeSpec<T>,
    sim_sps: usize,
    symbol_rate: f64,
) -> Result<DualPolSignal<T>> {
    if sim_sps != pulse.sps {
        return config(format!("pulse designed for {} sps, shaping requested at {sim_sps}", pulse.sps));
    }
    if symbols_x.is_empty() || symbols_x.len() != symbols_y.len() {
        return config("symbol streams must be non-empty and of equal length");
    }
    let gain = real::<T>((sim_sps as f64).sqrt());
    let shape = |s: &[Complex<T>]| {
        let mut up = vec![Complex::new(T::zero(), T::zero()); s.len() * sim_sps];
        for (k, &v) in s.iter().enumerate() {
            up[k * sim_sps] = v * gain;
        }
        ops::circular_convolve(&up, &pulse.taps, pulse.center())
    };
    DualPolSignal::new(shape(symbols_x), shape(symbols_y), symbol_rate * sim_sps as f64, 0.0)
}

/// Places every channel on its comb line and sums them. `channels` are
/// ordered from the lowest index. The transmitter comb's phase noise is
/// common to all lines.
pub fn assemble_superchannel<T: Real, R: Rng>(
    channels: &[DualPolSignal<T>],
    plan: &ChannelPlan<T>,
    comb: &CombModel,
    sim_rate: f64,
    rng: &mut R,
) -> Result<DualPolSignal<T>> {
    if channels.len() != plan.num_channels {
        return config(format!("expected {} channel waveforms, got {}", plan.num_channels, channels.len()));
    }
    let needed = plan.min_sim_rate();
    if sim_rate < needed {
        return config(format!("simulation rate {sim_rate:.4e} Hz below required minimum {needed:.4e} Hz"));
    }
    let mut total: Option<DualPolSignal<T>> = None;
    for (slot, index) in plan.indices().enumerate() {
        let ch = resample(&channels[slot], sim_rate)?;
        let amp = real::<T>(10f64.powf(plan.gains_db[slot] / 20.0));
        let ch = if amp != T::one() { ch.scale(Complex::new(amp, T::zero())) } else { ch };
        let placed = frequency_shift(&ch, index as f64 * plan.spacing + comb.line_offset(index));
        total = Some(match total {
            None => placed,
            Some(acc) => {
                if acc.len() != placed.len() {
                    return config("channel waveforms differ in length after resampling");
                }
                acc.add(&placed)?
            }
        });
    }
    let mut out = total.expect("at least one channel");
    out.center_offset = 0.0;
    Ok(apply_phase_noise(&out, comb.linewidth, rng))
}
