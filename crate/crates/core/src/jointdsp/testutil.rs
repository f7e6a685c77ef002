//! Synthetic frames for the DSP unit tests.

use num_complex::Complex;
use rand::Rng;

use crate::rng::SeedStream;
use crate::sigkit::{qam_constellation, rrc_taps, DualPolSignal};
use crate::txchain::shape_channel;

pub type C = Complex<f64>;

/// QPSK sync pilots followed by 64QAM, per polarization.
pub fn frame(len: usize, sync_len: usize, seed: u64) -> [Vec<C>; 2] {
    let c = qam_constellation::<f64>(64).unwrap();
    let q = std::f64::consts::FRAC_1_SQRT_2;
    let mut rng = SeedStream::new(seed).substream("dsp-test");
    [0, 1].map(|_| {
        (0..len)
            .map(|k| {
                if k < sync_len {
                    let b = rng.random_range(0..4);
                    C::new(if b & 1 == 0 { q } else { -q }, if b & 2 == 0 { q } else { -q })
                } else {
                    c.points[rng.random_range(0..64)]
                }
            })
            .collect()
    })
}

/// Sync pilots only, zeros elsewhere.
pub fn sync_only(frame: &[Vec<C>; 2], sync_len: usize) -> [Vec<C>; 2] {
    [0, 1].map(|p| frame[p].iter().enumerate().map(|(k, &v)| if k < sync_len { v } else { C::new(0.0, 0.0) }).collect())
}

/// 2-SPS RRC waveform with a long span.
pub fn shaped(frame: &[Vec<C>; 2], beta: f64, symbol_rate: f64) -> DualPolSignal<f64> {
    shape_channel(&frame[0], &frame[1], &rrc_taps(beta, 2, 128).unwrap(), 2, symbol_rate).unwrap()
}
