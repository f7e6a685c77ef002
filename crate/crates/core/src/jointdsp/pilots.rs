//! Known-pilot waveform reconstruction and pilot-aided frequency search.

use num_complex::Complex;

use crate::scalar::{cis, real, Real};
use crate::sigkit::{ops, rrc_taps, DualPolSignal};
use crate::error::Result;

/// Synchronization pilots shaped at 2 SPS onto an otherwise empty frame of
/// `frame_len` symbols, with the same unit-power convention as the transmitter.
pub fn pilot_waveform<T: Real>(sync: &[Vec<Complex<T>>; 2], frame_len: usize, beta: f64, symbol_rate: f64) -> Result<DualPolSignal<T>> {
    let sps = 2;
    let pulse = rrc_taps::<T>(beta, sps, 128)?;
    let gain = real::<T>((sps as f64).sqrt());
    let shape = |p: &[Complex<T>]| {
        let mut up = vec![Complex::new(T::zero(), T::zero()); frame_len * sps];
        for (k, &v) in p.iter().enumerate() {
            up[k * sps] = v * gain;
        }
        ops::circular_convolve(&up, &pulse.taps, pulse.center())
    };
    DualPolSignal::new(shape(&sync[0]), shape(&sync[1]), symbol_rate * sps as f64, 0.0)
}

/// Products `r_p[n + start] * conj(p_q[n])` for all four polarization pairs.
pub(crate) fn pair_products<T: Real>(r: &DualPolSignal<T>, pilot: &DualPolSignal<T>, range: std::ops::Range<usize>) -> [Vec<Complex<T>>; 4] {
    let mut out: [Vec<Complex<T>>; 4] = Default::default();
    let rp = r.pols();
    let pp = pilot.pols();
    for (i, pair) in out.iter_mut().enumerate() {
        let (a, b) = (rp[i / 2], pp[i % 2]);
        *pair = range.clone().map(|n| a[n] * b[n].conj()).collect();
    }
    out
}

/// Frequency (Hz) of the strongest common tone across `products`, searched
/// with an FFT zero-padded by `pad` and refined by a parabola through the
/// peak bin and its neighbors (on the log power).
pub(crate) fn tone_search<T: Real>(products: &[Vec<Complex<T>>], fs: f64, pad: usize) -> f64 {
    let len = products[0].len();
    let nfft = (len * pad).next_power_of_two();
    let mut power = vec![0.0f64; nfft];
    for z in products {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); nfft];
        buf[..len].copy_from_slice(z);
        ops::fft(&mut buf);
        for (acc, v) in power.iter_mut().zip(&buf) {
            *acc += v.norm_sqr().to_f64().unwrap();
        }
    }
    let (k, _) = power
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best });
    let l = power[(k + nfft - 1) % nfft].max(1e-300).ln();
    let c = power[k].max(1e-300).ln();
    let r = power[(k + 1) % nfft].max(1e-300).ln();
    let denom = l - 2.0 * c + r;
    let frac = if denom.abs() > 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    ops::bin_frequency(k, nfft, fs) + frac.clamp(-0.5, 0.5) * fs / nfft as f64
}

/// Block least-squares fine frequency estimate. The received pair is fitted
/// as `r = H p` on consecutive blocks of `block` samples; the frequency is the
/// mean phase advance of `H` from block to block. Insensitive to any static
/// polarization mixing.
pub(crate) fn block_phase_slope<T: Real>(
    r: &DualPolSignal<T>,
    pilot: &DualPolSignal<T>,
    range: std::ops::Range<usize>,
    block: usize,
    coarse: f64,
) -> f64 {
    let fs = r.sample_rate;
    let nblocks = range.len() / block;
    let mut prev: Option<[[Complex<f64>; 2]; 2]> = None;
    let mut acc = Complex::new(0.0, 0.0);
    for b in 0..nblocks {
        let start = range.start + b * block;
        // normal equations: H = (R P^H) (P P^H)^-1
        let mut rp = [[Complex::new(0.0, 0.0); 2]; 2];
        let mut pp = [[Complex::new(0.0, 0.0); 2]; 2];
        for n in start..start + block {
            let rot: Complex<f64> = cis(-2.0 * std::f64::consts::PI * coarse * n as f64 / fs);
            let rv = [to64(r.x[n]) * rot, to64(r.y[n]) * rot];
            let pv = [to64(pilot.x[n]), to64(pilot.y[n])];
            for i in 0..2 {
                for j in 0..2 {
                    rp[i][j] += rv[i] * pv[j].conj();
                    pp[i][j] += pv[i] * pv[j].conj();
                }
            }
        }
        let det = pp[0][0] * pp[1][1] - pp[0][1] * pp[1][0];
        if det.norm() < 1e-30 {
            prev = None;
            continue;
        }
        let inv = [[pp[1][1] / det, -pp[0][1] / det], [-pp[1][0] / det, pp[0][0] / det]];
        let mut h = [[Complex::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = rp[i][0] * inv[0][j] + rp[i][1] * inv[1][j];
            }
        }
        if let Some(p) = prev {
            for i in 0..2 {
                for j in 0..2 {
                    acc += h[i][j] * p[i][j].conj();
                }
            }
        }
        prev = Some(h);
    }
    coarse + acc.arg() / (2.0 * std::f64::consts::PI * block as f64) * fs
}

#[inline]
fn to64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap())
}
