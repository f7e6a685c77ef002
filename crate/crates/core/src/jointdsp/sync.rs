//! Frame synchronization on a reference channel.

use num_complex::Complex;

use super::pilots::{pair_products, tone_search};
use crate::error::{Error, Result};
use crate::scalar::{cis, real, Real};
use crate::sigkit::{ops, DualPolSignal};

/// Minimum ratio between the correlation peak and the largest sidelobe.
pub const MIN_PEAK_TO_SIDELOBE: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyncEstimate {
    /// Position of the first sync symbol, in samples (fractional).
    pub offset: f64,
    pub peak_to_sidelobe: f64,
}

/// `sum_p conj(s_p[n - lag]) s_p[n]`: invariant to polarization rotation,
/// a frequency offset only adds a constant phase.
fn differential<T: Real>(s: &DualPolSignal<T>, lag: usize) -> Vec<Complex<T>> {
    let n = s.len();
    (0..n)
        .map(|i| {
            let j = (i + n - lag) % n;
            s.x[j].conj() * s.x[i] + s.y[j].conj() * s.y[i]
        })
        .collect()
}

/// Circular cross-correlation `c[t] = sum_n a[n + t] conj(b[n])`.
fn xcorr<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    ops::fft(&mut fa);
    ops::fft(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * y.conj();
    }
    ops::ifft(&mut fa);
    fa
}

/// Locates the sync pilot in `reference` (2 SPS, one full frame).
///
/// The coarse position is the magnitude peak of a differential correlation,
/// which survives arbitrary frequency offsets and polarization states. The
/// frequency offset is then removed with a pilot-aided tone search, and the
/// fine position is the parabolic vertex of the band-limited coherent
/// correlation power around the coarse peak.
pub fn synchronize<T: Real>(reference: &DualPolSignal<T>, pilot: &DualPolSignal<T>, sync_len: usize) -> Result<SyncEstimate> {
    let n = reference.len();
    if pilot.len() != n {
        return Err(Error::Input(format!("pilot waveform has {} samples, reference {n}", pilot.len())));
    }
    let span = (2 * sync_len).min(n);
    let dr = differential(reference, 2);
    let dp = differential(pilot, 2);
    let c = xcorr(&dr, &dp);
    let mag: Vec<f64> = c.iter().map(|z| z.norm().to_f64().unwrap()).collect();
    let (peak_idx, peak) = mag
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let guard = 8usize;
    let sidelobe = mag
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let d = (*i as i64 - peak_idx as i64).rem_euclid(n as i64) as usize;
            d > guard && d < n - guard
        })
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    let psr = if !(peak > 0.0) { 0.0 } else if sidelobe > 0.0 { peak / sidelobe } else { f64::INFINITY };
    if psr < MIN_PEAK_TO_SIDELOBE {
        return Err(Error::SyncFailure { psr, threshold: MIN_PEAK_TO_SIDELOBE });
    }

    // coarse frequency on the integer-aligned pilot region
    let aligned: DualPolSignal<T> = reference.map_pols(|p| {
        let mut v = p.to_vec();
        v.rotate_left(peak_idx);
        v
    });
    let margin = 16.min(span / 8);
    let products = pair_products(&aligned, pilot, margin..span - margin);
    let f_coarse = tone_search(&products, reference.sample_rate, 4);

    // coherent correlation per pol pair, evaluated off-grid from the cross spectra
    let fs = reference.sample_rate;
    let derot: DualPolSignal<T> = reference.map_pols(|p| {
        p.iter()
            .enumerate()
            .map(|(i, z)| z * cis::<T>(real(-2.0 * std::f64::consts::PI * (f_coarse * i as f64 / fs).fract())))
            .collect()
    });
    let mut spectra = Vec::with_capacity(4);
    for rp in derot.pols() {
        for pp in pilot.pols() {
            let mut a = rp.to_vec();
            let mut b = pp.to_vec();
            ops::fft(&mut a);
            ops::fft(&mut b);
            let cross: Vec<Complex<f64>> = a
                .iter()
                .zip(&b)
                .map(|(x, y)| {
                    let z = x * y.conj();
                    Complex::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap())
                })
                .collect();
            spectra.push(cross);
        }
    }
    let freqs: Vec<f64> = (0..n).map(|k| ops::bin_frequency(k, n, n as f64)).collect();
    let power_at = |tau: f64| -> f64 {
        let mut total = 0.0;
        for cross in &spectra {
            let mut acc = Complex::new(0.0, 0.0);
            for (z, &f) in cross.iter().zip(&freqs) {
                if z.re != 0.0 || z.im != 0.0 {
                    let ph = 2.0 * std::f64::consts::PI * (f * tau / n as f64).fract();
                    acc += z * Complex::new(ph.cos(), ph.sin());
                }
            }
            total += acc.norm_sqr();
        }
        total
    };
    let step = 1.0 / 16.0;
    let grid: Vec<f64> = (-24..=24).map(|i| peak_idx as f64 + i as f64 * step).collect();
    let values: Vec<f64> = grid.iter().map(|&t| power_at(t)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let fine = if best > 0 && best + 1 < values.len() {
        let (l, c0, r) = (values[best - 1], values[best], values[best + 1]);
        let denom = l - 2.0 * c0 + r;
        if denom.abs() > 0.0 {
            0.5 * (l - r) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    let offset = (grid[best] + fine * step).rem_euclid(n as f64);
    Ok(SyncEstimate { offset, peak_to_sidelobe: psr })
}

/// Advances every stream by the shared timing estimate so the first sync
/// symbol lands on sample 0.
pub fn align<T: Real>(signal: &DualPolSignal<T>, estimate: &SyncEstimate) -> DualPolSignal<T> {
    ops::delay_signal(signal, -estimate.offset)
}
