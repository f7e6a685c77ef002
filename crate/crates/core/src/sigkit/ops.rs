//! Whole-buffer spectral operations. Every buffer is treated as one period of
//! a periodic waveform, so filtering, delaying and resampling are circular.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::signal::DualPolSignal;
use crate::error::{config, Result};
use crate::scalar::{cis, real, real_usize, Real};

pub fn fft<T: Real>(buf: &mut [Complex<T>]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// Inverse FFT including the `1/N` factor.
pub fn ifft<T: Real>(buf: &mut [Complex<T>]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
    let k = T::one() / real_usize(buf.len());
    for z in buf.iter_mut() {
        *z = *z * k;
    }
}

/// Frequency of FFT bin `k` for a length-`n` buffer at `fs`.
#[inline]
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
    k * fs / n as f64
}

/// Multiplies the spectrum by `h(f)` evaluated at each bin's baseband frequency.
pub fn filter_spectrum<T: Real, F>(samples: &[Complex<T>], fs: f64, mut h: F) -> Vec<Complex<T>>
where
    F: FnMut(f64) -> Complex<T>,
{
    let n = samples.len();
    let mut buf = samples.to_vec();
    fft(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        *z = *z * h(bin_frequency(k, n, fs));
    }
    ifft(&mut buf);
    buf
}

/// Circular convolution of `samples` with `taps` whose time origin is at
/// index `center`.
pub fn circular_convolve<T: Real>(samples: &[Complex<T>], taps: &[T], center: usize) -> Vec<Complex<T>> {
    let n = samples.len();
    let mut h = vec![Complex::new(T::zero(), T::zero()); n];
    for (i, &t) in taps.iter().enumerate() {
        let idx = (i as i64 - center as i64).rem_euclid(n as i64) as usize;
        h[idx] = h[idx] + Complex::new(t, T::zero());
    }
    let mut x = samples.to_vec();
    fft(&mut x);
    fft(&mut h);
    for (a, b) in x.iter_mut().zip(&h) {
        *a = *a * b;
    }
    ifft(&mut x);
    x
}

/// Multiplies sample `n` by `exp(j 2 pi df n / fs)`.
pub fn shift_samples<T: Real>(samples: &[Complex<T>], df: f64, fs: f64) -> Vec<Complex<T>> {
    if df == 0.0 {
        return samples.to_vec();
    }
    let r = (df / fs).rem_euclid(1.0);
    samples
        .iter()
        .enumerate()
        .map(|(n, z)| {
            let cycles = (r * n as f64).fract();
            z * cis::<T>(real(2.0 * std::f64::consts::PI * cycles))
        })
        .collect()
}

/// Moves the spectrum up by `df`. The buffer's DC then corresponds to an
/// absolute frequency `df` lower than before.
pub fn frequency_shift<T: Real>(signal: &DualPolSignal<T>, df: f64) -> DualPolSignal<T> {
    let fs = signal.sample_rate;
    let mut out = signal.map_pols(|p| shift_samples(p, df, fs));
    out.center_offset = signal.center_offset - df;
    out
}

/// Delays by `delay` samples (fractional allowed) using a linear phase ramp.
pub fn fractional_delay<T: Real>(samples: &[Complex<T>], delay: f64) -> Vec<Complex<T>> {
    if delay == 0.0 {
        return samples.to_vec();
    }
    let n = samples.len();
    filter_spectrum(samples, n as f64, |f| cis(real(-2.0 * std::f64::consts::PI * f * delay / n as f64)))
}

pub fn delay_signal<T: Real>(signal: &DualPolSignal<T>, delay: f64) -> DualPolSignal<T> {
    signal.map_pols(|p| fractional_delay(p, delay))
}

/// Best rational `p/q` within 1e-9 relative of `x`, with `p, q <= limit`.
pub fn rational_approx(x: f64, limit: u64) -> Option<(u64, u64)> {
    if !(x > 0.0 && x.is_finite()) {
        return None;
    }
    // continued fraction convergents
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a > limit as f64 {
            break;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if h2 > limit || k2 > limit {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64 / k1 as f64) - x).abs() <= 1e-9 * x {
            return Some((h1, k1));
        }
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 > 0 && ((h1 as f64 / k1 as f64) - x).abs() <= 1e-9 * x {
        Some((h1, k1))
    } else {
        None
    }
}

/// Resamples one buffer from length `n` to `m` by zero-padding or truncating
/// its spectrum. The Nyquist bin is split on upsampling and folded on
/// downsampling so an up/down round trip is exact.
pub fn resample_buffer<T: Real>(samples: &[Complex<T>], m: usize) -> Vec<Complex<T>> {
    let n = samples.len();
    if m == n {
        return samples.to_vec();
    }
    let mut x = samples.to_vec();
    fft(&mut x);
    let zero = Complex::new(T::zero(), T::zero());
    let mut y = vec![zero; m];
    let k = n.min(m);
    let half = k / 2;
    for i in 0..k.div_ceil(2) {
        y[i] = x[i];
    }
    for i in 1..=(k - 1) / 2 {
        y[m - i] = x[n - i];
    }
    if k % 2 == 0 {
        if m > n {
            let v = x[half] * real::<T>(0.5);
            y[half] = v;
            y[m - half] = v;
        } else {
            y[half] = x[half] + x[n - half];
        }
    }
    // ifft divides by m; the time-domain amplitude needs 1/n
    ifft(&mut y);
    let scale = real_usize::<T>(m) / real_usize::<T>(n);
    for z in y.iter_mut() {
        *z = *z * scale;
    }
    y
}

/// Band-limited rational resampling of a whole buffer.
pub fn resample<T: Real>(signal: &DualPolSignal<T>, target_rate: f64) -> Result<DualPolSignal<T>> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return config(format!("target rate must be positive, got {target_rate}"));
    }
    if target_rate == signal.sample_rate {
        return Ok(signal.clone());
    }
    let ratio = target_rate / signal.sample_rate;
    let Some((p, q)) = rational_approx(ratio, 1 << 16) else {
        return config(format!("resampling ratio {ratio} not representable as p/q with p, q <= 65536"));
    };
    let n = signal.len() as u64;
    if (n * p) % q != 0 {
        return config(format!(
            "buffer length {n} times ratio {p}/{q} is not an integer; cannot resample whole buffer"
        ));
    }
    let m = (n * p / q) as usize;
    let mut out = signal.map_pols(|s| resample_buffer(s, m));
    out.sample_rate = target_rate;
    Ok(out)
}
