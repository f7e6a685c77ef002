//! Aliased side-channel inputs for the joint equalizer, and the wideband
//! stitched receiver used as a reference for it.

use crate::channel::invert_cd;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sigkit::{frequency_shift, ops, raised_cosine_spectrum, DualPolSignal};

/// Exact inverse of the fiber dispersion at the channel's absolute frequency
/// position (`center_offset`). Each channel is compensated on its own.
pub fn cd_compensate<T: Real>(channel: &DualPolSignal<T>, length_km: f64, dispersion_ps_nm_km: f64) -> DualPolSignal<T> {
    if length_km == 0.0 {
        return channel.clone();
    }
    invert_cd(channel, length_km, dispersion_ps_nm_km)
}

/// Fixed root-raised-cosine matched filter around the stream's own DC.
pub fn matched_filter<T: Real>(signal: &DualPolSignal<T>, symbol_rate: f64, beta: f64) -> DualPolSignal<T> {
    let fs = signal.sample_rate;
    signal.map_pols(|p| {
        ops::filter_spectrum(p, fs, |f| {
            num_complex::Complex::new(crate::scalar::real(raised_cosine_spectrum(f / symbol_rate, beta).sqrt()), T::zero())
        })
    })
}

/// Moves the side channels onto the center channel's frequency grid at the
/// 2-SPS rate: the lower neighbor is shifted by `-spacing`, the upper by
/// `+spacing`. The shifts wrap around the sample rate, which is what folds
/// the overlapping spectral content into place. The center stream is
/// returned unchanged.
pub fn prepare_aliased_inputs<T: Real>(
    lower: &DualPolSignal<T>,
    center: &DualPolSignal<T>,
    upper: &DualPolSignal<T>,
    spacing: f64,
) -> [DualPolSignal<T>; 3] {
    let n = lower.len().min(center.len()).min(upper.len());
    let trunc = |s: &DualPolSignal<T>| {
        if s.len() == n {
            s.clone()
        } else {
            s.map_pols(|p| p[..n].to_vec())
        }
    };
    [frequency_shift(&trunc(lower), -spacing), trunc(center), frequency_shift(&trunc(upper), spacing)]
}

/// Shift that `frequency_shift(.., df)` effectively applies at rate `fs`,
/// reduced to `[-fs/2, fs/2)`.
pub fn effective_shift(df: f64, fs: f64) -> f64 {
    let r = df.rem_euclid(fs);
    if r >= fs / 2.0 {
        r - fs
    } else {
        r
    }
}

/// Upsamples the three 2-SPS streams by `factor`, moves the side channels to
/// their true frequency positions and joins the three slices with brick-wall
/// boundaries at `+-spacing/2`. The result is the wideband spectrum around
/// the center channel as a single receiver would have seen it.
pub fn stitch_wideband<T: Real>(
    lower: &DualPolSignal<T>,
    center: &DualPolSignal<T>,
    upper: &DualPolSignal<T>,
    spacing: f64,
    factor: usize,
) -> Result<DualPolSignal<T>> {
    let n = center.len();
    if lower.len() != n || upper.len() != n {
        return Err(Error::Input("stitching needs equal-length streams".into()));
    }
    let fs = center.sample_rate * factor as f64;
    if fs < 3.0 * spacing {
        return Err(Error::Input(format!("wideband rate {fs:.4e} cannot hold three slices of {spacing:.4e}")));
    }
    let up = |s: &DualPolSignal<T>| -> DualPolSignal<T> {
        let mut out = s.map_pols(|p| ops::resample_buffer(p, n * factor));
        out.sample_rate = fs;
        out
    };
    let half = spacing / 2.0;
    let slice = |s: &DualPolSignal<T>, shift: f64, lo: f64, hi: f64| -> DualPolSignal<T> {
        let moved = frequency_shift(&up(s), shift);
        moved.map_pols(|p| {
            ops::filter_spectrum(p, fs, |f| {
                if f >= lo && f < hi {
                    num_complex::Complex::new(T::one(), T::zero())
                } else {
                    num_complex::Complex::new(T::zero(), T::zero())
                }
            })
        })
    };
    let l = slice(lower, -spacing, -3.0 * half, -half);
    let c = slice(center, 0.0, -half, half);
    let u = slice(upper, spacing, half, 3.0 * half);
    let mut out = l.add(&c)?.add(&u)?;
    out.center_offset = center.center_offset;
    Ok(out)
}
