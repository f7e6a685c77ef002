//! Physical impairments: AWGN, laser phase noise, chromatic dispersion,
//! polarization rotation and converter quantization.

use num_complex::Complex;
use rand::Rng;

use crate::error::{config, Result};
use crate::scalar::{cis, complex_gaussian, real, Real};
use crate::sigkit::{ops, DualPolSignal};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reference wavelength for dispersion, m.
pub const REFERENCE_WAVELENGTH: f64 = 1550e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ImpairmentConfig {
    /// Per-channel, per-polarization symbol SNR in dB; `f64::INFINITY` disables noise.
    pub snr_db: f64,
    /// DAC effective bits; `f64::INFINITY` disables quantization.
    pub enob: f64,
    pub clip_sigma: f64,
    pub fiber_len_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub pol_rotation_seed: Option<u64>,
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        Self {
            snr_db: 35.0,
            enob: 4.5,
            clip_sigma: 2.0,
            fiber_len_km: 0.0,
            dispersion_ps_nm_km: 17.0,
            pol_rotation_seed: Some(0),
        }
    }
}

impl ImpairmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return config("snr_db must be finite or +inf");
        }
        if !(self.enob > 1.0) {
            return config(format!("enob must be > 1 (or inf), got {}", self.enob));
        }
        if !(self.clip_sigma > 0.0) {
            return config(format!("clip_sigma must be > 0, got {}", self.clip_sigma));
        }
        if !(self.fiber_len_km >= 0.0) {
            return config(format!("fiber length must be >= 0, got {}", self.fiber_len_km));
        }
        Ok(())
    }
}

/// Adds circular Gaussian noise so that a receiver with a matched filter sees
/// `snr_db` per polarization, relative to the signal's own power.
pub fn add_awgn<T: Real, R: Rng>(signal: &DualPolSignal<T>, snr_db: f64, symbol_rate: f64, rng: &mut R) -> DualPolSignal<T> {
    let p = signal.power().to_f64().unwrap_or(0.0);
    add_awgn_with_reference(signal, snr_db, symbol_rate, p, rng)
}

/// As [`add_awgn`], with an explicit per-polarization reference power (for
/// instance the power of one channel inside a composite).
pub fn add_awgn_with_reference<T: Real, R: Rng>(
    signal: &DualPolSignal<T>,
    snr_db: f64,
    symbol_rate: f64,
    reference_power: f64,
    rng: &mut R,
) -> DualPolSignal<T> {
    if snr_db == f64::INFINITY {
        return signal.clone();
    }
    let oversampling = signal.sample_rate / symbol_rate;
    let var = real::<T>(reference_power * oversampling / 10f64.powf(snr_db / 10.0));
    signal.map_pols(|p| p.iter().map(|z| z + complex_gaussian(rng, var)).collect())
}

/// Wiener phase trajectory with increment variance `2 pi linewidth / fs`.
pub fn wiener_phase<R: Rng>(len: usize, linewidth: f64, sample_rate: f64, rng: &mut R) -> Vec<f64> {
    let sigma = (2.0 * std::f64::consts::PI * linewidth / sample_rate).sqrt();
    let mut phi = 0.0;
    (0..len)
        .map(|_| {
            let v = phi;
            phi += sigma * f64::standard_normal(rng);
            v
        })
        .collect()
}

/// Multiplies both polarizations by `exp(j phase[n])`.
pub fn apply_phase<T: Real>(signal: &DualPolSignal<T>, phase: &[f64]) -> DualPolSignal<T> {
    signal.map_pols(|p| p.iter().zip(phase).map(|(z, &ph)| z * cis::<T>(real(ph))).collect())
}

pub fn apply_phase_noise<T: Real, R: Rng>(signal: &DualPolSignal<T>, linewidth: f64, rng: &mut R) -> DualPolSignal<T> {
    if linewidth == 0.0 {
        return signal.clone();
    }
    let phase = wiener_phase(signal.len(), linewidth, signal.sample_rate, rng);
    apply_phase(signal, &phase)
}

/// Dispersion phase coefficient `pi lambda^2 D L / c` in s^2 for `H(f) = exp(-j k f^2)`.
pub fn dispersion_coefficient(length_km: f64, dispersion_ps_nm_km: f64) -> f64 {
    // D in s/m^2: ps/(nm km) = 1e-12 / (1e-9 * 1e3) = 1e-6
    let d = dispersion_ps_nm_km * 1e-6;
    let l = length_km * 1e3;
    std::f64::consts::PI * REFERENCE_WAVELENGTH * REFERENCE_WAVELENGTH * d * l / SPEED_OF_LIGHT
}

fn dispersion_filter<T: Real>(signal: &DualPolSignal<T>, k: f64) -> DualPolSignal<T> {
    if k == 0.0 {
        return signal.clone();
    }
    let fs = signal.sample_rate;
    let f_c = signal.center_offset;
    signal.map_pols(|p| {
        ops::filter_spectrum(p, fs, |f| {
            let fa = f + f_c;
            // reduce the phase in f64 before narrowing
            cis(real::<T>((-k * fa * fa).rem_euclid(2.0 * std::f64::consts::PI)))
        })
    })
}

/// All-pass fiber dispersion evaluated at absolute frequency (`center_offset` aware).
pub fn apply_cd<T: Real>(signal: &DualPolSignal<T>, length_km: f64, dispersion_ps_nm_km: f64) -> DualPolSignal<T> {
    dispersion_filter(signal, dispersion_coefficient(length_km, dispersion_ps_nm_km))
}

/// Exact inverse of [`apply_cd`].
pub fn invert_cd<T: Real>(signal: &DualPolSignal<T>, length_km: f64, dispersion_ps_nm_km: f64) -> DualPolSignal<T> {
    dispersion_filter(signal, -dispersion_coefficient(length_km, dispersion_ps_nm_km))
}

/// 2x2 Jones matrix, row major.
pub type Jones<T> = [[Complex<T>; 2]; 2];

/// Haar-like random element of SU(2).
pub fn random_jones<T: Real, R: Rng>(rng: &mut R) -> Jones<T> {
    let tau = 2.0 * std::f64::consts::PI;
    // cos(theta) distributed so that the Stokes vector is uniform on the sphere
    let c2: f64 = rng.random::<f64>();
    let theta = c2.sqrt().acos();
    let a = rng.random::<f64>() * tau;
    let b = rng.random::<f64>() * tau;
    let (c, s) = (real::<T>(theta.cos()), real::<T>(theta.sin()));
    let ea = cis::<T>(real(a));
    let eb = cis::<T>(real(b));
    [[ea * c, -eb * s], [eb.conj() * s, ea.conj() * c]]
}

pub fn is_unitary<T: Real>(m: &Jones<T>, tol: f64) -> bool {
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..2 {
                acc = acc + m[k][i].conj() * m[k][j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            let err = ((acc.re.to_f64().unwrap() - target).powi(2) + acc.im.to_f64().unwrap().powi(2)).sqrt();
            if err > tol {
                return false;
            }
        }
    }
    true
}

/// Applies `[x', y']^T = J [x, y]^T` to every sample pair.
pub fn apply_pol_rotation<T: Real>(signal: &DualPolSignal<T>, jones: &Jones<T>) -> Result<DualPolSignal<T>> {
    if !is_unitary(jones, 1e-9) {
        return config("polarization rotation matrix is not unitary");
    }
    let (x, y): (Vec<_>, Vec<_>) = signal
        .x
        .iter()
        .zip(&signal.y)
        .map(|(&a, &b)| (jones[0][0] * a + jones[0][1] * b, jones[1][0] * a + jones[1][1] * b))
        .unzip();
    Ok(DualPolSignal { x, y, sample_rate: signal.sample_rate, center_offset: signal.center_offset })
}

/// Number of quantizer levels for a fractional ENOB.
pub fn quantizer_levels(enob: f64) -> usize {
    2f64.powf(enob).round() as usize
}

fn quantize_rail<T: Real>(values: impl Iterator<Item = T>, sigma: f64, enob: f64, clip_sigma: f64) -> Vec<T> {
    let levels = quantizer_levels(enob) as f64;
    let clip = clip_sigma * sigma;
    let step = 2.0 * clip / levels;
    values
        .map(|v| {
            let v = v.to_f64().unwrap().clamp(-clip, clip);
            let k = ((v + clip) / step).floor().min(levels - 1.0);
            real::<T>(-clip + (k + 0.5) * step)
        })
        .collect()
}

fn rail_sigma<T: Real>(values: impl Iterator<Item = T>, n: usize) -> f64 {
    (values.map(|v| v.to_f64().unwrap().powi(2)).sum::<f64>() / n as f64).sqrt()
}

/// Hard clip at `clip_sigma` times the rail RMS, then uniform mid-rise
/// quantization with `round(2^enob)` levels, independently on the I and Q
/// rails of each polarization.
pub fn quantize<T: Real>(signal: &DualPolSignal<T>, enob: f64, clip_sigma: f64) -> DualPolSignal<T> {
    if enob == f64::INFINITY {
        return signal.clone();
    }
    signal.map_pols(|p| {
        let n = p.len();
        let si = rail_sigma(p.iter().map(|z| z.re), n);
        let sq = rail_sigma(p.iter().map(|z| z.im), n);
        let qi = quantize_rail(p.iter().map(|z| z.re), si, enob, clip_sigma);
        let qq = quantize_rail(p.iter().map(|z| z.im), sq, enob, clip_sigma);
        qi.into_iter().zip(qq).map(|(a, b)| Complex::new(a, b)).collect()
    })
}

/// Peak-to-average power ratio in dB over both polarizations.
pub fn papr_db<T: Real>(signal: &DualPolSignal<T>) -> f64 {
    let peak = signal
        .x
        .iter()
        .chain(&signal.y)
        .map(|z| z.norm_sqr().to_f64().unwrap())
        .fold(0.0, f64::max);
    10.0 * (peak / signal.power().to_f64().unwrap()).log10()
}
