//! SNR, GMI and spectral efficiency.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sigkit::ConstellationSpec;

/// Upper limit reported by [`estimate_snr`] for (nearly) noiseless input.
pub const SNR_CAP_DB: f64 = 50.0;

#[inline]
fn c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap())
}

/// Least-squares complex gain `g` minimizing `|r - g s|^2`.
pub fn ls_gain<T: Real>(received: &[Complex<T>], reference: &[Complex<T>]) -> Result<Complex<f64>> {
    if received.len() != reference.len() || received.is_empty() {
        return Err(Error::Input(format!("length mismatch: {} received, {} reference", received.len(), reference.len())));
    }
    let mut num = Complex::new(0.0, 0.0);
    let mut den = 0.0;
    for (r, s) in received.iter().zip(reference) {
        let s = c64(*s);
        num += c64(*r) * s.conj();
        den += s.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::Input("reference has zero power".into()));
    }
    Ok(num / den)
}

/// Signal and noise power after undoing the fitted gain.
fn snr_powers<T: Real>(received: &[Complex<T>], reference: &[Complex<T>]) -> Result<(f64, f64)> {
    let g = ls_gain(received, reference)?;
    if g.norm_sqr() == 0.0 {
        let ps = reference.iter().map(|s| c64(*s).norm_sqr()).sum::<f64>();
        return Ok((ps, f64::INFINITY));
    }
    let inv = 1.0 / g;
    let mut ps = 0.0;
    let mut pn = 0.0;
    for (r, s) in received.iter().zip(reference) {
        let s = c64(*s);
        ps += s.norm_sqr();
        pn += (c64(*r) * inv - s).norm_sqr();
    }
    let n = received.len() as f64;
    Ok((ps / n, pn / n))
}

fn to_db_capped(ps: f64, pn: f64) -> f64 {
    if pn <= 0.0 {
        return SNR_CAP_DB;
    }
    (10.0 * (ps / pn).log10()).min(SNR_CAP_DB)
}

/// `mean|s|^2 / mean|r/g - s|^2` in dB after a complex LS gain fit, capped
/// at [`SNR_CAP_DB`].
pub fn estimate_snr<T: Real>(received: &[Complex<T>], reference: &[Complex<T>]) -> Result<f64> {
    let (ps, pn) = snr_powers(received, reference)?;
    Ok(to_db_capped(ps, pn))
}

/// Per-polarization and power-averaged SNR in dB: `(x, y, combined)`.
pub fn estimate_snr_dual<T: Real>(received: [&[Complex<T>]; 2], reference: [&[Complex<T>]; 2]) -> Result<(f64, f64, f64)> {
    let (sx, nx) = snr_powers(received[0], reference[0])?;
    let (sy, ny) = snr_powers(received[1], reference[1])?;
    Ok((to_db_capped(sx, nx), to_db_capped(sy, ny), to_db_capped(sx + sy, nx + ny)))
}

fn log_sum_exp(v: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = v.collect();
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + vals.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Bit-metric GMI per 2D symbol with a circular Gaussian metric of variance
/// `noise_var` (total complex variance). `tx` holds constellation point
/// indices. Bitwise posteriors use exact sums over the labeled subsets.
/// The result is clamped to `[0, log2 M]`.
pub fn gmi_2d<T: Real>(received: &[Complex<T>], tx: &[usize], constellation: &ConstellationSpec<T>, noise_var: f64) -> Result<f64> {
    if received.len() != tx.len() {
        return Err(Error::Input(format!("{} received symbols but {} transmitted", received.len(), tx.len())));
    }
    if received.is_empty() {
        return Err(Error::Input("no symbols".into()));
    }
    if !(noise_var > 0.0) {
        return Err(Error::Input(format!("noise variance must be positive, got {noise_var}")));
    }
    let m = constellation.bits_per_symbol();
    let points: Vec<Complex<f64>> = constellation.points.iter().map(|p| c64(*p)).collect();
    let order = points.len();
    let mut metric = vec![0.0f64; order];
    let mut penalty = 0.0;
    for (r, &t) in received.iter().zip(tx) {
        if t >= order {
            return Err(Error::Input(format!("point index {t} outside {order}-point constellation")));
        }
        let r = c64(*r);
        for (mv, p) in metric.iter_mut().zip(&points) {
            *mv = -(r - p).norm_sqr() / noise_var;
        }
        let all = log_sum_exp(metric.iter().cloned());
        for b in 0..m {
            let bit = constellation.bit(t, b);
            let same = log_sum_exp((0..order).filter(|&a| constellation.bit(a, b) == bit).map(|a| metric[a]));
            penalty += all - same;
        }
    }
    let g = m as f64 - penalty / std::f64::consts::LN_2 / received.len() as f64;
    Ok(g.clamp(0.0, m as f64))
}

/// Noise variance `mean|r/g - s|^2` of gain-normalized symbols.
pub fn residual_variance<T: Real>(received: &[Complex<T>], reference: &[Complex<T>]) -> Result<f64> {
    Ok(snr_powers(received, reference)?.1)
}

/// Spectral efficiency in bits/s/Hz.
pub fn spectral_efficiency(gmi_4d: f64, symbol_rate: f64, spacing: f64, dsp_overhead: f64) -> f64 {
    gmi_4d * (symbol_rate / spacing) * (1.0 - dsp_overhead)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BatchStats {
    pub mean: f64,
    pub std: f64,
}

/// Sample mean and (n-1) standard deviation.
pub fn batch_stats(values: &[f64]) -> BatchStats {
    if values.is_empty() {
        return BatchStats::default();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    BatchStats { mean, std }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub snr_db_x: f64,
    pub snr_db_y: f64,
    pub snr_db: f64,
    pub gmi_bits_per_4d: f64,
    pub se_bits_per_s_hz: f64,
    pub symbol_count: usize,
}

/// Link parameters entering the SE conversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeParams {
    pub symbol_rate: f64,
    pub spacing: f64,
    pub dsp_overhead: f64,
}

/// Scores recovered dual-polarization payload symbols against the
/// transmitted point indices. Each polarization is gain-normalized by a
/// data-aided LS fit; the Gaussian metric uses the per-polarization residual
/// variance unless `noise_var` overrides it.
pub fn evaluate<T: Real>(
    received: [&[Complex<T>]; 2],
    tx: [&[usize]; 2],
    constellation: &ConstellationSpec<T>,
    noise_var: Option<[f64; 2]>,
    se: SeParams,
) -> Result<MetricsReport> {
    let mut snr = [0.0; 2];
    let mut sig = [0.0; 2];
    let mut noise = [0.0; 2];
    let mut gmi = 0.0;
    for p in 0..2 {
        let reference: Vec<Complex<T>> = tx[p].iter().map(|&i| constellation.points[i]).collect();
        let (ps, pn) = snr_powers(received[p], &reference)?;
        sig[p] = ps;
        noise[p] = pn;
        snr[p] = to_db_capped(ps, pn);
        let g = ls_gain(received[p], &reference)?;
        let inv = if g.norm_sqr() > 0.0 { 1.0 / g } else { Complex::new(1.0, 0.0) };
        let scaled: Vec<Complex<f64>> = received[p].iter().map(|r| c64(*r) * inv).collect();
        let var = match noise_var {
            Some(v) => v[p],
            // floor keeps the metric finite at the SNR cap
            None => pn.max(ps * 10f64.powf(-SNR_CAP_DB / 10.0)),
        };
        let c64const = ConstellationSpec::<f64> {
            order: constellation.order,
            points: constellation.points.iter().map(|z| c64(*z)).collect(),
            labels: constellation.labels.clone(),
        };
        gmi += gmi_2d(&scaled, tx[p], &c64const, var)?;
    }
    Ok(MetricsReport {
        snr_db_x: snr[0],
        snr_db_y: snr[1],
        snr_db: to_db_capped(sig[0] + sig[1], noise[0] + noise[1]),
        gmi_bits_per_4d: gmi,
        se_bits_per_s_hz: spectral_efficiency(gmi, se.symbol_rate, se.spacing, se.dsp_overhead),
        symbol_count: received[0].len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use crate::scalar::{cis, complex_gaussian};
    use crate::sigkit::qam_constellation;
    use rand::Rng;

    type C = Complex<f64>;

    /// 4D AWGN GMI of Gray 64QAM by Gauss-Hermite quadrature
    /// (tests/oracles/gmi_awgn.py), `(snr_db, gmi)`.
    const GMI_64QAM: [(f64, f64); 4] = [(14.0, 8.769803), (18.0, 10.920134), (20.0, 11.602924), (22.0, 11.914594)];

    fn awgn_symbols(n: usize, snr_db: f64, seed: u64) -> ([Vec<usize>; 2], [Vec<C>; 2], [Vec<C>; 2]) {
        let c = qam_constellation::<f64>(64).unwrap();
        let mut rng = SeedStream::new(seed).substream("metrics");
        let var = 10f64.powf(-snr_db / 10.0);
        let tx: [Vec<usize>; 2] = [0, 1].map(|_| (0..n).map(|_| rng.random_range(0..64)).collect());
        let clean = [0, 1].map(|p| tx[p].iter().map(|&i| c.points[i]).collect::<Vec<C>>());
        let noisy = [0, 1].map(|p| clean[p].iter().map(|s| s + complex_gaussian(&mut rng, var)).collect::<Vec<C>>());
        (tx, clean, noisy)
    }

    fn report(rx: &[Vec<C>; 2], tx: &[Vec<usize>; 2]) -> MetricsReport {
        let c = qam_constellation::<f64>(64).unwrap();
        let se = SeParams { symbol_rate: 25e9, spacing: 25e9, dsp_overhead: 0.0 };
        evaluate([&rx[0], &rx[1]], [&tx[0], &tx[1]], &c, None, se).unwrap()
    }

    #[test]
    fn snr_of_known_awgn() {
        let (_, clean, noisy) = awgn_symbols(100_000, 20.0, 1);
        let s = estimate_snr(&noisy[0], &clean[0]).unwrap();
        assert!((s - 20.0).abs() < 0.1, "{s}");
        let (x, y, both) = estimate_snr_dual([&noisy[0], &noisy[1]], [&clean[0], &clean[1]]).unwrap();
        assert!((x - 20.0).abs() < 0.1 && (y - 20.0).abs() < 0.1 && (both - 20.0).abs() < 0.1);
    }

    #[test]
    fn snr_cap_and_gain_invariance() {
        let (_, clean, noisy) = awgn_symbols(10_000, 15.0, 2);
        assert_eq!(estimate_snr(&clean[0], &clean[0]).unwrap(), SNR_CAP_DB);
        let base = estimate_snr(&noisy[0], &clean[0]).unwrap();
        for g in [C::new(2.0, 0.0), C::new(0.1, -0.7)] {
            let scaled: Vec<C> = noisy[0].iter().map(|z| z * g).collect();
            assert!((estimate_snr(&scaled, &clean[0]).unwrap() - base).abs() < 1e-9);
        }
        assert!(estimate_snr(&noisy[0], &vec![C::new(0.0, 0.0); 10_000]).is_err());
        assert!(estimate_snr(&noisy[0][..10], &clean[0][..9]).is_err());
    }

    #[test]
    fn labels_are_the_gray_product_the_oracle_assumes() {
        let c = qam_constellation::<f64>(64).unwrap();
        let norm = 42f64.sqrt();
        for (p, &l) in c.points.iter().zip(&c.labels) {
            let i = ((p.re * norm + 7.0) / 2.0).round() as u32;
            let q = ((p.im * norm + 7.0) / 2.0).round() as u32;
            assert_eq!(l, ((i ^ (i >> 1)) << 3) | (q ^ (q >> 1)));
        }
    }

    #[test]
    fn gmi_saturates_and_is_bounded() {
        let (tx, clean, _) = awgn_symbols(20_000, 0.0, 3);
        let r = report(&clean, &tx);
        assert!((r.gmi_bits_per_4d - 12.0).abs() < 1e-3);
        assert!(r.snr_db >= 50.0);
        let mut rng = SeedStream::new(3).substream("garbage");
        let junk = [0, 1].map(|_| (0..20_000).map(|_| complex_gaussian(&mut rng, 1.0)).collect::<Vec<C>>());
        let r = report(&junk, &tx);
        assert!((0.0..=12.0).contains(&r.gmi_bits_per_4d));
    }

    #[test]
    fn gmi_matches_the_quadrature_oracle() {
        for (k, &(snr, want)) in GMI_64QAM.iter().enumerate() {
            let (tx, _, noisy) = awgn_symbols(200_000, snr, 10 + k as u64);
            let r = report(&noisy, &tx);
            assert!((r.gmi_bits_per_4d - want).abs() < 0.05, "{snr} dB: {} vs {want}", r.gmi_bits_per_4d);
            // the estimated SNR predicts the measured GMI through the AWGN curve
            assert!((r.snr_db - snr).abs() < 0.05);
        }
    }

    #[test]
    fn gmi_is_phase_invariant() {
        let c = qam_constellation::<f64>(64).unwrap();
        let (tx, _, noisy) = awgn_symbols(20_000, 16.0, 4);
        let var = 10f64.powf(-1.6);
        let base = gmi_2d(&noisy[0], &tx[0], &c, var).unwrap();
        let rot = cis(0.7);
        let turned = ConstellationSpec { points: c.points.iter().map(|p| p * rot).collect(), ..c.clone() };
        let rx: Vec<C> = noisy[0].iter().map(|z| z * rot).collect();
        assert!((gmi_2d(&rx, &tx[0], &turned, var).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn gmi_decreases_with_added_noise() {
        let c = qam_constellation::<f64>(64).unwrap();
        let (tx, clean, _) = awgn_symbols(20_000, 0.0, 5);
        let mut rng = SeedStream::new(5).substream("paired");
        let unit: Vec<C> = (0..20_000).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let mut last = f64::INFINITY;
        for snr in [30.0, 24.0, 20.0, 16.0, 12.0] {
            let var = 10f64.powf(-snr / 10.0);
            let rx: Vec<C> = clean[0].iter().zip(&unit).map(|(s, n)| s + n * var.sqrt()).collect();
            let g = gmi_2d(&rx, &tx[0], &c, var).unwrap();
            assert!(g <= last);
            last = g;
        }
        assert!(gmi_2d(&clean[0], &tx[0][..10], &c, 0.1).is_err());
        assert!(gmi_2d(&clean[0], &tx[0], &c, 0.0).is_err());
    }

    #[test]
    fn spectral_efficiency_arithmetic() {
        assert!((spectral_efficiency(12.0, 25e9, 25e9, 0.023) - 11.724).abs() < 1e-12);
        let oh = 0.023;
        assert!((spectral_efficiency(8.0, 25.5e9, 25e9, oh) - 8.16 * (1.0 - oh)).abs() < 1e-12);
        let r = spectral_efficiency(10.0, 24e9, 25e9, oh) / spectral_efficiency(10.0, 25e9, 25e9, oh);
        assert!((r - 24.0 / 25.0).abs() < 1e-15);
    }

    #[test]
    fn report_is_self_consistent() {
        let (tx, _, noisy) = awgn_symbols(10_000, 18.0, 6);
        let r = report(&noisy, &tx);
        assert_eq!(r.symbol_count, 10_000);
        assert!((r.se_bits_per_s_hz - spectral_efficiency(r.gmi_bits_per_4d, 25e9, 25e9, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn batch_statistics() {
        let s = batch_stats(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(batch_stats(&[]), BatchStats::default());
    }
}
