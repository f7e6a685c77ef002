//! Pilot-aided carrier phase estimation.

use num_complex::Complex;

use crate::scalar::{cis, real, Real};
use crate::txchain::FrameMap;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CpeDiagnostics {
    /// Unwrapped phase estimate at every CPE pilot.
    pub pilot_phases: Vec<f64>,
    /// Pilot numbers where the wrapped jump from the previous pilot exceeded pi/2.
    pub cycle_slips: Vec<usize>,
}

/// Removes the carrier phase tracked on the CPE pilots.
///
/// Each pilot contributes `sum_p r_p conj(s_p)`; the phase at a pilot is the
/// argument of the sum over `window` neighboring pilots. Phases are unwrapped
/// and linearly interpolated between pilots (held constant outside). Only the
/// phase is touched, magnitudes are preserved.
pub fn cpe<T: Real>(
    symbols: &[Vec<Complex<T>>; 2],
    cpe_pilots: &[Vec<Complex<T>>; 2],
    map: &FrameMap,
    window: usize,
) -> ([Vec<Complex<T>>; 2], CpeDiagnostics) {
    let idx = &map.cpe_pilot_indices;
    let mut diag = CpeDiagnostics::default();
    if idx.is_empty() {
        return (symbols.clone(), diag);
    }
    let raw: Vec<Complex<f64>> = idx
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let mut a = Complex::new(0.0, 0.0);
            for p in 0..2 {
                let z = symbols[p][k] * cpe_pilots[p][j].conj();
                a += Complex::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
            }
            a
        })
        .collect();
    let half = window / 2;
    let tau = 2.0 * std::f64::consts::PI;
    let mut prev: Option<f64> = None;
    for j in 0..raw.len() {
        let lo = j.saturating_sub(half);
        let hi = (j + half + 1).min(raw.len());
        let s: Complex<f64> = raw[lo..hi].iter().sum();
        let wrapped = s.arg();
        let phase = match prev {
            None => wrapped,
            Some(p) => {
                let d = (wrapped - p).rem_euclid(tau);
                let d = if d > std::f64::consts::PI { d - tau } else { d };
                if d.abs() > std::f64::consts::FRAC_PI_2 {
                    diag.cycle_slips.push(j);
                }
                p + d
            }
        };
        diag.pilot_phases.push(phase);
        prev = Some(phase);
    }
    let phases = &diag.pilot_phases;
    let n = symbols[0].len();
    let mut out = symbols.clone();
    let mut j = 0;
    for k in 0..n {
        while j + 1 < idx.len() && idx[j + 1] <= k {
            j += 1;
        }
        let ph = if k <= idx[0] {
            phases[0]
        } else if j + 1 >= idx.len() {
            phases[idx.len() - 1]
        } else {
            let t = (k - idx[j]) as f64 / (idx[j + 1] - idx[j]) as f64;
            phases[j] + t * (phases[j + 1] - phases[j])
        };
        let r = cis::<T>(real(-ph));
        out[0][k] = out[0][k] * r;
        out[1][k] = out[1][k] * r;
    }
    (out, diag)
}
