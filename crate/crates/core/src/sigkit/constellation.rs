//! Gray-labeled unit-energy QAM alphabets.

use num_complex::Complex;

use crate::error::{config, Result};
use crate::scalar::{real, Real};

/// QAM alphabet with its bit labels. `labels[k]` is the label of `points[k]`
/// packed MSB-first into the low `bits_per_symbol` bits.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstellationSpec<T: Real> {
    pub order: usize,
    pub points: Vec<Complex<T>>,
    pub labels: Vec<u32>,
}

fn gray(n: u32) -> u32 {
    n ^ (n >> 1)
}

/// Gray-coded PAM amplitudes `-(L-1), .., L-1` paired with their labels.
fn gray_pam(levels: u32) -> Vec<(f64, u32)> {
    (0..levels)
        .map(|i| (2.0 * i as f64 - (levels as f64 - 1.0), gray(i)))
        .collect()
}

/// Returns the 16-, 32- or 64-point constellation.
///
/// Square orders use independent Gray codes on I (high bits) and Q (low
/// bits). 32-QAM is the 6x6 cross built by folding the outer columns of an
/// 8x4 Gray rectangle onto the top and bottom arms, which leaves at most two
/// differing bits between nearest neighbors.
pub fn qam_constellation<T: Real>(order: usize) -> Result<ConstellationSpec<T>> {
    let raw: Vec<(f64, f64, u32)> = match order {
        16 | 64 => {
            let side = (order as f64).sqrt() as u32;
            let half_bits = side.trailing_zeros();
            let pam = gray_pam(side);
            let mut v = Vec::with_capacity(order);
            for &(i, li) in &pam {
                for &(q, lq) in &pam {
                    v.push((i, q, (li << half_bits) | lq));
                }
            }
            v
        }
        32 => {
            let pam_i = gray_pam(8);
            let pam_q = gray_pam(4);
            let mut v = Vec::with_capacity(32);
            for &(i, li) in &pam_i {
                for &(q, lq) in &pam_q {
                    let label = (li << 2) | lq;
                    let (pi, pq) = if i.abs() == 7.0 {
                        // (+-7, q) -> (sign(i) * (|q| == 3 ? 3 : 1), sign(q) * 5)
                        let x = if q.abs() == 3.0 { 3.0 } else { 1.0 };
                        (x * i.signum(), 5.0 * q.signum())
                    } else {
                        (i, q)
                    };
                    v.push((pi, pq, label));
                }
            }
            v
        }
        other => return config(format!("unsupported QAM order {other}; expected 16, 32 or 64")),
    };

    let energy = raw.iter().map(|(i, q, _)| i * i + q * q).sum::<f64>() / raw.len() as f64;
    let norm = energy.sqrt();
    let points = raw.iter().map(|(i, q, _)| Complex::new(real::<T>(i / norm), real::<T>(q / norm))).collect();
    let labels = raw.iter().map(|r| r.2).collect();
    Ok(ConstellationSpec { order, points, labels })
}

impl<T: Real> ConstellationSpec<T> {
    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Index of the point nearest to `z`.
    pub fn nearest(&self, z: Complex<T>) -> usize {
        let mut best = 0;
        let mut best_d = T::infinity();
        for (k, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    pub fn decide(&self, z: Complex<T>) -> Complex<T> {
        self.points[self.nearest(z)]
    }

    /// Bit `b` (0 = MSB) of the label of point `k`.
    #[inline]
    pub fn bit(&self, k: usize, b: usize) -> u8 {
        ((self.labels[k] >> (self.bits_per_symbol() - 1 - b)) & 1) as u8
    }

    /// Point index carrying `label`.
    pub fn index_of_label(&self, label: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }
}
