use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{mean_power, Real};

/// Dual-polarization complex baseband waveform.
///
/// `center_offset` is the absolute frequency (relative to the superchannel
/// center) that sits at DC of this buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPolSignal<T: Real> {
    pub x: Vec<Complex<T>>,
    pub y: Vec<Complex<T>>,
    pub sample_rate: f64,
    pub center_offset: f64,
}

impl<T: Real> DualPolSignal<T> {
    /// Builds a signal and checks every invariant of the type.
    pub fn new(x: Vec<Complex<T>>, y: Vec<Complex<T>>, sample_rate: f64, center_offset: f64) -> Result<Self> {
        let s = Self { x, y, sample_rate, center_offset };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.is_empty() || self.x.len() != self.y.len() {
            return Err(Error::Input(format!(
                "polarization lengths must be equal and non-zero (x={}, y={})",
                self.x.len(),
                self.y.len()
            )));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Input(format!("sample rate must be positive, got {}", self.sample_rate)));
        }
        if !self.center_offset.is_finite() {
            return Err(Error::Input("center offset must be finite".into()));
        }
        let finite = |z: &Complex<T>| z.re.is_finite() && z.im.is_finite();
        if !self.x.iter().all(finite) || !self.y.iter().all(finite) {
            return Err(Error::Input("signal contains non-finite samples".into()));
        }
        Ok(())
    }

    pub fn zeros(len: usize, sample_rate: f64, center_offset: f64) -> Self {
        Self {
            x: vec![Complex::new(T::zero(), T::zero()); len],
            y: vec![Complex::new(T::zero(), T::zero()); len],
            sample_rate,
            center_offset,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Mean power per polarization, averaged over both.
    pub fn power(&self) -> T {
        (mean_power(&self.x) + mean_power(&self.y)) / crate::scalar::real(2.0)
    }

    pub fn pols(&self) -> [&[Complex<T>]; 2] {
        [&self.x, &self.y]
    }

    /// Applies `f` to both polarization buffers, keeping metadata.
    pub fn map_pols<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&[Complex<T>]) -> Vec<Complex<T>>,
    {
        Self {
            x: f(&self.x),
            y: f(&self.y),
            sample_rate: self.sample_rate,
            center_offset: self.center_offset,
        }
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        self.map_pols(|p| p.iter().map(|z| z * k).collect())
    }

    /// Sample-wise sum; both signals must share length and rate.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() || self.sample_rate != other.sample_rate {
            return Err(Error::Input("cannot add signals of different length or rate".into()));
        }
        Ok(Self {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect(),
            sample_rate: self.sample_rate,
            center_offset: self.center_offset,
        })
    }

    /// Converts the scalar type (for example to run a sweep in `f32`).
    pub fn cast<U: Real>(&self) -> DualPolSignal<U> {
        let conv = |p: &[Complex<T>]| -> Vec<Complex<U>> {
            p.iter()
                .map(|z| Complex::new(U::from(z.re).unwrap(), U::from(z.im).unwrap()))
                .collect()
        };
        DualPolSignal { x: conv(&self.x), y: conv(&self.y), sample_rate: self.sample_rate, center_offset: self.center_offset }
    }
}
