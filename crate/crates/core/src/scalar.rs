//! Floating point abstraction shared by every DSP stage.
//!
//! All signal processing is written against [`Real`], so the same code runs
//! in `f32` (fast sweeps) or `f64` (reference accuracy). Complex samples use
//! [`num_complex::Complex`].
//!
//! Sign convention used everywhere in the crate: a positive frequency `f` is a
//! counterclockwise rotation `exp(+j 2 pi f t)`.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftNum;

/// Real scalar type: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + Debug + Send + Sync + 'static
{
    /// Draw one standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Draw one uniform variate in `[0, 1)`.
    fn uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Real for $f {
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
            fn uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$f>()
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Lossless-enough conversion of an `f64` constant into `T`.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Conversion of a count or index into `T`.
#[inline]
pub fn real_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in scalar type")
}

/// `exp(j * phase)`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// Mean of `|z|^2`.
pub fn mean_power<T: Real>(samples: &[Complex<T>]) -> T {
    if samples.is_empty() {
        return T::zero();
    }
    let acc = samples.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    acc / real_usize(samples.len())
}

/// Circular complex Gaussian sample with total variance `var` (`var/2` per rail).
#[inline]
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, var: T) -> Complex<T> {
    let s = (var / real(2.0)).sqrt();
    Complex::new(T::standard_normal(rng) * s, T::standard_normal(rng) * s)
}
