//! The floating-point abstraction every kernel in the crate is written against.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar: `f32` or `f64`.
///
/// Besides the usual float arithmetic this carries the two special functions the
/// probability kernels need (log-gamma) and the two primitive random draws the
/// samplers need (standard normal, chi-square).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// `ln Γ(x)` for `x > 0`.
    fn lgamma(self) -> Self;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn chi_squared<R: Rng + ?Sized>(rng: &mut R, dof: Self) -> Self;

    /// Uniform draw on `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Ascending factorial in log-space: `ln (x)_n = ln Γ(x+n) − ln Γ(x)`.
    #[inline]
    fn ln_rising(self, n: usize) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            (self + Self::of_usize(n)).lgamma() - self.lgamma()
        }
    }
}

impl Real for f64 {
    #[inline]
    fn lgamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self)
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn chi_squared<R: Rng + ?Sized>(rng: &mut R, dof: Self) -> Self {
        ChiSquared::new(dof).expect("positive dof").sample(rng)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }
}

impl Real for f32 {
    #[inline]
    fn lgamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self as f64) as f32
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn chi_squared<R: Rng + ?Sized>(rng: &mut R, dof: Self) -> Self {
        ChiSquared::new(dof).expect("positive dof").sample(rng)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }
}

/// `ln Σ exp(x_i)` with the usual max shift; returns `-inf` for an empty or all `-inf` slice.
pub fn log_sum_exp<T: Real>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + values.iter().map(|&v| (v - max).exp()).sum::<T>().ln()
}

/// `ln n!` via log-gamma.
#[inline]
pub fn ln_factorial<T: Real>(n: usize) -> T {
    T::of_usize(n + 1).lgamma()
}

/// `ln C(n, k)`.
pub fn ln_binomial<T: Real>(n: usize, k: usize) -> T {
    debug_assert!(k <= n);
    ln_factorial::<T>(n) - ln_factorial::<T>(k) - ln_factorial::<T>(n - k)
}
