//! Real scalar contract shared by every numerical routine in the crate.
//!
//! All algorithms are generic over [`Real`]. The default instantiation is
//! `f64`; the `extended` feature adds a software float with a run-level
//! bit count (see [`crate::numkernel::extended`]).

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Arithmetic contract for the scalar type of a run.
///
/// Values are `Clone` rather than `Copy` so that heap-backed
/// multi-precision types can implement the trait.
pub trait Real:
    Clone
    + Debug
    + Display
    + PartialOrd
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Machine epsilon of the active precision (spacing of values near 1).
    fn epsilon() -> Self;
    /// Number of mantissa bits of the active precision.
    fn mantissa_bits() -> u32;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn pi() -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Exact for |n| < 2^53.
    fn from_i64(n: i64) -> Self {
        Self::from_f64(n as f64)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    /// `num / den` rounded once in the active precision.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc *= self.clone();
        }
        acc
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn epsilon() -> Self {
        f64::EPSILON
    }

    fn mantissa_bits() -> u32 {
        f64::MANTISSA_DIGITS
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn sin(&self) -> Self {
        f64::sin(*self)
    }

    fn cos(&self) -> Self {
        f64::cos(*self)
    }

    fn pi() -> Self {
        std::f64::consts::PI
    }

    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
}

/// Max-norm of a vector.
pub fn norm_inf<R: Real>(v: &[R]) -> R {
    v.iter()
        .fold(R::zero(), |acc, x| R::max_of(acc, x.abs()))
}

/// Euclidean norm of a vector.
pub fn norm2<R: Real>(v: &[R]) -> R {
    v.iter()
        .fold(R::zero(), |acc, x| acc + x.clone() * x.clone())
        .sqrt()
}

/// `n!` in the active precision.
pub fn factorial<R: Real>(n: usize) -> R {
    (1..=n).fold(R::one(), |acc, m| acc * R::from_usize(m))
}

/// Binomial coefficient `C(n, m)` in the active precision.
pub fn binomial<R: Real>(n: usize, m: usize) -> R {
    if m > n {
        return R::zero();
    }
    let m = m.min(n - m);
    let mut acc = R::one();
    for i in 0..m {
        acc = acc * R::from_usize(n - i) / R::from_usize(i + 1);
    }
    acc
}
