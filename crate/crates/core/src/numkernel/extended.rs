//! Software floating point with a run-level bit count, backed by `astro-float`.
//!
//! The precision is fixed the first time it is needed, either explicitly via
//! [`set_precision`] or implicitly at [`DEFAULT_BITS`]. Requesting a different
//! bit count afterwards is an error, so a run never mixes precisions.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

use crate::error::{Error, Result};
use crate::numkernel::scalar::Real;

pub const DEFAULT_BITS: usize = 256;
const WORD_BITS: usize = 64;
const RM: RoundingMode = RoundingMode::ToEven;

static BITS: OnceLock<usize> = OnceLock::new();

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Fixes the precision of every [`Ext`] value in this process.
///
/// The bit count is rounded up to a multiple of 64. Calling again with a
/// bit count that rounds to the active one is a no-op.
pub fn set_precision(bits: usize) -> Result<usize> {
    if bits < 2 * WORD_BITS {
        return Err(Error::InvalidParameters(format!(
            "extended precision needs at least {} bits, got {bits}",
            2 * WORD_BITS
        )));
    }
    let rounded = bits.div_ceil(WORD_BITS) * WORD_BITS;
    let active = *BITS.get_or_init(|| rounded);
    if active != rounded {
        return Err(Error::PrecisionMismatch {
            requested: rounded,
            active,
        });
    }
    Ok(active)
}

/// Active bit count (fixes the default if nothing was configured yet).
pub fn precision() -> usize {
    *BITS.get_or_init(|| DEFAULT_BITS)
}

/// Extended-precision real number.
#[derive(Clone)]
pub struct Ext(BigFloat);

impl Ext {
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
        CONSTS.with(|cc| f(&mut cc.borrow_mut()))
    }
}

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ext({})", self.0)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl PartialEq for Ext {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! ext_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident) => {
        impl $tr for Ext {
            type Output = Ext;
            fn $method(self, rhs: Ext) -> Ext {
                Ext(self.0.$method(&rhs.0, precision(), RM))
            }
        }

        impl $assign_tr for Ext {
            fn $assign(&mut self, rhs: Ext) {
                self.0 = self.0.$method(&rhs.0, precision(), RM);
            }
        }
    };
}

ext_binop!(Add, add, AddAssign, add_assign);
ext_binop!(Sub, sub, SubAssign, sub_assign);
ext_binop!(Mul, mul, MulAssign, mul_assign);
ext_binop!(Div, div, DivAssign, div_assign);

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext(self.0.neg())
    }
}

impl Real for Ext {
    fn from_f64(v: f64) -> Self {
        Ext(BigFloat::from_f64(v, precision()))
    }

    fn from_i64(n: i64) -> Self {
        Ext(BigFloat::from_i64(n, precision()))
    }

    fn from_usize(n: usize) -> Self {
        Ext(BigFloat::from_u64(n as u64, precision()))
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        let Some((words, _, sign, exponent, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        // normalized mantissa: value = 0.m * 2^e with the top word most significant
        let top = words.last().copied().unwrap_or(0) as f64;
        let mag = top * 2f64.powi(exponent - WORD_BITS as i32);
        match sign {
            Sign::Neg => -mag,
            Sign::Pos => mag,
        }
    }

    fn epsilon() -> Self {
        let p = precision();
        Ext(BigFloat::from_f64(0.5, p).powi(p - 1, p, RM))
    }

    fn mantissa_bits() -> u32 {
        precision() as u32
    }

    fn abs(&self) -> Self {
        Ext(self.0.abs())
    }

    fn sqrt(&self) -> Self {
        Ext(self.0.sqrt(precision(), RM))
    }

    fn exp(&self) -> Self {
        Ext(Self::with_consts(|cc| self.0.exp(precision(), RM, cc)))
    }

    fn ln(&self) -> Self {
        Ext(Self::with_consts(|cc| self.0.ln(precision(), RM, cc)))
    }

    fn sin(&self) -> Self {
        Ext(Self::with_consts(|cc| self.0.sin(precision(), RM, cc)))
    }

    fn cos(&self) -> Self {
        Ext(Self::with_consts(|cc| self.0.cos(precision(), RM, cc)))
    }

    fn pi() -> Self {
        Ext(Self::with_consts(|cc| cc.pi(precision(), RM)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_tiny_increment() {
        set_precision(DEFAULT_BITS).unwrap();
        let one = Ext::one();
        let tiny = Ext::from_f64(2f64.powi(-200));
        assert!(one.clone() + tiny != one);
    }

    #[test]
    fn mixing_precisions_is_rejected() {
        set_precision(DEFAULT_BITS).unwrap();
        assert!(matches!(
            set_precision(512),
            Err(Error::PrecisionMismatch { .. })
        ));
        assert!(set_precision(200).is_ok()); // rounds to 256
    }

    #[test]
    fn conversions_round_trip() {
        for v in [1.0, -0.375, 3.0e-17, 12345.678, -2.5e10] {
            assert_eq!(Ext::from_f64(v).to_f64(), v);
        }
        let third = Ext::ratio(1, 3);
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn transcendental_functions() {
        let x = Ext::from_f64(0.7);
        let (s, c) = (x.sin(), x.cos());
        let one = s.clone() * s + c.clone() * c;
        assert!((one - Ext::one()).abs() < Ext::from_f64(1e-70));
        assert!((x.exp().ln() - x).abs() < Ext::from_f64(1e-70));
        assert!((Ext::pi().to_f64() - std::f64::consts::PI).abs() < 1e-15);
        assert!(Ext::epsilon() < Ext::from_f64(1e-70));
    }
}
