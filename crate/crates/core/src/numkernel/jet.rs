//! Truncated univariate Taylor series.
//!
//! A `Jet` of order `p` stores `c_0..c_p` with `x(t0 + s) = sum c_j s^j + O(s^{p+1})`,
//! so the `j`-th derivative is `j! c_j`. Arithmetic between jets of different
//! order panics through the operator traits; the `checked_*` methods return
//! [`Error::OrderMismatch`] instead.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::numkernel::scalar::{factorial, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<R> {
    coeffs: Vec<R>,
}

impl<R: Real> Jet<R> {
    pub fn from_coeffs(coeffs: Vec<R>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(value: R, order: usize) -> Self {
        let mut coeffs = vec![R::zero(); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The independent variable expanded at `t0`.
    pub fn variable(t0: R, order: usize) -> Self {
        let mut jet = Self::constant(t0, order);
        if order >= 1 {
            jet.coeffs[1] = R::one();
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> R {
        self.coeffs.get(j).cloned().unwrap_or_else(R::zero)
    }

    pub fn value(&self) -> R {
        self.coeffs[0].clone()
    }

    /// `j`-th derivative at the expansion point (zero beyond the order).
    pub fn derivative(&self, j: usize) -> R {
        self.coeff(j) * factorial::<R>(j)
    }

    /// Jet of the derivative, one order lower.
    pub fn differentiate(&self) -> Self {
        if self.order() == 0 {
            return Self::constant(R::zero(), 0);
        }
        Self {
            coeffs: (1..self.coeffs.len())
                .map(|j| self.coeffs[j].clone() * R::from_usize(j))
                .collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, R::zero());
        Self { coeffs }
    }

    pub fn scale(&self, factor: &R) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.clone() * factor.clone())
                .collect(),
        }
    }

    pub fn add_scalar(&self, value: &R) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += value.clone();
        out
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() == other.order() {
            Ok(())
        } else {
            Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    /// Truncated Cauchy product.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.coeffs.len();
        let coeffs = (0..n)
            .map(|k| {
                (0..=k).fold(R::zero(), |acc, j| {
                    acc + self.coeffs[j].clone() * other.coeffs[k - j].clone()
                })
            })
            .collect();
        Ok(Self { coeffs })
    }

    /// Series quotient; fails when the denominator vanishes at the expansion point.
    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let b0 = other.coeffs[0].clone();
        if b0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.coeffs.len();
        let mut q: Vec<R> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc -= other.coeffs[j].clone() * q[k - j].clone();
            }
            q.push(acc / b0.clone());
        }
        Ok(Self { coeffs: q })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::constant(R::one(), self.order()).checked_div(self)
    }

    pub fn exp(&self) -> Self {
        // e' = a' e  =>  k e_k = sum_{j=1..k} j a_j e_{k-j}
        let n = self.coeffs.len();
        let mut e: Vec<R> = Vec::with_capacity(n);
        e.push(self.coeffs[0].exp());
        for k in 1..n {
            let mut acc = R::zero();
            for j in 1..=k {
                acc += R::from_usize(j) * self.coeffs[j].clone() * e[k - j].clone();
            }
            e.push(acc / R::from_usize(k));
        }
        Self { coeffs: e }
    }

    /// Returns `(sin x, cos x)`.
    pub fn sin_cos(&self) -> (Self, Self) {
        // s' = a' c, c' = -a' s
        let n = self.coeffs.len();
        let mut s: Vec<R> = Vec::with_capacity(n);
        let mut c: Vec<R> = Vec::with_capacity(n);
        s.push(self.coeffs[0].sin());
        c.push(self.coeffs[0].cos());
        for k in 1..n {
            let mut acc_s = R::zero();
            let mut acc_c = R::zero();
            for j in 1..=k {
                let ja = R::from_usize(j) * self.coeffs[j].clone();
                acc_s += ja.clone() * c[k - j].clone();
                acc_c -= ja * s[k - j].clone();
            }
            s.push(acc_s / R::from_usize(k));
            c.push(acc_c / R::from_usize(k));
        }
        (Self { coeffs: s }, Self { coeffs: c })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<R: Real> $tr for Jet<R> {
            type Output = Jet<R>;
            fn $method(self, rhs: Jet<R>) -> Jet<R> {
                self.$checked(&rhs).expect("jet order mismatch")
            }
        }

        impl<'a, R: Real> $tr<&'a Jet<R>> for &'a Jet<R> {
            type Output = Jet<R>;
            fn $method(self, rhs: &'a Jet<R>) -> Jet<R> {
                self.$checked(rhs).expect("jet order mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl<R: Real> std::ops::Div for Jet<R> {
    type Output = Jet<R>;
    fn div(self, rhs: Jet<R>) -> Jet<R> {
        self.checked_div(&rhs).expect("jet division failed")
    }
}

impl<'a, R: Real> std::ops::Div<&'a Jet<R>> for &'a Jet<R> {
    type Output = Jet<R>;
    fn div(self, rhs: &'a Jet<R>) -> Jet<R> {
        self.checked_div(rhs).expect("jet division failed")
    }
}

impl<R: Real> Neg for Jet<R> {
    type Output = Jet<R>;
    fn neg(self) -> Jet<R> {
        Jet {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl<R: Real> Neg for &Jet<R> {
    type Output = Jet<R>;
    fn neg(self) -> Jet<R> {
        -(self.clone())
    }
}
