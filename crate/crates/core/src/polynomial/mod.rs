//! Vector-valued polynomials on a time interval, stored as Legendre series on
//! the reference interval [-1, 1], plus Hermite interpolation and the
//! postprocessing polynomials.

pub mod hermite;
pub mod legendre;

pub use hermite::{hermite_interpolate, theta_polynomial, HermiteBasis, HermiteData, HermiteSpec, Normalization};

use crate::error::{Error, Result};
use crate::numkernel::{factorial, Jet, Real};

/// A time-dependent vector quantity that can report Taylor coefficients.
///
/// `taylor(t, p)` returns one jet of order `p` per component, expanded at `t`.
/// Piecewise objects return one-sided expansions as documented by the
/// implementor.
pub trait TimeFunction<R: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn taylor(&self, t: &R, order: usize) -> Result<Vec<Jet<R>>>;

    /// Highest derivative order available, `None` for smooth functions.
    fn smoothness(&self) -> Option<usize> {
        None
    }

    fn value(&self, t: &R) -> Result<Vec<R>> {
        Ok(self.taylor(t, 0)?.into_iter().map(|j| j.value()).collect())
    }

    /// `j`-th derivative at `t`.
    fn derivative(&self, t: &R, j: usize) -> Result<Vec<R>> {
        Ok(self
            .taylor(t, j)?
            .into_iter()
            .map(|jet| jet.derivative(j))
            .collect())
    }
}

/// Which end of an interval a one-sided quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Polynomial of degree `s` on `[a, b]` with values in `R^d`.
///
/// Coefficients are stored per component in the Legendre basis of the
/// reference variable `x = (2t - a - b) / (b - a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPolynomial<R> {
    a: R,
    b: R,
    coeffs: Vec<Vec<R>>,
}

impl<R: Real> LocalPolynomial<R> {
    pub fn new(a: R, b: R, coeffs: Vec<Vec<R>>) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidParameters(format!(
                "interval needs a < b, got [{a}, {b}]"
            )));
        }
        let len = coeffs.first().map_or(0, Vec::len);
        if len == 0 || coeffs.iter().any(|c| c.len() != len) {
            return Err(Error::DimensionMismatch(
                "every component needs the same non-empty coefficient vector".into(),
            ));
        }
        Ok(Self { a, b, coeffs })
    }

    /// Constant polynomial stored with `degree + 1` coefficients.
    pub fn constant(a: R, b: R, value: &[R], degree: usize) -> Result<Self> {
        let coeffs = value
            .iter()
            .map(|v| {
                let mut c = vec![R::zero(); degree + 1];
                c[0] = v.clone();
                c
            })
            .collect();
        Self::new(a, b, coeffs)
    }

    /// Rebuilds a polynomial from a flat component-major coefficient vector.
    pub fn from_flat(a: R, b: R, dim: usize, flat: &[R]) -> Result<Self> {
        if dim == 0 || !flat.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients cannot be split into {dim} components",
                flat.len()
            )));
        }
        let n = flat.len() / dim;
        Self::new(a, b, flat.chunks(n).map(<[R]>::to_vec).collect())
    }

    pub fn to_flat(&self) -> Vec<R> {
        self.coeffs.iter().flatten().cloned().collect()
    }

    pub fn a(&self) -> &R {
        &self.a
    }

    pub fn b(&self) -> &R {
        &self.b
    }

    pub fn tau(&self) -> R {
        self.b.clone() - self.a.clone()
    }

    pub fn half_tau(&self) -> R {
        self.tau() / R::from_f64(2.0)
    }

    /// Nominal degree (number of stored coefficients minus one).
    pub fn degree(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Vec<R>] {
        &self.coeffs
    }

    pub fn to_reference(&self, t: &R) -> R {
        (R::from_f64(2.0) * t.clone() - self.a.clone() - self.b.clone()) / self.tau()
    }

    pub fn from_reference(&self, x: &R) -> R {
        (self.a.clone() + self.b.clone() + self.tau() * x.clone()) / R::from_f64(2.0)
    }

    fn check_inside(&self, t: &R) -> Result<()> {
        let slack = R::from_f64(16.0)
            * R::epsilon()
            * R::max_of(R::max_of(self.a.abs(), self.b.abs()), self.tau());
        if *t < self.a.clone() - slack.clone() || *t > self.b.clone() + slack {
            return Err(Error::OutOfInterval {
                t: t.to_f64(),
                a: self.a.to_f64(),
                b: self.b.to_f64(),
            });
        }
        Ok(())
    }

    /// `p^{(j)}(t)`; at `a` and `b` this is the one-sided limit.
    pub fn eval(&self, t: &R, j: usize) -> Result<Vec<R>> {
        self.check_inside(t)?;
        if *t == self.a {
            return Ok(self.endpoint_derivative(Side::Left, j));
        }
        if *t == self.b {
            return Ok(self.endpoint_derivative(Side::Right, j));
        }
        Ok(self.eval_reference(&self.to_reference(t), j))
    }

    /// `p^{(j)}` (time derivative) at the reference coordinate `x`, without range checks.
    pub fn eval_reference(&self, x: &R, j: usize) -> Vec<R> {
        let scale = (R::from_f64(2.0) / self.tau()).powi(j as u32);
        self.coeffs
            .iter()
            .map(|c| {
                let mut d = c.clone();
                for _ in 0..j {
                    d = legendre::derivative(&d);
                }
                legendre::eval(&d, x) * scale.clone()
            })
            .collect()
    }

    /// Time derivative `p^{(j)}` at an endpoint from closed-form Legendre data.
    pub fn endpoint_derivative(&self, side: Side, j: usize) -> Vec<R> {
        let scale = (R::from_f64(2.0) / self.tau()).powi(j as u32);
        self.coeffs
            .iter()
            .map(|c| {
                let s = c.iter().enumerate().fold(R::zero(), |acc, (m, cm)| {
                    let d = match side {
                        Side::Left => legendre::left_endpoint_derivative::<R>(m, j),
                        Side::Right => legendre::right_endpoint_derivative::<R>(m, j),
                    };
                    acc + cm.clone() * d
                });
                s * scale.clone()
            })
            .collect()
    }

    /// Taylor jets of order `order` at an endpoint (one-sided).
    pub fn endpoint_taylor(&self, side: Side, order: usize) -> Vec<Jet<R>> {
        let mut per_order: Vec<Vec<R>> = Vec::with_capacity(order + 1);
        for l in 0..=order {
            let f = factorial::<R>(l);
            per_order.push(
                self.endpoint_derivative(side, l)
                    .into_iter()
                    .map(|v| v / f.clone())
                    .collect(),
            );
        }
        (0..self.dim())
            .map(|c| Jet::from_coeffs(per_order.iter().map(|row| row[c].clone()).collect()))
            .collect()
    }

    /// The derivative polynomial, of degree `max(s-1, 0)`.
    pub fn derivative(&self) -> Self {
        let scale = R::from_f64(2.0) / self.tau();
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    legendre::derivative(c)
                        .into_iter()
                        .map(|v| v * scale.clone())
                        .collect()
                })
                .collect(),
        }
    }

    /// Same polynomial with coefficients padded (or truncated) to `degree + 1`.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            c.resize(degree + 1, R::zero());
        }
        out
    }

    /// The same polynomial function expanded on another interval.
    pub fn reexpand(&self, a: R, b: R) -> Result<Self> {
        // x_old = alpha * x_new + beta
        let alpha = (b.clone() - a.clone()) / self.tau();
        let beta = (a.clone() + b.clone() - self.a.clone() - self.b.clone()) / self.tau();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| compose_affine(c, &alpha, &beta))
            .collect();
        Self::new(a, b, coeffs)
    }

    /// `self + theta * v` for a scalar polynomial `theta` on the same interval.
    pub fn add_scaled(&self, theta: &LocalPolynomial<R>, v: &[R]) -> Result<Self> {
        if theta.dim() != 1 || v.len() != self.dim() {
            return Err(Error::DimensionMismatch(
                "add_scaled needs a scalar polynomial and one factor per component".into(),
            ));
        }
        if theta.a != self.a || theta.b != self.b {
            return Err(Error::InvalidParameters(
                "add_scaled needs polynomials on the same interval".into(),
            ));
        }
        let deg = self.degree().max(theta.degree());
        let mut out = self.with_degree(deg);
        for (c, vc) in out.coeffs.iter_mut().zip(v) {
            for (j, tj) in theta.coeffs[0].iter().enumerate() {
                c[j] += tj.clone() * vc.clone();
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() || other.a != self.a || other.b != self.b {
            return Err(Error::DimensionMismatch(
                "subtraction needs equal dimension and interval".into(),
            ));
        }
        let deg = self.degree().max(other.degree());
        let mut out = self.with_degree(deg);
        let o = other.with_degree(deg);
        for (c, oc) in out.coeffs.iter_mut().zip(&o.coeffs) {
            for (x, y) in c.iter_mut().zip(oc) {
                *x -= y.clone();
            }
        }
        Ok(out)
    }
}

impl<R: Real> TimeFunction<R> for LocalPolynomial<R> {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn taylor(&self, t: &R, order: usize) -> Result<Vec<Jet<R>>> {
        self.check_inside(t)?;
        if *t == self.a {
            return Ok(self.endpoint_taylor(Side::Left, order));
        }
        if *t == self.b {
            return Ok(self.endpoint_taylor(Side::Right, order));
        }
        let x = self.to_reference(t);
        let per_order: Vec<Vec<R>> = (0..=order)
            .map(|l| {
                let f = factorial::<R>(l);
                self.eval_reference(&x, l)
                    .into_iter()
                    .map(|v| v / f.clone())
                    .collect()
            })
            .collect();
        Ok((0..self.dim())
            .map(|c| Jet::from_coeffs(per_order.iter().map(|row| row[c].clone()).collect()))
            .collect())
    }
}

/// Series of `y -> p(alpha * y + beta)` given the series of `p`.
fn compose_affine<R: Real>(c: &[R], alpha: &R, beta: &R) -> Vec<R> {
    // Clenshaw on series: b_j = c_j + a_j(x) b_{j+1} + beta_{j+1} b_{j+2}
    let n = c.len();
    let x_times = |s: &[R]| -> Vec<R> {
        let ys = legendre::mul_linear(s, &R::zero());
        let mut out: Vec<R> = ys.into_iter().map(|v| v * alpha.clone()).collect();
        for (o, si) in out.iter_mut().zip(s) {
            *o += beta.clone() * si.clone();
        }
        out
    };
    let add = |mut a: Vec<R>, b: &[R], f: R| -> Vec<R> {
        if a.len() < b.len() {
            a.resize(b.len(), R::zero());
        }
        for (ai, bi) in a.iter_mut().zip(b) {
            *ai += f.clone() * bi.clone();
        }
        a
    };
    let mut b1: Vec<R> = vec![R::zero()];
    let mut b2: Vec<R> = vec![R::zero()];
    for j in (1..n).rev() {
        let alpha_j = R::from_usize(2 * j + 1) / R::from_usize(j + 1);
        let beta_j1 = -(R::from_usize(j + 1) / R::from_usize(j + 2));
        let xb1 = x_times(&b1);
        let mut b0 = add(vec![c[j].clone()], &xb1, alpha_j);
        b0 = add(b0, &b2, beta_j1);
        b2 = b1;
        b1 = b0;
    }
    let mut out = add(vec![c[0].clone()], &x_times(&b1), R::one());
    out = add(out, &b2, R::from_f64(-0.5));
    out.resize(n.max(1), R::zero());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn poly(a: f64, b: f64, c: Vec<f64>) -> LocalPolynomial<f64> {
        LocalPolynomial::new(a, b, vec![c]).unwrap()
    }

    #[test]
    fn constant_polynomial() {
        let p = LocalPolynomial::constant(0.0, 1.0, &[2.5, -1.0], 3).unwrap();
        assert_eq!(p.eval(&0.3, 0).unwrap(), vec![2.5, -1.0]);
        assert_eq!(p.eval(&0.3, 1).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn square_on_reference_interval() {
        // t^2 = 1/3 P_0 + 2/3 P_2
        let p = poly(-1.0, 1.0, vec![1.0 / 3.0, 0.0, 2.0 / 3.0]);
        assert_abs_diff_eq!(p.eval(&1.0, 1).unwrap()[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eval(&0.5, 0).unwrap()[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn shifted_legendre_at_right_end() {
        let p = poly(0.0, 2.0, vec![0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(p.eval(&2.0, 0).unwrap()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn out_of_interval() {
        let p = poly(0.0, 1.0, vec![1.0]);
        assert!(matches!(p.eval(&1.5, 0), Err(Error::OutOfInterval { .. })));
    }

    #[test]
    fn reexpand_extrapolates() {
        // p(t) = t^2 on [0, 1], reexpanded on [1, 3]
        let p = poly(0.0, 1.0, vec![1.0 / 3.0, 0.5, 1.0 / 6.0]);
        assert_abs_diff_eq!(p.eval(&0.5, 0).unwrap()[0], 0.25, epsilon = 1e-15);
        let q = p.reexpand(1.0, 3.0).unwrap();
        for t in [1.0, 1.7, 3.0] {
            assert_abs_diff_eq!(q.eval(&t, 0).unwrap()[0], t * t, epsilon = 1e-13);
        }
    }

    proptest! {
        #[test]
        fn derivative_commutes_with_eval(c in proptest::collection::vec(-1.0f64..1.0, 1..8),
                                         a in -3.0f64..3.0, len in 0.1f64..4.0, x in -0.95f64..0.95) {
            let p = poly(a, a + len, c);
            let t = p.from_reference(&x);
            let d1 = p.derivative().eval(&t, 0).unwrap()[0];
            let d2 = p.eval(&t, 1).unwrap()[0];
            prop_assert!((d1 - d2).abs() < 1e-11 * (1.0 + d1.abs()));
        }

        #[test]
        fn derivative_matches_central_difference(c in proptest::collection::vec(-1.0f64..1.0, 2..7),
                                                 x in -0.5f64..0.5) {
            let p = poly(0.0, 1.0, c);
            let t = p.from_reference(&x);
            let exact = p.eval(&t, 1).unwrap()[0];
            let fd = |h: f64| (p.eval(&(t + h), 0).unwrap()[0] - p.eval(&(t - h), 0).unwrap()[0]) / (2.0 * h);
            let (e1, e2) = ((fd(1e-2) - exact).abs(), (fd(5e-3) - exact).abs());
            // second-order: halving h divides the error by about four
            prop_assert!(e2 <= e1 / 3.0 + 1e-10);
        }

        #[test]
        fn endpoint_taylor_matches_interior_limit(c in proptest::collection::vec(-1.0f64..1.0, 1..8)) {
            let p = poly(0.5, 1.5, c);
            let jets = p.endpoint_taylor(Side::Right, 3);
            for l in 0..=3 {
                let generic = p.eval_reference(&1.0, l)[0];
                prop_assert!((jets[0].derivative(l) - generic).abs() < 1e-10 * (1.0 + generic.abs()));
            }
        }

        #[test]
        fn reexpand_round_trip(c in proptest::collection::vec(-1.0f64..1.0, 1..8), x in -1.0f64..1.0) {
            let p = poly(0.0, 1.0, c);
            let mid = p.reexpand(1.0, 2.0).unwrap();
            let q = mid.reexpand(0.0, 1.0).unwrap();
            // extrapolation grows the coefficients; round-off scales with them
            let scale: f64 = mid.coeffs()[0].iter().map(|c| c.abs()).sum();
            prop_assert!((p.eval_reference(&x, 0)[0] - q.eval_reference(&x, 0)[0]).abs() < 1e-13 * (1.0 + scale));
        }
    }
}
