//! Legendre series on the reference interval [-1, 1].

use crate::numkernel::{factorial, Real};

/// Values `P_0(x), ..., P_n(x)`.
pub fn values<R: Real>(x: &R, n: usize) -> Vec<R> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(R::one());
    if n >= 1 {
        p.push(x.clone());
    }
    for j in 2..=n {
        // j P_j = (2j-1) x P_{j-1} - (j-1) P_{j-2}
        let v = (R::from_usize(2 * j - 1) * x.clone() * p[j - 1].clone()
            - R::from_usize(j - 1) * p[j - 2].clone())
            / R::from_usize(j);
        p.push(v);
    }
    p
}

/// Values and first derivatives `(P_j(x), P_j'(x))` for `j = 0..=n`.
pub fn values_and_derivatives<R: Real>(x: &R, n: usize) -> (Vec<R>, Vec<R>) {
    let p = values(x, n);
    let mut dp = vec![R::zero(); n + 1];
    for j in 1..=n {
        // P_j' = j P_{j-1} + x P_{j-1}'
        dp[j] = R::from_usize(j) * p[j - 1].clone() + x.clone() * dp[j - 1].clone();
    }
    (p, dp)
}

/// Evaluates `sum c_j P_j(x)` by Clenshaw's recurrence.
pub fn eval<R: Real>(c: &[R], x: &R) -> R {
    let n = c.len();
    if n == 0 {
        return R::zero();
    }
    let mut b1 = R::zero();
    let mut b2 = R::zero();
    for j in (1..n).rev() {
        // alpha_j = (2j+1)/(j+1) x, beta_{j+1} = -(j+1)/(j+2)
        let alpha = R::from_usize(2 * j + 1) / R::from_usize(j + 1) * x.clone();
        let beta = R::from_usize(j + 1) / R::from_usize(j + 2);
        let b0 = c[j].clone() + alpha * b1.clone() - beta * b2;
        b2 = b1;
        b1 = b0;
    }
    c[0].clone() + x.clone() * b1 - R::from_f64(0.5) * b2
}

/// `P_j^{(i)}(1) = (j+i)! / (2^i i! (j-i)!)`, zero for `i > j`.
pub fn right_endpoint_derivative<R: Real>(j: usize, i: usize) -> R {
    if i > j {
        return R::zero();
    }
    let mut num = R::one();
    for m in 0..i {
        num *= R::from_usize((j - m) * (j + m + 1));
    }
    num / (R::from_f64(2.0).powi(i as u32) * factorial::<R>(i))
}

/// `P_j^{(i)}(-1) = (-1)^{j+i} P_j^{(i)}(1)`.
pub fn left_endpoint_derivative<R: Real>(j: usize, i: usize) -> R {
    let v = right_endpoint_derivative::<R>(j, i);
    if (j + i).is_multiple_of(2) {
        v
    } else {
        -v
    }
}

/// Coefficients of the derivative (w.r.t. the reference variable) of a series.
pub fn derivative<R: Real>(c: &[R]) -> Vec<R> {
    let n = c.len();
    if n <= 1 {
        return vec![R::zero()];
    }
    let mut c = c.to_vec();
    let mut der = vec![R::zero(); n - 1];
    for j in (3..n).rev() {
        der[j - 1] = R::from_usize(2 * j - 1) * c[j].clone();
        let carry = c[j].clone();
        c[j - 2] += carry;
    }
    if n > 2 {
        der[1] = R::from_usize(3) * c[2].clone();
    }
    der[0] = c[1].clone();
    der
}

/// Multiplies a series by `(x - root)`, raising its length by one.
pub fn mul_linear<R: Real>(c: &[R], root: &R) -> Vec<R> {
    let n = c.len();
    let mut out = vec![R::zero(); n + 1];
    for (j, cj) in c.iter().enumerate() {
        // x P_j = ((j+1) P_{j+1} + j P_{j-1}) / (2j+1)
        let denom = R::from_usize(2 * j + 1);
        out[j + 1] += R::from_usize(j + 1) * cj.clone() / denom.clone();
        if j >= 1 {
            out[j - 1] += R::from_usize(j) * cj.clone() / denom;
        }
        out[j] -= root.clone() * cj.clone();
    }
    out
}

/// Integral over [-1, 1] of a series: only `P_0` contributes.
pub fn integral<R: Real>(c: &[R]) -> R {
    c.first().cloned().unwrap_or_else(R::zero) * R::from_f64(2.0)
}

/// Legendre coefficients of the monomial `x^m`.
pub fn monomial<R: Real>(m: usize) -> Vec<R> {
    let mut c = vec![R::one()];
    for _ in 0..m {
        c = mul_linear(&c, &R::zero());
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p2(x: f64) -> f64 {
        0.5 * (3.0 * x * x - 1.0)
    }

    #[test]
    fn low_order_values() {
        let v = values(&0.3, 3);
        assert_abs_diff_eq!(v[2], p2(0.3), epsilon = 1e-15);
        assert_abs_diff_eq!(v[3], 0.5 * (5.0 * 0.027 - 3.0 * 0.3), epsilon = 1e-15);
        let (_, d) = values_and_derivatives(&0.3, 3);
        assert_abs_diff_eq!(d[2], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(d[3], 0.5 * (15.0 * 0.09 - 3.0), epsilon = 1e-15);
    }

    #[test]
    fn endpoint_derivatives() {
        assert_eq!(right_endpoint_derivative::<f64>(2, 1), 3.0);
        assert_eq!(right_endpoint_derivative::<f64>(2, 2), 3.0);
        assert_eq!(right_endpoint_derivative::<f64>(3, 4), 0.0);
        assert_eq!(left_endpoint_derivative::<f64>(2, 1), -3.0);
        assert_eq!(left_endpoint_derivative::<f64>(3, 0), -1.0);
    }

    #[test]
    fn monomials_in_legendre_basis() {
        let c = monomial::<f64>(2);
        assert_abs_diff_eq!(c[0], 1.0 / 3.0, epsilon = 1e-16);
        assert_abs_diff_eq!(c[2], 2.0 / 3.0, epsilon = 1e-16);
        assert_abs_diff_eq!(integral(&monomial::<f64>(4)), 0.4, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn clenshaw_matches_direct_sum(c in proptest::collection::vec(-1.0f64..1.0, 1..10), x in -1.0f64..1.0) {
            let p = values(&x, c.len() - 1);
            let direct: f64 = c.iter().zip(&p).map(|(a, b)| a * b).sum();
            prop_assert!((eval(&c, &x) - direct).abs() < 1e-13);
        }

        #[test]
        fn derivative_matches_pointwise(c in proptest::collection::vec(-1.0f64..1.0, 1..10), x in -1.0f64..1.0) {
            let (_, dp) = values_and_derivatives(&x, c.len() - 1);
            let direct: f64 = c.iter().zip(&dp).map(|(a, b)| a * b).sum();
            prop_assert!((eval(&derivative(&c), &x) - direct).abs() < 1e-12);
        }

        #[test]
        fn mul_linear_is_pointwise_product(c in proptest::collection::vec(-1.0f64..1.0, 1..8),
                                           root in -1.0f64..1.0, x in -1.0f64..1.0) {
            let lhs = eval(&mul_linear(&c, &root), &x);
            prop_assert!((lhs - (x - root) * eval(&c, &x)).abs() < 1e-13);
        }
    }
}
