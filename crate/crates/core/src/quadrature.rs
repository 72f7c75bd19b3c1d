//! Generalized Gauss-Radau/Lobatto rules `Q^{r,k}` with endpoint derivative
//! weights, and the Jacobi zeros that serve as their interior nodes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkernel::{factorial, Jet, Real};
use crate::polynomial::{legendre, HermiteBasis, HermiteSpec};

/// Number of left endpoint conditions of `I^{r,k}`: `floor((k-1)/2) + 1`.
pub fn left_order_count(k: usize) -> usize {
    k.div_ceil(2)
}

/// Number of right endpoint conditions of `I^{r,k}`: `floor(k/2) + 1`.
pub fn right_order_count(k: usize) -> usize {
    k / 2 + 1
}

fn root_tolerance<R: Real>() -> R {
    if R::mantissa_bits() <= 53 {
        R::from_f64(1e-15)
    } else {
        R::from_f64(0.5).powi(R::mantissa_bits() - 8)
    }
}

/// `P_n^{(alpha, beta)}(x)` and its derivative.
fn jacobi_eval<R: Real>(n: usize, alpha: &R, beta: &R, x: &R) -> (R, R) {
    let one = R::one();
    let two = R::from_f64(2.0);
    let (a, b) = (alpha.clone(), beta.clone());
    if n == 0 {
        return (one, R::zero());
    }
    let ab2 = a.clone() + b.clone() + two.clone();
    let mut p_prev = one.clone();
    let mut d_prev = R::zero();
    let mut p = (a.clone() + one.clone()) + ab2.clone() * (x.clone() - one.clone()) / two.clone();
    let mut d = ab2 / two.clone();
    for m in 2..=n {
        // 2m(m+a+b)(c-2) P_m = (c-1)[c(c-2)x + a^2-b^2] P_{m-1} - 2(m+a-1)(m+b-1)c P_{m-2}
        let m_r = R::from_usize(m);
        let c = two.clone() * m_r.clone() + a.clone() + b.clone();
        let lead = two.clone()
            * m_r.clone()
            * (m_r.clone() + a.clone() + b.clone())
            * (c.clone() - two.clone());
        let slope = (c.clone() - one.clone()) * c.clone() * (c.clone() - two.clone());
        let shift = (c.clone() - one.clone()) * (a.clone() * a.clone() - b.clone() * b.clone());
        let back = two.clone()
            * (m_r.clone() + a.clone() - one.clone())
            * (m_r + b.clone() - one.clone())
            * c;
        let lin = slope.clone() * x.clone() + shift;
        let p_next = (lin.clone() * p.clone() - back.clone() * p_prev.clone()) / lead.clone();
        let d_next = (lin * d.clone() + slope * p.clone() - back * d_prev.clone()) / lead;
        p_prev = std::mem::replace(&mut p, p_next);
        d_prev = std::mem::replace(&mut d, d_next);
    }
    (p, d)
}

/// The `n` zeros of the Jacobi polynomial for the weight
/// `(1-t)^alpha (1+t)^beta`, sorted ascending.
///
/// Zeros are bracketed by sign changes on a Chebyshev-spaced grid and
/// polished by Newton steps safeguarded with bisection.
pub fn jacobi_zeros<R: Real>(n: usize, alpha: &R, beta: &R) -> Result<Vec<R>> {
    let minus_one = -R::one();
    if !(*alpha > minus_one) || !(*beta > minus_one) {
        return Err(Error::InvalidParameters(format!(
            "Jacobi exponents must exceed -1, got alpha={alpha}, beta={beta}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let tol = root_tolerance::<R>();
    let mut grid_size = 32 * n + 64;
    for _ in 0..6 {
        let grid: Vec<R> = (0..=grid_size)
            .map(|j| {
                -(R::pi() * R::from_usize(j) / R::from_usize(grid_size)).cos()
            })
            .collect();
        let vals: Vec<R> = grid.iter().map(|x| jacobi_eval(n, alpha, beta, x).0).collect();
        let mut roots = Vec::with_capacity(n);
        for j in 0..grid_size {
            let (fa, fb) = (&vals[j], &vals[j + 1]);
            if fa.is_zero() && j > 0 {
                roots.push(grid[j].clone());
                continue;
            }
            if (fa.clone() * fb.clone()) < R::zero() {
                roots.push(polish(n, alpha, beta, grid[j].clone(), grid[j + 1].clone(), &tol));
            }
        }
        if roots.len() == n {
            return Ok(roots);
        }
        grid_size *= 4;
    }
    Err(Error::InvalidParameters(format!(
        "failed to isolate {n} Jacobi zeros"
    )))
}

fn polish<R: Real>(n: usize, alpha: &R, beta: &R, mut lo: R, mut hi: R, tol: &R) -> R {
    let two = R::from_f64(2.0);
    let f_lo = jacobi_eval(n, alpha, beta, &lo).0;
    let lo_negative = f_lo < R::zero();
    let mut x = (lo.clone() + hi.clone()) / two.clone();
    for _ in 0..100 {
        let (f, d) = jacobi_eval(n, alpha, beta, &x);
        if f.is_zero() {
            return x;
        }
        if (f < R::zero()) == lo_negative {
            lo = x.clone();
        } else {
            hi = x.clone();
        }
        let newton = if d.is_zero() {
            None
        } else {
            Some(x.clone() - f / d)
        };
        let next = match newton {
            Some(cand) if cand > lo && cand < hi => cand,
            _ => (lo.clone() + hi.clone()) / two.clone(),
        };
        let step = (next.clone() - x.clone()).abs();
        x = next;
        if step <= tol.clone() || (hi.clone() - lo.clone()) <= tol.clone() {
            break;
        }
    }
    x
}

/// A rule `(tau/2) [sum w^L_i (tau/2)^i f^{(i)}(a) + sum w^I_i f(t_i) + sum w^R_i (tau/2)^i f^{(i)}(b)]`
/// described on the reference interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureRule<R> {
    pub left_weights: Vec<R>,
    pub interior_nodes: Vec<R>,
    pub interior_weights: Vec<R>,
    pub right_weights: Vec<R>,
}

impl<R: Real> QuadratureRule<R> {
    /// Weights by integrating the Hermite cardinal functions of the node set.
    pub fn from_nodes(left_orders: usize, interior_nodes: Vec<R>, right_orders: usize) -> Result<Self> {
        let spec = HermiteSpec {
            left_orders,
            right_orders,
            interior_nodes,
        };
        let n = spec.condition_count();
        let basis = HermiteBasis::new(spec)?;
        let mut weights: Vec<R> = (0..n)
            .map(|m| {
                let mut e = vec![R::zero(); n];
                e[m] = R::one();
                legendre::integral(&basis.solve_reference(&e))
            })
            .collect();
        let right_weights = weights.split_off(n - right_orders);
        let interior_weights = weights.split_off(left_orders);
        Ok(Self {
            left_weights: weights,
            interior_nodes: basis.spec().interior_nodes.clone(),
            interior_weights,
            right_weights,
        })
    }

    /// `n`-point Gauss-Legendre rule.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        let nodes = jacobi_zeros(n, &R::zero(), &R::zero())?;
        let weights = nodes
            .iter()
            .map(|x| {
                let (_, dp) = legendre::values_and_derivatives(x, n);
                let d = dp[n].clone();
                R::from_f64(2.0) / ((R::one() - x.clone() * x.clone()) * d.clone() * d)
            })
            .collect();
        Ok(Self {
            left_weights: Vec::new(),
            interior_nodes: nodes,
            interior_weights: weights,
            right_weights: Vec::new(),
        })
    }

    pub fn left_orders(&self) -> usize {
        self.left_weights.len()
    }

    pub fn right_orders(&self) -> usize {
        self.right_weights.len()
    }

    /// Interior nodes mapped to `[a, b]`.
    pub fn mapped_nodes(&self, a: &R, b: &R) -> Vec<R> {
        let mid = (a.clone() + b.clone()) / R::from_f64(2.0);
        let h = (b.clone() - a.clone()) / R::from_f64(2.0);
        self.interior_nodes
            .iter()
            .map(|x| mid.clone() + h.clone() * x.clone())
            .collect()
    }

    /// Applies the rule on `[a, b]` to a scalar function given by its Taylor
    /// jets: `f(t, p)` must return a jet of order `p` expanded at `t`.
    pub fn apply<F>(&self, a: &R, b: &R, mut f: F) -> Result<R>
    where
        F: FnMut(&R, usize) -> Result<Jet<R>>,
    {
        let h = (b.clone() - a.clone()) / R::from_f64(2.0);
        let mut sum = R::zero();
        let endpoint = |t: &R, weights: &[R], f: &mut F| -> Result<R> {
            if weights.is_empty() {
                return Ok(R::zero());
            }
            let jet = f(t, weights.len() - 1)?;
            let mut acc = R::zero();
            let mut hp = R::one();
            for (i, w) in weights.iter().enumerate() {
                acc += w.clone() * hp.clone() * jet.derivative(i);
                hp *= h.clone();
            }
            Ok(acc)
        };
        sum += endpoint(a, &self.left_weights, &mut f)?;
        for (t, w) in self.mapped_nodes(a, b).iter().zip(&self.interior_weights) {
            sum += w.clone() * f(t, 0)?.value();
        }
        sum += endpoint(b, &self.right_weights, &mut f)?;
        Ok(h * sum)
    }

    /// The rule applied to `x^m` on [-1, 1].
    pub fn monomial_integral(&self, m: usize) -> R {
        let deriv = |x: &R, i: usize| -> R {
            if i > m {
                return R::zero();
            }
            factorial::<R>(m) / factorial::<R>(m - i) * x.powi((m - i) as u32)
        };
        let (minus, plus) = (-R::one(), R::one());
        let mut sum = R::zero();
        for (i, w) in self.left_weights.iter().enumerate() {
            sum += w.clone() * deriv(&minus, i);
        }
        for (x, w) in self.interior_nodes.iter().zip(&self.interior_weights) {
            sum += w.clone() * x.powi(m as u32);
        }
        for (i, w) in self.right_weights.iter().enumerate() {
            sum += w.clone() * deriv(&plus, i);
        }
        sum
    }
}

/// The rule `Q^{r,k}` associated with `VTD(r,k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VtdQuadrature<R> {
    pub r: usize,
    pub k: usize,
    pub rule: QuadratureRule<R>,
}

impl<R: Real> VtdQuadrature<R> {
    pub fn exactness_degree(&self) -> usize {
        2 * self.r - self.k
    }

    /// Interpolation conditions of `I^{r,k}`.
    pub fn hermite_spec(&self) -> HermiteSpec<R> {
        HermiteSpec {
            left_orders: left_order_count(self.k),
            right_orders: right_order_count(self.k),
            interior_nodes: self.rule.interior_nodes.clone(),
        }
    }

    /// Factored interpolation operator `I^{r,k}`.
    pub fn interpolation_basis(&self) -> Result<HermiteBasis<R>> {
        HermiteBasis::new(self.hermite_spec())
    }
}

/// Builds `Q^{r,k}` for `0 <= k <= r`.
pub fn build_rule<R: Real>(r: usize, k: usize) -> Result<VtdQuadrature<R>> {
    if k > r {
        return Err(Error::InvalidParameters(format!(
            "Q^{{r,k}} needs 0 <= k <= r, got r={r}, k={k}"
        )));
    }
    let alpha = R::from_usize(right_order_count(k));
    let beta = R::from_usize(left_order_count(k));
    let nodes = jacobi_zeros(r - k, &alpha, &beta)?;
    let rule = QuadratureRule::from_nodes(left_order_count(k), nodes, right_order_count(k))?;
    Ok(VtdQuadrature { r, k, rule })
}

/// Applies `Q^{r,k}` (or any rule) on `[a, b]`; see [`QuadratureRule::apply`].
pub fn apply_rule<R: Real, F>(q: &VtdQuadrature<R>, a: &R, b: &R, f: F) -> Result<R>
where
    F: FnMut(&R, usize) -> Result<Jet<R>>,
{
    q.rule.apply(a, b, f)
}

/// Result of checking a rule against exact monomial moments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub r: usize,
    pub k: usize,
    pub exactness_degree: usize,
    pub tolerance: f64,
    /// Largest error over degrees `0..=exactness_degree`, relative to `max(1, |exact|)`.
    pub max_error: f64,
    /// Degrees within the claimed range whose error exceeds the tolerance.
    pub failed_degrees: Vec<usize>,
    /// Error at degree `exactness_degree + 1`.
    pub first_excess_error: f64,
    pub sign_violations: Vec<String>,
}

impl ExactnessReport {
    pub fn passed(&self) -> bool {
        self.failed_degrees.is_empty() && self.sign_violations.is_empty()
    }

    /// True when the rule is not exact one degree beyond its claimed degree.
    pub fn is_sharp(&self) -> bool {
        self.first_excess_error > self.tolerance
    }
}

fn monomial_exact<R: Real>(m: usize) -> R {
    if m % 2 == 1 {
        R::zero()
    } else {
        R::from_f64(2.0) / R::from_usize(m + 1)
    }
}

/// Checks monomial moments up to the exactness degree and the sign pattern
/// `w^I > 0`, `w^L > 0`, `(-1)^j w^R_j > 0`.
pub fn verify_exactness<R: Real>(q: &VtdQuadrature<R>, tolerance: f64) -> ExactnessReport {
    let deg = q.exactness_degree();
    let err = |m: usize| -> f64 {
        let exact = monomial_exact::<R>(m);
        let scale = R::max_of(R::one(), exact.abs());
        ((q.rule.monomial_integral(m) - exact).abs() / scale).to_f64()
    };
    let mut max_error: f64 = 0.0;
    let mut failed_degrees = Vec::new();
    for m in 0..=deg {
        let e = err(m);
        max_error = max_error.max(e);
        if !(e <= tolerance) {
            failed_degrees.push(m);
        }
    }
    let mut sign_violations = Vec::new();
    for (i, w) in q.rule.interior_weights.iter().enumerate() {
        if !(*w > R::zero()) {
            sign_violations.push(format!("w^I_{} = {w} is not positive", i + 1));
        }
    }
    for (i, w) in q.rule.left_weights.iter().enumerate() {
        if !(*w > R::zero()) {
            sign_violations.push(format!("w^L_{i} = {w} is not positive"));
        }
    }
    for (j, w) in q.rule.right_weights.iter().enumerate() {
        let signed = if j % 2 == 0 { w.clone() } else { -w.clone() };
        if !(signed > R::zero()) {
            sign_violations.push(format!("(-1)^{j} w^R_{j} = {signed} is not positive"));
        }
    }
    for pair in q.rule.interior_nodes.windows(2) {
        if !(pair[0] < pair[1]) {
            sign_violations.push("interior nodes are not strictly increasing".into());
        }
    }
    ExactnessReport {
        r: q.r,
        k: q.k,
        exactness_degree: deg,
        tolerance,
        max_error,
        failed_degrees,
        first_excess_error: err(deg + 1),
        sign_violations,
    }
}

/// Default exactness tolerance for the active precision.
pub fn default_exactness_tolerance<R: Real>() -> f64 {
    (R::from_f64(5e4) * R::epsilon()).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_count_is_empty() {
        assert!(jacobi_zeros::<f64>(0, &1.0, &0.0).unwrap().is_empty());
    }

    #[test]
    fn linear_jacobi_root() {
        let z = jacobi_zeros::<f64>(1, &1.0, &0.0).unwrap();
        assert_abs_diff_eq!(z[0], -1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_weight_gives_symmetric_zeros() {
        for n in 1..9 {
            let z = jacobi_zeros::<f64>(n, &2.0, &2.0).unwrap();
            for i in 0..n {
                assert_abs_diff_eq!(z[i], -z[n - 1 - i], epsilon = 1e-14);
            }
            if n % 2 == 1 {
                assert_abs_diff_eq!(z[n / 2], 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn invalid_exponent() {
        assert!(jacobi_zeros::<f64>(2, &-1.0, &0.0).is_err());
    }

    #[test]
    fn frozen_small_rules() {
        let q = build_rule::<f64>(0, 0).unwrap();
        assert!(q.rule.interior_nodes.is_empty());
        assert_abs_diff_eq!(q.rule.right_weights[0], 2.0, epsilon = 1e-15);

        let q = build_rule::<f64>(1, 0).unwrap();
        assert_abs_diff_eq!(q.rule.interior_nodes[0], -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.rule.interior_weights[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(q.rule.right_weights[0], 0.5, epsilon = 1e-14);

        let q = build_rule::<f64>(1, 1).unwrap();
        assert_abs_diff_eq!(q.rule.left_weights[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.rule.right_weights[0], 1.0, epsilon = 1e-15);

        let q = build_rule::<f64>(2, 2).unwrap();
        assert_abs_diff_eq!(q.rule.left_weights[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.rule.right_weights[0], 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.rule.right_weights[1], -2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn invalid_rule_parameters() {
        assert!(matches!(build_rule::<f64>(1, 2), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn apply_examples() {
        let q = build_rule::<f64>(1, 0).unwrap();
        let cube = |t: &f64, p: usize| Ok(&(&Jet::variable(*t, p) * &Jet::variable(*t, p)) * &Jet::variable(*t, p));
        assert_abs_diff_eq!(apply_rule(&q, &-1.0, &1.0, cube).unwrap(), 4.0 / 9.0, epsilon = 1e-15);
        for (r, k) in [(0, 0), (2, 1), (3, 3), (4, 2)] {
            let q = build_rule::<f64>(r, k).unwrap();
            let one = apply_rule(&q, &2.0, &2.5, |_: &f64, p| Ok(Jet::constant(1.0, p))).unwrap();
            assert_abs_diff_eq!(one, 0.5, epsilon = 1e-14);
            if 2 * r - k >= 1 {
                let lin = apply_rule(&q, &0.0, &1.0, |t: &f64, p| Ok(Jet::variable(*t, p))).unwrap();
                assert_abs_diff_eq!(lin, 0.5, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn perturbed_weight_is_reported() {
        let mut q = build_rule::<f64>(3, 1).unwrap();
        assert!(verify_exactness(&q, 1e-12).passed());
        q.rule.interior_weights[0] += 1e-6;
        assert!(!verify_exactness(&q, 1e-12).passed());
        q.rule.interior_weights[0] = -0.1;
        assert!(!verify_exactness(&q, 1e-12).sign_violations.is_empty());
    }

    #[test]
    fn gauss_legendre_exactness() {
        let g = QuadratureRule::<f64>::gauss_legendre(6).unwrap();
        for m in 0..12 {
            assert_abs_diff_eq!(g.monomial_integral(m), monomial_exact::<f64>(m), epsilon = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn all_small_rules_are_exact_and_sharp(r in 0usize..9, kk in 0usize..9) {
            let k = kk.min(r);
            let q = build_rule::<f64>(r, k).unwrap();
            let report = verify_exactness(&q, 1e-11);
            prop_assert!(report.passed(), "{report:?}");
            prop_assert!(report.is_sharp(), "{report:?}");
            prop_assert_eq!(
                q.rule.left_weights.len() + q.rule.interior_nodes.len() + q.rule.right_weights.len(),
                r + 1
            );
            for x in &q.rule.interior_nodes {
                prop_assert!(*x > -1.0 && *x < 1.0);
            }
        }
    }
}
