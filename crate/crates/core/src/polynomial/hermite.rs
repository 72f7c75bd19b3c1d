//! Hermite-type interpolation with derivative data at the endpoints and simple
//! interior nodes, and the product-form polynomials used for postprocessing.

use crate::error::{Error, Result};
use crate::numkernel::{factorial, DenseMatrix, Lu, Real};
use crate::polynomial::{legendre, LocalPolynomial, Side, TimeFunction};

/// Interpolation conditions on the reference interval.
///
/// `left_orders = m` means values and derivatives of order `0..m` at `-1`;
/// likewise at `+1`. Interior nodes are reference coordinates in `(-1, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteSpec<R> {
    pub left_orders: usize,
    pub right_orders: usize,
    pub interior_nodes: Vec<R>,
}

impl<R: Real> HermiteSpec<R> {
    pub fn condition_count(&self) -> usize {
        self.left_orders + self.right_orders + self.interior_nodes.len()
    }
}

/// Data matching a [`HermiteSpec`]: time derivatives at `a` and `b`, values at
/// the interior nodes. Each entry holds one value per component.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteData<R> {
    pub left: Vec<Vec<R>>,
    pub interior: Vec<Vec<R>>,
    pub right: Vec<Vec<R>>,
}

/// A factored Hermite constraint system, reusable across intervals.
#[derive(Clone, Debug)]
pub struct HermiteBasis<R> {
    spec: HermiteSpec<R>,
    lu: Lu<R>,
}

impl<R: Real> HermiteBasis<R> {
    pub fn new(spec: HermiteSpec<R>) -> Result<Self> {
        let n = spec.condition_count();
        if n == 0 {
            return Err(Error::InvalidParameters(
                "Hermite interpolation needs at least one condition".into(),
            ));
        }
        let s = n - 1;
        let mut mat = DenseMatrix::zeros(n, n);
        let mut row = 0;
        for i in 0..spec.left_orders {
            for j in 0..=s {
                mat[(row, j)] = legendre::left_endpoint_derivative(j, i);
            }
            row += 1;
        }
        for x in &spec.interior_nodes {
            for (j, v) in legendre::values(x, s).into_iter().enumerate() {
                mat[(row, j)] = v;
            }
            row += 1;
        }
        for i in 0..spec.right_orders {
            for j in 0..=s {
                mat[(row, j)] = legendre::right_endpoint_derivative(j, i);
            }
            row += 1;
        }
        let lu = mat.lu().map_err(|_| {
            Error::SingularConstraintSystem(
                "interpolation nodes must be distinct and inside (-1, 1)".into(),
            )
        })?;
        Ok(Self { spec, lu })
    }

    pub fn spec(&self) -> &HermiteSpec<R> {
        &self.spec
    }

    pub fn degree(&self) -> usize {
        self.spec.condition_count() - 1
    }

    /// Legendre coefficients on [-1, 1] from data already in reference scaling.
    pub fn solve_reference(&self, rhs: &[R]) -> Vec<R> {
        self.lu.solve(rhs)
    }

    /// Interpolant on `[a, b]` of the given time-derivative data.
    pub fn interpolate(&self, a: &R, b: &R, data: &HermiteData<R>) -> Result<LocalPolynomial<R>> {
        let spec = &self.spec;
        if data.left.len() != spec.left_orders
            || data.right.len() != spec.right_orders
            || data.interior.len() != spec.interior_nodes.len()
        {
            return Err(Error::DimensionMismatch(
                "Hermite data does not match the specification".into(),
            ));
        }
        let dim = data
            .left
            .iter()
            .chain(&data.interior)
            .chain(&data.right)
            .map(Vec::len)
            .next()
            .unwrap_or(0);
        let h = (b.clone() - a.clone()) / R::from_f64(2.0);
        let coeffs = (0..dim)
            .map(|c| {
                let mut rhs = Vec::with_capacity(spec.condition_count());
                for (i, v) in data.left.iter().enumerate() {
                    rhs.push(v[c].clone() * h.powi(i as u32));
                }
                for v in &data.interior {
                    rhs.push(v[c].clone());
                }
                for (i, v) in data.right.iter().enumerate() {
                    rhs.push(v[c].clone() * h.powi(i as u32));
                }
                self.lu.solve(&rhs)
            })
            .collect();
        LocalPolynomial::new(a.clone(), b.clone(), coeffs)
    }

    /// Samples `f` on `[a, b]` and interpolates. Endpoint derivatives are taken
    /// from `f.taylor` at `a` and `b`.
    pub fn interpolate_function(
        &self,
        a: &R,
        b: &R,
        f: &dyn TimeFunction<R>,
    ) -> Result<LocalPolynomial<R>> {
        let spec = &self.spec;
        let needed = spec.left_orders.max(spec.right_orders).saturating_sub(1);
        if let Some(avail) = f.smoothness() {
            if avail < needed {
                return Err(Error::InsufficientSmoothness {
                    required: needed,
                    available: avail,
                });
            }
        }
        let h = (b.clone() - a.clone()) / R::from_f64(2.0);
        let endpoint = |t: &R, m: usize| -> Result<Vec<Vec<R>>> {
            if m == 0 {
                return Ok(Vec::new());
            }
            let jets = f.taylor(t, m - 1)?;
            Ok((0..m)
                .map(|i| jets.iter().map(|j| j.derivative(i)).collect())
                .collect())
        };
        let data = HermiteData {
            left: endpoint(a, spec.left_orders)?,
            interior: spec
                .interior_nodes
                .iter()
                .map(|x| f.value(&((a.clone() + b.clone()) / R::from_f64(2.0) + h.clone() * x.clone())))
                .collect::<Result<_>>()?,
            right: endpoint(b, spec.right_orders)?,
        };
        self.interpolate(a, b, &data)
    }
}

/// One-shot Hermite interpolation; see [`HermiteBasis`] for repeated use.
pub fn hermite_interpolate<R: Real>(
    spec: &HermiteSpec<R>,
    a: &R,
    b: &R,
    data: &HermiteData<R>,
    target_degree: usize,
) -> Result<LocalPolynomial<R>> {
    if spec.condition_count() != target_degree + 1 {
        return Err(Error::InvalidParameters(format!(
            "{} conditions cannot determine a polynomial of degree {target_degree}",
            spec.condition_count()
        )));
    }
    HermiteBasis::new(spec.clone())?.interpolate(a, b, data)
}

/// Which derivative of the product polynomial is normalized to one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `theta^{(p_R)}(b) = 1`.
    Right,
    /// `theta^{(p_L)}(a) = 1`.
    Left,
}

/// `c (t-a)^{p_L} (t-b)^{p_R} prod (t - t_i)` with `p_L = floor((k-1)/2)+1`,
/// `p_R = floor(k/2)+1` and the interior nodes given in reference coordinates.
///
/// The result is scalar (one component); its degree is `p_L + p_R + #nodes`.
pub fn theta_polynomial<R: Real>(
    k: usize,
    a: &R,
    b: &R,
    interior_nodes: &[R],
    normalization: Normalization,
) -> Result<LocalPolynomial<R>> {
    let p_l = k.div_ceil(2);
    let p_r = k / 2 + 1;
    let one = R::one();
    let mut g = vec![R::one()];
    for _ in 0..p_l {
        g = legendre::mul_linear(&g, &(-one.clone()));
    }
    for _ in 0..p_r {
        g = legendre::mul_linear(&g, &one);
    }
    for x in interior_nodes {
        g = legendre::mul_linear(&g, x);
    }
    let h = (b.clone() - a.clone()) / R::from_f64(2.0);
    let two = R::from_f64(2.0);
    // derivative of g at the normalized end, by the product rule on the
    // vanishing factor
    let (order, deriv) = match normalization {
        Normalization::Right => {
            let rest = interior_nodes
                .iter()
                .fold(two.powi(p_l as u32), |acc, x| acc * (one.clone() - x.clone()));
            (p_r, factorial::<R>(p_r) * rest)
        }
        Normalization::Left => {
            let rest = interior_nodes.iter().fold((-two).powi(p_r as u32), |acc, x| {
                acc * (-one.clone() - x.clone())
            });
            (p_l, factorial::<R>(p_l) * rest)
        }
    };
    let scale = h.powi(order as u32) / deriv;
    let coeffs = g.into_iter().map(|v| v * scale.clone()).collect();
    LocalPolynomial::new(a.clone(), b.clone(), vec![coeffs])
}

impl<R: Real> LocalPolynomial<R> {
    /// Derivative data at the endpoints and values at interior reference
    /// nodes, in the layout of a [`HermiteSpec`].
    pub fn hermite_data(&self, spec: &HermiteSpec<R>) -> HermiteData<R> {
        HermiteData {
            left: (0..spec.left_orders)
                .map(|i| self.endpoint_derivative(Side::Left, i))
                .collect(),
            interior: spec
                .interior_nodes
                .iter()
                .map(|x| self.eval_reference(x, 0))
                .collect(),
            right: (0..spec.right_orders)
                .map(|i| self.endpoint_derivative(Side::Right, i))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn lobatto_pair_interpolates_square_by_constant() {
        let spec = HermiteSpec {
            left_orders: 1,
            right_orders: 1,
            interior_nodes: vec![],
        };
        let data = HermiteData {
            left: vec![vec![1.0]],
            interior: vec![],
            right: vec![vec![1.0]],
        };
        let p = hermite_interpolate(&spec, &-1.0, &1.0, &data, 1).unwrap();
        assert_abs_diff_eq!(p.eval(&0.0, 0).unwrap()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eval(&0.3, 1).unwrap()[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn radau_pair_interpolates_square_by_line() {
        // nodes -1/3 and 1: line through (-1/3, 1/9) and (1, 1) is (2/3) t + 1/3
        let spec = HermiteSpec {
            left_orders: 0,
            right_orders: 1,
            interior_nodes: vec![-1.0 / 3.0],
        };
        let data = HermiteData {
            left: vec![],
            interior: vec![vec![1.0 / 9.0]],
            right: vec![vec![1.0]],
        };
        let p = hermite_interpolate(&spec, &-1.0, &1.0, &data, 1).unwrap();
        for t in [-1.0, 0.0, 0.5] {
            assert_abs_diff_eq!(p.eval(&t, 0).unwrap()[0], 2.0 / 3.0 * t + 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn count_mismatch_and_coincident_nodes() {
        let spec = HermiteSpec {
            left_orders: 1,
            right_orders: 1,
            interior_nodes: vec![0.2, 0.2],
        };
        assert!(matches!(
            HermiteBasis::new(spec),
            Err(Error::SingularConstraintSystem(_))
        ));
        let spec = HermiteSpec::<f64> {
            left_orders: 1,
            right_orders: 1,
            interior_nodes: vec![],
        };
        let data = HermiteData {
            left: vec![vec![0.0]],
            interior: vec![],
            right: vec![vec![0.0]],
        };
        assert!(matches!(
            hermite_interpolate(&spec, &0.0, &1.0, &data, 2),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn theta_examples() {
        let t = theta_polynomial(0, &2.0, &3.0, &[], Normalization::Right).unwrap();
        for s in [2.0, 2.4, 3.0] {
            assert_abs_diff_eq!(t.eval(&s, 0).unwrap()[0], s - 3.0, epsilon = 1e-15);
        }
        let tl = theta_polynomial(0, &2.0, &3.0, &[], Normalization::Left).unwrap();
        assert_abs_diff_eq!(tl.eval(&2.5, 0).unwrap()[0], (2.5 - 3.0) / (2.0 - 3.0), epsilon = 1e-15);
        let t11 = theta_polynomial(1, &-1.0, &1.0, &[], Normalization::Right).unwrap();
        assert_abs_diff_eq!(t11.eval(&0.5, 0).unwrap()[0], (0.25 - 1.0) / 2.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn theta_normalizations_and_zeros(k in 0usize..5, nodes in proptest::collection::vec(-0.9f64..0.9, 0..3),
                                          a in -2.0f64..2.0, len in 0.2f64..2.0) {
            let b = a + len;
            let right = theta_polynomial(k, &a, &b, &nodes, Normalization::Right).unwrap();
            let left = theta_polynomial(k, &a, &b, &nodes, Normalization::Left).unwrap();
            let (p_l, p_r) = (k.div_ceil(2), k / 2 + 1);
            prop_assert!((right.eval(&b, p_r).unwrap()[0] - 1.0).abs() < 1e-9);
            prop_assert!((left.eval(&a, p_l).unwrap()[0] - 1.0).abs() < 1e-9);
            for x in &nodes {
                let v = right.eval_reference(x, 0)[0];
                prop_assert!(v.abs() < 1e-9 * (1.0 + right.coeffs()[0].iter().map(|c| c.abs()).sum::<f64>()));
            }
            // left = right / right^{(p_L)}(a)
            let ratio = right.eval(&a, p_l).unwrap()[0];
            let x = 0.3;
            let lhs = left.eval_reference(&x, 0)[0] * ratio;
            prop_assert!((lhs - right.eval_reference(&x, 0)[0]).abs() < 1e-8 * (1.0 + lhs.abs()));
        }

        #[test]
        fn interpolation_reproduces_its_degree(coeffs in proptest::collection::vec(-1.0f64..1.0, 5),
                                               m_l in 0usize..3, m_r in 1usize..3) {
            let s = coeffs.len() - 1;
            let n_int = s + 1 - m_l - m_r;
            let nodes: Vec<f64> = (0..n_int).map(|i| -0.8 + 1.6 * (i as f64 + 0.5) / n_int as f64).collect();
            let spec = HermiteSpec { left_orders: m_l, right_orders: m_r, interior_nodes: nodes };
            let q = LocalPolynomial::new(0.5, 1.25, vec![coeffs]).unwrap();
            let data = q.hermite_data(&spec);
            let p = hermite_interpolate(&spec, &0.5, &1.25, &data, s).unwrap();
            for (pc, qc) in p.coeffs()[0].iter().zip(&q.coeffs()[0]) {
                prop_assert!((pc - qc).abs() < 1e-10);
            }
        }
    }
}
