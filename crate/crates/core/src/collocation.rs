//! Collocation with multiple nodes, an independent check of the
//! postprocessed variational solutions.
//!
//! On each interval `U~` in `P_{r+1}` is sought in the monomial basis of
//! `s = (t - a) / tau` and must satisfy `U~(a) = U~(a^-)`, the ODE and its
//! first `floor(k/2)` derivatives at `b`, the ODE and its first
//! `floor((k-1)/2)` derivatives at `a` (when `k >= 1`), and the ODE at the
//! `r - k` interior Jacobi nodes. There is no quadrature and no test space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{binomial, newton_solve, solve_affine, JacobianMode, Jet, NewtonSettings, Real};
use crate::polynomial::{legendre, LocalPolynomial, Side};
use crate::problem::{initial_jet, OdeProblem};
use crate::quadrature::jacobi_zeros;
use crate::solution::{validate_mesh, MeshSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollocationConfig {
    pub r: usize,
    pub k: usize,
}

impl CollocationConfig {
    pub fn new(r: usize, k: usize) -> Self {
        Self { r, k }
    }

    /// Number of derivative conditions at `b`.
    pub fn right_multiplicity(&self) -> usize {
        self.k / 2 + 1
    }

    /// Number of derivative conditions at `a`.
    pub fn left_multiplicity(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            (self.k - 1) / 2 + 1
        }
    }
}

/// A prepared collocation scheme.
#[derive(Clone, Debug)]
pub struct CollocationOracle<R> {
    cfg: CollocationConfig,
    // interior nodes as fractions of the interval, in (0, 1)
    nodes: Vec<R>,
}

/// A monomial-form polynomial `sum c_j s^j`, `s = (t - a)/tau`, per component.
struct Monomial<'a, R> {
    c: &'a [R],
    d: usize,
    n: usize,
}

impl<'a, R: Real> Monomial<'a, R> {
    fn coeff(&self, comp: usize, j: usize) -> &R {
        &self.c[comp * self.n + j]
    }

    /// Taylor coefficients in `t` at `s = s0`, up to `order`, scaled by
    /// `tau^l` (i.e. coefficients in `s`).
    fn taylor_s(&self, comp: usize, s0: &R, order: usize) -> Vec<R> {
        (0..=order)
            .map(|l| {
                (l..self.n).fold(R::zero(), |acc, j| {
                    acc + self.coeff(comp, j).clone()
                        * binomial::<R>(j, l)
                        * s0.powi((j - l) as u32)
                })
            })
            .collect()
    }

    fn value(&self, comp: usize, s: &R) -> R {
        (0..self.n)
            .rev()
            .fold(R::zero(), |acc, j| acc * s.clone() + self.coeff(comp, j).clone())
    }

    fn slope(&self, comp: usize, s: &R) -> R {
        (1..self.n).rev().fold(R::zero(), |acc, j| {
            acc * s.clone() + self.coeff(comp, j).clone() * R::from_usize(j)
        })
    }
}

impl<R: Real> CollocationOracle<R> {
    pub fn new(cfg: CollocationConfig) -> Result<Self> {
        if cfg.k > cfg.r {
            return Err(Error::InvalidParameters(format!(
                "collocation needs 0 <= k <= r, got r={}, k={}",
                cfg.r, cfg.k
            )));
        }
        let alpha = R::from_usize(cfg.k / 2 + 1);
        let beta = R::from_usize(cfg.left_multiplicity());
        let nodes = jacobi_zeros(cfg.r - cfg.k, &alpha, &beta)?
            .into_iter()
            .map(|x| (x + R::one()) / R::from_f64(2.0))
            .collect();
        Ok(Self { cfg, nodes })
    }

    pub fn config(&self) -> CollocationConfig {
        self.cfg
    }

    /// Residual of the collocation conditions for monomial coefficients `c`
    /// (component-major, `r + 2` per component).
    fn residual(
        &self,
        problem: &OdeProblem<R>,
        a: &R,
        b: &R,
        inherited: &[R],
        c: &[R],
    ) -> Result<Vec<R>> {
        let d = problem.dim();
        let n = self.cfg.r + 2;
        let tau = b.clone() - a.clone();
        let poly = Monomial { c, d, n };
        let mut res = Vec::with_capacity(d * n);
        for comp in 0..d {
            res.push(poly.coeff(comp, 0).clone() - inherited[comp].clone());
        }
        // d^i/dt^i of (M U' - F) at an end, times tau^{i+1}
        let mut end_conditions = |t: &R, s0: &R, count: usize| -> Result<()> {
            if count == 0 {
                return Ok(());
            }
            let mut u = Vec::with_capacity(poly.d);
            let mut du = Vec::with_capacity(poly.d);
            for comp in 0..poly.d {
                let ts = poly.taylor_s(comp, s0, count);
                // coefficients in t: divide by tau^l
                let mut scale = R::one();
                let mut tc = Vec::with_capacity(count + 1);
                for v in ts {
                    tc.push(v / scale.clone());
                    scale *= tau.clone();
                }
                let jet = Jet::from_coeffs(tc);
                du.push(jet.differentiate());
                u.push(jet.truncate(count - 1));
            }
            let f = problem.rhs_taylor(t, &u, None)?;
            let mdu = problem.mass_mul_jets(&du);
            for i in 0..count {
                let w = tau.powi(i as u32 + 1);
                for comp in 0..poly.d {
                    res.push(
                        (mdu[comp].derivative(i) - f[comp].derivative(i)) * w.clone(),
                    );
                }
            }
            Ok(())
        };
        end_conditions(b, &R::one(), self.cfg.right_multiplicity())?;
        end_conditions(a, &R::zero(), self.cfg.left_multiplicity())?;
        for s in &self.nodes {
            let t = a.clone() + tau.clone() * s.clone();
            let u: Vec<R> = (0..d).map(|comp| poly.value(comp, s)).collect();
            let du: Vec<R> = (0..d).map(|comp| poly.slope(comp, s)).collect();
            let f = problem.rhs_value(&t, &u, None)?;
            let mdu = problem.mass().mul_vec(&du);
            for comp in 0..d {
                res.push(mdu[comp].clone() - f[comp].clone() * tau.clone());
            }
        }
        Ok(res)
    }

    /// Solves the local collocation problem from monomial starting values.
    pub fn solve_local(
        &self,
        problem: &OdeProblem<R>,
        a: &R,
        b: &R,
        inherited: &[R],
        guess: Vec<R>,
        settings: &NewtonSettings,
    ) -> Result<Vec<R>> {
        let f = |c: &[R]| self.residual(problem, a, b, inherited, c);
        let out = if problem.is_affine() && settings.jacobian == JacobianMode::Auto {
            solve_affine(f, guess.len())?
        } else {
            newton_solve(f, guess, settings)?
        };
        Ok(out.solution)
    }

    pub fn march(
        &self,
        problem: &OdeProblem<R>,
        mesh: &[R],
        settings: &NewtonSettings,
    ) -> Result<MeshSolution<R>> {
        validate_mesh(mesh)?;
        if mesh[0] != *problem.t0() {
            return Err(Error::InvalidMesh(format!(
                "mesh starts at {} but the problem at {}",
                mesh[0],
                problem.t0()
            )));
        }
        let d = problem.dim();
        let n = self.cfg.r + 2;
        // Taylor coefficients in t at the current left end, per component
        let mut taylor: Vec<Vec<R>> = initial_jet(problem, n - 1)?
            .into_iter()
            .map(|j| j.coeffs().to_vec())
            .collect();
        let mut inherited = problem.u0().to_vec();
        let mut pieces = Vec::with_capacity(mesh.len() - 1);
        for i in 1..mesh.len() {
            let (a, b) = (&mesh[i - 1], &mesh[i]);
            let tau = b.clone() - a.clone();
            let taylor_guess: Vec<R> = taylor
                .iter()
                .flat_map(|tc| tc.iter().enumerate().map(|(j, v)| v.clone() * tau.powi(j as u32)))
                .collect();
            let step = || -> Result<Vec<R>> {
                if problem.is_affine() && settings.jacobian == JacobianMode::Auto {
                    return self.solve_local(problem, a, b, &inherited, taylor_guess, settings);
                }
                let guesses = [
                    problem
                        .trajectory_guess(a, b, &inherited, None, n - 1)
                        .map(|g| monomial_coefficients(&g, &tau)),
                    Ok(taylor_guess),
                    LocalPolynomial::constant(a.clone(), b.clone(), &inherited, n - 1)
                        .map(|g| monomial_coefficients(&g, &tau)),
                ];
                let mut first = None;
                for guess in guesses {
                    match guess.and_then(|g| self.solve_local(problem, a, b, &inherited, g, settings)) {
                        Ok(c) => return Ok(c),
                        Err(e) if matches!(e, Error::NewtonDiverged { .. } | Error::SingularJacobian) => {
                            first.get_or_insert(e);
                        }
                        Err(e) => return Err(e),
                    }
                }
                Err(first.expect("at least one attempt"))
            };
            let c = step().map_err(|e| e.at_interval(i))?;
            let poly = Monomial { c: &c, d, n };
            taylor = (0..d)
                .map(|comp| {
                    let mut scale = R::one();
                    poly.taylor_s(comp, &R::one(), n - 1)
                        .into_iter()
                        .map(|v| {
                            let out = v / scale.clone();
                            scale *= tau.clone();
                            out
                        })
                        .collect()
                })
                .collect();
            inherited = (0..d).map(|comp| poly.value(comp, &R::one())).collect();
            pieces.push(to_legendre(a, b, &poly)?);
        }
        MeshSolution::new(mesh.to_vec(), pieces, problem.u0().to_vec())
    }
}

/// Coefficients of `p` in powers of `s = (t - a)/tau`, component-major.
fn monomial_coefficients<R: Real>(p: &LocalPolynomial<R>, tau: &R) -> Vec<R> {
    let n = p.degree() + 1;
    let mut out = vec![R::zero(); p.dim() * n];
    let mut scale = R::one();
    for j in 0..n {
        for (comp, v) in p.endpoint_derivative(Side::Left, j).into_iter().enumerate() {
            out[comp * n + j] = v * scale.clone();
        }
        scale = scale * tau.clone() / R::from_usize(j + 1);
    }
    out
}

/// `s^j = ((x + 1)/2)^j` summed into Legendre coefficients.
fn to_legendre<R: Real>(a: &R, b: &R, poly: &Monomial<'_, R>) -> Result<LocalPolynomial<R>> {
    let half = R::from_f64(0.5);
    let mut powers = vec![vec![R::one()]];
    for _ in 1..poly.n {
        let prev = powers.last().expect("non-empty");
        let next = legendre::mul_linear(prev, &-R::one())
            .into_iter()
            .map(|v| v * half.clone())
            .collect();
        powers.push(next);
    }
    let coeffs = (0..poly.d)
        .map(|comp| {
            let mut out = vec![R::zero(); poly.n];
            for (j, pj) in powers.iter().enumerate() {
                for (m, v) in pj.iter().enumerate() {
                    out[m] += poly.coeff(comp, j).clone() * v.clone();
                }
            }
            out
        })
        .collect();
    LocalPolynomial::new(a.clone(), b.clone(), coeffs)
}

/// Convenience wrapper: prepare the oracle and march.
pub fn march_collocation<R: Real>(
    cfg: CollocationConfig,
    problem: &OdeProblem<R>,
    mesh: &[R],
    settings: &NewtonSettings,
) -> Result<MeshSolution<R>> {
    CollocationOracle::new(cfg)?.march(problem, mesh, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::dahlquist;
    use approx::assert_abs_diff_eq;

    fn one_step(r: usize, k: usize, lambda: f64, tau: f64) -> f64 {
        let p = dahlquist::<f64>(lambda).unwrap();
        let sol = march_collocation(CollocationConfig::new(r, k), &p, &[0.0, tau], &NewtonSettings::default())
            .unwrap();
        sol.endpoint_value()[0]
    }

    #[test]
    fn lowest_order_is_implicit_euler() {
        assert_abs_diff_eq!(one_step(0, 0, -1.0, 0.5), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn two_stage_radau_stability() {
        for z in [-1.0, -4.0, 0.5] {
            let expect = (1.0 + z / 3.0) / (1.0 - 2.0 * z / 3.0 + z * z / 6.0);
            assert_abs_diff_eq!(one_step(1, 0, z, 1.0), expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn multiplicities() {
        let c = CollocationConfig::new(4, 3);
        assert_eq!((c.left_multiplicity(), c.right_multiplicity()), (2, 2));
        let c = CollocationConfig::new(4, 0);
        assert_eq!((c.left_multiplicity(), c.right_multiplicity()), (0, 1));
        assert!(CollocationOracle::<f64>::new(CollocationConfig::new(1, 2)).is_err());
    }
}
