//! Initial value problems `M u' = F(t, u)` on `[t0, t_end]`, their affine
//! special case `M u' = f(t) - A u`, and the Taylor coefficients of `u` at `t0`.

mod builtin;
pub mod config;

use std::fmt;
use std::sync::Arc;

pub use builtin::{builtin, dahlquist, ex1, ex2, BUILTIN_NAMES};
pub use config::{CustomProblem, ExpTrigTerm, ForcingPreset, ProblemConfig};

use crate::error::{Error, Result};
use crate::numkernel::{DenseMatrix, Jet, Lu, Real};
use crate::polynomial::{HermiteBasis, HermiteData, HermiteSpec, LocalPolynomial, TimeFunction};

/// Right-hand side `F(t, u)` evaluated along a curve `t -> (t, u(t))`.
///
/// `t` is the jet of the independent variable and `u` holds one jet per
/// component, all of the same order. The result must have that order too, and
/// its low coefficients must not depend on the requested order.
///
/// A VTD(r, k) run with postprocessing asks for jets up to order `r + 2`, so
/// `F` has to be smooth enough for those to exist along the solution.
pub trait JetRhs<R: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, t: &Jet<R>, u: &[Jet<R>]) -> Result<Vec<Jet<R>>>;
}

/// Adapts a closure to [`JetRhs`].
pub struct FnRhs<F> {
    dim: usize,
    f: F,
}

impl<F> FnRhs<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<R, F> JetRhs<R> for FnRhs<F>
where
    R: Real,
    F: Fn(&Jet<R>, &[Jet<R>]) -> Result<Vec<Jet<R>>> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: &Jet<R>, u: &[Jet<R>]) -> Result<Vec<Jet<R>>> {
        (self.f)(t, u)
    }
}

/// `F(t, u) = f(t) - A u` with constant `A`.
#[derive(Clone)]
pub struct AffineRhs<R: Real> {
    pub a: DenseMatrix<R>,
    pub f: Arc<dyn TimeFunction<R>>,
}

#[derive(Clone)]
pub enum Rhs<R: Real> {
    General(Arc<dyn JetRhs<R>>),
    Affine(AffineRhs<R>),
}

#[derive(Clone)]
pub struct OdeProblem<R: Real> {
    name: String,
    mass: DenseMatrix<R>,
    mass_lu: Lu<R>,
    rhs: Rhs<R>,
    u0: Vec<R>,
    t0: R,
    t_end: R,
    exact: Option<Arc<dyn TimeFunction<R>>>,
}

impl<R: Real> fmt::Debug for OdeProblem<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("affine", &self.is_affine())
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .finish()
    }
}

impl<R: Real> OdeProblem<R> {
    fn build(name: &str, mass: DenseMatrix<R>, rhs: Rhs<R>, u0: Vec<R>, t0: R, t_end: R) -> Result<Self> {
        let d = u0.len();
        if d == 0 || !mass.is_square() || mass.rows() != d {
            return Err(Error::DimensionMismatch(format!(
                "mass matrix is {}x{} but u0 has {d} components",
                mass.rows(),
                mass.cols()
            )));
        }
        let rhs_dim = match &rhs {
            Rhs::General(f) => f.dim(),
            Rhs::Affine(aff) => {
                if !aff.a.is_square() || aff.a.rows() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "A is {}x{} but u0 has {d} components",
                        aff.a.rows(),
                        aff.a.cols()
                    )));
                }
                aff.f.dim()
            }
        };
        if rhs_dim != d {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {rhs_dim} components, u0 has {d}"
            )));
        }
        if !(t0 < t_end) {
            return Err(Error::InvalidParameters(format!(
                "empty time interval [{t0}, {t_end}]"
            )));
        }
        let mass_lu = mass.lu().map_err(|_| Error::SingularMass)?;
        Ok(Self {
            name: name.to_string(),
            mass,
            mass_lu,
            rhs,
            u0,
            t0,
            t_end,
            exact: None,
        })
    }

    pub fn general(
        name: &str,
        mass: DenseMatrix<R>,
        rhs: Arc<dyn JetRhs<R>>,
        u0: Vec<R>,
        t0: R,
        t_end: R,
    ) -> Result<Self> {
        Self::build(name, mass, Rhs::General(rhs), u0, t0, t_end)
    }

    pub fn affine(
        name: &str,
        mass: DenseMatrix<R>,
        a: DenseMatrix<R>,
        f: Arc<dyn TimeFunction<R>>,
        u0: Vec<R>,
        t0: R,
        t_end: R,
    ) -> Result<Self> {
        Self::build(name, mass, Rhs::Affine(AffineRhs { a, f }), u0, t0, t_end)
    }

    /// Attaches a closed-form solution used for error measurement.
    pub fn with_exact(mut self, exact: Arc<dyn TimeFunction<R>>) -> Result<Self> {
        if exact.dim() != self.dim() {
            return Err(Error::DimensionMismatch(
                "exact solution has the wrong number of components".into(),
            ));
        }
        self.exact = Some(exact);
        Ok(self)
    }

    /// Same problem on `[t0, t_end]`.
    pub fn with_end_time(mut self, t_end: R) -> Result<Self> {
        if !(self.t0 < t_end) {
            return Err(Error::InvalidParameters(format!(
                "end time {t_end} is not after t0 = {}",
                self.t0
            )));
        }
        self.t_end = t_end;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    pub fn mass(&self) -> &DenseMatrix<R> {
        &self.mass
    }

    pub fn rhs(&self) -> &Rhs<R> {
        &self.rhs
    }

    pub fn u0(&self) -> &[R] {
        &self.u0
    }

    pub fn t0(&self) -> &R {
        &self.t0
    }

    pub fn t_end(&self) -> &R {
        &self.t_end
    }

    pub fn exact(&self) -> Option<&Arc<dyn TimeFunction<R>>> {
        self.exact.as_ref()
    }

    pub fn affine_part(&self) -> Option<&AffineRhs<R>> {
        match &self.rhs {
            Rhs::Affine(aff) => Some(aff),
            Rhs::General(_) => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        self.affine_part().is_some()
    }

    pub fn mass_solve(&self, b: &[R]) -> Vec<R> {
        self.mass_lu.solve(b)
    }

    /// `M` applied componentwise to a vector of jets.
    pub fn mass_mul_jets(&self, u: &[Jet<R>]) -> Vec<Jet<R>> {
        mat_mul_jets(&self.mass, u)
    }

    /// Taylor jets of `F(t, u(t))` at `t`, of the same order as `u`.
    ///
    /// `forcing` replaces `f` of an affine problem; it is rejected for general
    /// problems.
    pub fn rhs_taylor(
        &self,
        t: &R,
        u: &[Jet<R>],
        forcing: Option<&dyn TimeFunction<R>>,
    ) -> Result<Vec<Jet<R>>> {
        let order = u.first().map(Jet::order).unwrap_or(0);
        match &self.rhs {
            Rhs::General(f) => {
                if forcing.is_some() {
                    return Err(Error::InvalidParameters(
                        "a replacement forcing needs an affine-linear problem".into(),
                    ));
                }
                f.eval(&Jet::variable(t.clone(), order), u)
            }
            Rhs::Affine(aff) => {
                let g = forcing.unwrap_or(aff.f.as_ref()).taylor(t, order)?;
                let au = mat_mul_jets(&aff.a, u);
                Ok(g.iter().zip(&au).map(|(gi, ai)| gi - ai).collect())
            }
        }
    }

    /// `F(t, u)` for plain values.
    pub fn rhs_value(&self, t: &R, u: &[R], forcing: Option<&dyn TimeFunction<R>>) -> Result<Vec<R>> {
        let jets: Vec<Jet<R>> = u.iter().map(|v| Jet::constant(v.clone(), 0)).collect();
        Ok(self
            .rhs_taylor(t, &jets, forcing)?
            .into_iter()
            .map(|j| j.value())
            .collect())
    }

    /// `u' = M^{-1} F(t, u)` for plain values.
    fn slope(&self, t: &R, u: &[R], forcing: Option<&dyn TimeFunction<R>>) -> Result<Vec<R>> {
        Ok(self.mass_solve(&self.rhs_value(t, u, forcing)?))
    }

    /// Degree-`degree` interpolant, at Chebyshev points of `[a, b]`, of a
    /// classical Runge-Kutta trajectory started from `u_a` at `a`. Serves as
    /// a Newton starting guess when extrapolation fails.
    pub fn trajectory_guess(
        &self,
        a: &R,
        b: &R,
        u_a: &[R],
        forcing: Option<&dyn TimeFunction<R>>,
        degree: usize,
    ) -> Result<LocalPolynomial<R>> {
        let m = degree + 1;
        let nodes: Vec<R> = (0..m)
            .rev()
            .map(|i| R::from_f64((std::f64::consts::PI * (2 * i + 1) as f64 / (2 * m) as f64).cos()))
            .collect();
        let tau = b.clone() - a.clone();
        let substeps = 16 * m;
        let half = R::from_f64(0.5);
        let axpy = |u: &[R], s: &R, k: &[R]| -> Vec<R> {
            u.iter().zip(k).map(|(x, y)| x.clone() + s.clone() * y.clone()).collect()
        };
        let mut t = a.clone();
        let mut u = u_a.to_vec();
        let mut samples = Vec::with_capacity(m);
        for x in &nodes {
            let target = a.clone() + (x.clone() + R::one()) * half.clone() * tau.clone();
            let span = target.clone() - t.clone();
            let steps = ((span.to_f64() / tau.to_f64()) * substeps as f64).ceil().max(1.0) as usize;
            let h = span / R::from_usize(steps);
            for _ in 0..steps {
                let hh = h.clone() * half.clone();
                let k1 = self.slope(&t, &u, forcing)?;
                let k2 = self.slope(&(t.clone() + hh.clone()), &axpy(&u, &hh, &k1), forcing)?;
                let k3 = self.slope(&(t.clone() + hh.clone()), &axpy(&u, &hh, &k2), forcing)?;
                let k4 = self.slope(&(t.clone() + h.clone()), &axpy(&u, &h, &k3), forcing)?;
                let sixth = h.clone() / R::from_usize(6);
                for c in 0..u.len() {
                    let incr = k1[c].clone() + R::from_usize(2) * (k2[c].clone() + k3[c].clone()) + k4[c].clone();
                    u[c] += sixth.clone() * incr;
                }
                t += h.clone();
            }
            samples.push(u.clone());
        }
        let basis = HermiteBasis::new(HermiteSpec {
            left_orders: 0,
            right_orders: 0,
            interior_nodes: nodes,
        })?;
        basis.interpolate(
            a,
            b,
            &HermiteData {
                left: Vec::new(),
                interior: samples,
                right: Vec::new(),
            },
        )
    }

    pub fn exact_solution(&self, t: &R) -> Result<Vec<R>> {
        match &self.exact {
            Some(u) => u.value(t),
            None => Err(Error::UnknownProblem(format!(
                "no closed-form solution for '{}'",
                self.name
            ))),
        }
    }
}

pub(crate) fn mat_mul_jets<R: Real>(m: &DenseMatrix<R>, u: &[Jet<R>]) -> Vec<Jet<R>> {
    (0..m.rows())
        .map(|i| {
            let mut acc = u[0].scale(&m[(i, 0)]);
            for (j, uj) in u.iter().enumerate().skip(1) {
                if !m[(i, j)].is_zero() {
                    acc = &acc + &uj.scale(&m[(i, j)]);
                }
            }
            acc
        })
        .collect()
}

/// Taylor jets of `u` at `t0` up to order `order`, one per component.
///
/// The coefficient `c_j` follows from `j M c_j = [F(t, u(t))]_{j-1}`, where
/// the right side is the coefficient of order `j - 1` of `F` propagated along
/// the already known truncation `c_0..c_{j-1}`.
pub fn initial_jet<R: Real>(problem: &OdeProblem<R>, order: usize) -> Result<Vec<Jet<R>>> {
    let d = problem.dim();
    let mut c: Vec<Vec<R>> = vec![problem.u0().to_vec()];
    for j in 1..=order {
        let u: Vec<Jet<R>> = (0..d)
            .map(|m| Jet::from_coeffs(c.iter().map(|cl| cl[m].clone()).collect()))
            .collect();
        let f = problem.rhs_taylor(problem.t0(), &u, None)?;
        let top: Vec<R> = f.iter().map(|fj| fj.coeff(j - 1)).collect();
        let jr = R::from_usize(j);
        c.push(problem.mass_solve(&top).into_iter().map(|v| v / jr.clone()).collect());
    }
    Ok(to_jets(&c, d))
}

/// The same coefficients for affine problems from the recursion
/// `M u^{(j)} = f^{(j-1)} - A u^{(j-1)}`, without propagating `F`.
pub fn initial_jet_affine<R: Real>(problem: &OdeProblem<R>, order: usize) -> Result<Vec<Jet<R>>> {
    let aff = problem.affine_part().ok_or_else(|| {
        Error::InvalidParameters(format!("'{}' is not affine-linear", problem.name()))
    })?;
    let d = problem.dim();
    let f = aff.f.taylor(problem.t0(), order.saturating_sub(1))?;
    let mut c: Vec<Vec<R>> = vec![problem.u0().to_vec()];
    for j in 1..=order {
        let au = aff.a.mul_vec(&c[j - 1]);
        let rhs: Vec<R> = (0..d).map(|m| f[m].coeff(j - 1) - au[m].clone()).collect();
        let jr = R::from_usize(j);
        c.push(problem.mass_solve(&rhs).into_iter().map(|v| v / jr.clone()).collect());
    }
    Ok(to_jets(&c, d))
}

fn to_jets<R: Real>(c: &[Vec<R>], d: usize) -> Vec<Jet<R>> {
    (0..d)
        .map(|m| Jet::from_coeffs(c.iter().map(|cl| cl[m].clone()).collect()))
        .collect()
}

/// `f(t) = 0` in `d` components.
#[derive(Clone, Debug)]
pub struct ZeroFunction {
    pub dim: usize,
}

impl<R: Real> TimeFunction<R> for ZeroFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn taylor(&self, _t: &R, order: usize) -> Result<Vec<Jet<R>>> {
        Ok(vec![Jet::constant(R::zero(), order); self.dim])
    }
}

/// A time function given by a closure on the jet of `t`.
pub struct JetFunction<F> {
    dim: usize,
    f: F,
}

impl<F> JetFunction<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<R, F> TimeFunction<R> for JetFunction<F>
where
    R: Real,
    F: Fn(&Jet<R>) -> Result<Vec<Jet<R>>> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn taylor(&self, t: &R, order: usize) -> Result<Vec<Jet<R>>> {
        (self.f)(&Jet::variable(t.clone(), order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ex1_first_derivative() {
        let p = ex1::<f64>().unwrap();
        let jet = initial_jet(&p, 1).unwrap();
        assert_abs_diff_eq!(jet[0].derivative(1), -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(jet[1].derivative(1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn ex2_first_derivative() {
        let p = ex2::<f64>().unwrap();
        let f0 = p.affine_part().unwrap().f.value(&0.0).unwrap();
        assert_abs_diff_eq!(f0[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f0[1], -4.0, epsilon = 1e-15);
        let jet = initial_jet(&p, 1).unwrap();
        assert_abs_diff_eq!(jet[0].derivative(1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jet[1].derivative(1), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn autonomous_zero_rhs_has_flat_jet() {
        let rhs = Arc::new(FnRhs::new(1, |t: &Jet<f64>, _u: &[Jet<f64>]| {
            Ok(vec![Jet::constant(0.0, t.order())])
        }));
        let p = OdeProblem::general("flat", DenseMatrix::identity(1), rhs, vec![3.0], 0.0, 1.0).unwrap();
        let jet = initial_jet(&p, 5).unwrap();
        assert_eq!(jet[0].coeffs(), &[3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn closed_form_values() {
        let p = ex1::<f64>().unwrap();
        let u = p.exact_solution(&std::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(u[0], 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(u[1], 1.0 / 3.0, epsilon = 1e-16);
        assert_eq!(p.exact_solution(&0.0).unwrap(), vec![0.5, 0.0]);

        let p = ex2::<f64>().unwrap();
        let e = std::f64::consts::E;
        let u = p.exact_solution(&1.0).unwrap();
        assert_abs_diff_eq!(u[0], 2.0 * e, epsilon = 1e-14);
        assert_abs_diff_eq!(u[1], -e, epsilon = 1e-14);
        assert_eq!(p.exact_solution(&0.0).unwrap(), vec![0.0, 0.0]);

        let p = dahlquist::<f64>(-1.0).unwrap();
        assert_abs_diff_eq!(p.exact_solution(&1.0).unwrap()[0], (-1.0f64).exp(), epsilon = 1e-16);
    }

    #[test]
    fn initial_jets_match_exact_derivatives() {
        for p in [ex1::<f64>().unwrap(), ex2::<f64>().unwrap()] {
            let jet = initial_jet(&p, 6).unwrap();
            let exact = p.exact().unwrap().taylor(&0.0, 6).unwrap();
            for (a, b) in jet.iter().zip(&exact) {
                for j in 0..=6 {
                    assert!(
                        (a.derivative(j) - b.derivative(j)).abs() <= 1e-10,
                        "{}: derivative {j}",
                        p.name()
                    );
                }
            }
        }
    }

    #[test]
    fn affine_recursion_matches_general_path() {
        let p = ex2::<f64>().unwrap();
        let a = initial_jet(&p, 8).unwrap();
        let b = initial_jet_affine(&p, 8).unwrap();
        for (x, y) in a.iter().zip(&b) {
            for j in 0..=8 {
                assert_abs_diff_eq!(x.coeff(j), y.coeff(j), epsilon = 1e-12);
            }
        }
        assert!(initial_jet_affine(&ex1::<f64>().unwrap(), 2).is_err());
    }

    #[test]
    fn forcing_matches_manufactured_solution() {
        // f = M u' + A u along the exact solution
        let p = ex2::<f64>().unwrap();
        let aff = p.affine_part().unwrap();
        for &t in &[0.0, 0.3, 0.77, 1.0] {
            let u = p.exact().unwrap().taylor(&t, 1).unwrap();
            let v: Vec<f64> = u.iter().map(|j| j.value()).collect();
            let du: Vec<f64> = u.iter().map(|j| j.derivative(1)).collect();
            let mdu = p.mass().mul_vec(&du);
            let au = aff.a.mul_vec(&v);
            let f = aff.f.value(&t).unwrap();
            for c in 0..2 {
                assert_abs_diff_eq!(f[c], mdu[c] + au[c], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn singular_mass_is_rejected() {
        let m = DenseMatrix::from_f64_rows(&[&[1.0, 1.0], &[2.0, 2.0]]).unwrap();
        let res = OdeProblem::affine(
            "bad",
            m,
            DenseMatrix::identity(2),
            Arc::new(ZeroFunction { dim: 2 }),
            vec![0.0, 0.0],
            0.0,
            1.0,
        );
        assert!(matches!(res, Err(Error::SingularMass)));
    }

    #[test]
    fn forcing_override_requires_affine_problem() {
        let p = ex1::<f64>().unwrap();
        let z = ZeroFunction { dim: 2 };
        assert!(p.rhs_value(&0.0, &[0.5, 0.0], Some(&z)).is_err());
    }
}
