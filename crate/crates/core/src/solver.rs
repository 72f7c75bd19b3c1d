//! The local VTD(r,k) problem on one interval, time marching over a mesh, and
//! the stability function.
//!
//! On `I_n = (a, b]` with `h = (b - a)/2` and defect `G = M U' - F(t, U)`, the
//! local residual stacks, per component:
//!
//! 1. `U(a) - U(a^-)` if `k >= 1`;
//! 2. `h^{i+1} G^{(i)}(b)` for `i < floor(k/2)`;
//! 3. `h^{i+1} G^{(i)}(a)` for `i < floor((k-1)/2)`;
//! 4. `Q[G P_m] + delta_{k0} (M (U(a) - U(a^-))) P_m(-1)` for the Legendre
//!    polynomials `P_m`, `m <= r - k`, where `Q` is the chosen integrator.
//!
//! These are `r + 1` blocks, matching the unknowns of `U` in `P_r`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{
    factorial, newton_solve, norm_inf, solve_affine, DenseMatrix, JacobianMode, Jet,
    NewtonSettings, Real,
};
use crate::polynomial::{legendre, HermiteBasis, HermiteData, HermiteSpec, LocalPolynomial, Side, TimeFunction};
use crate::problem::{initial_jet, OdeProblem, ZeroFunction};
use crate::quadrature::{build_rule, QuadratureRule};
use crate::solution::{validate_mesh, MeshSolution};

/// How the variational integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// The rule `Q^{r,k}` of the method itself.
    #[default]
    Associated,
    /// An explicit rule `Q^{r,k}` with its own parameters.
    Rule { r: usize, k: usize },
    /// Gauss-Legendre with `2r + 2` points: exact for polynomial right-hand
    /// sides of degree up to `2r + 1`, an approximation otherwise.
    Exact,
}

impl Integrator {
    fn rule<R: Real>(&self, r: usize, k: usize) -> Result<QuadratureRule<R>> {
        match *self {
            Integrator::Associated => Ok(build_rule(r, k)?.rule),
            Integrator::Rule { r, k } => Ok(build_rule(r, k)?.rule),
            Integrator::Exact => QuadratureRule::gauss_legendre(2 * r + 2),
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrator::Associated => write!(f, "assoc"),
            Integrator::Exact => write!(f, "exact"),
            Integrator::Rule { r, k } => write!(f, "q{r},{k}"),
        }
    }
}

impl FromStr for Integrator {
    type Err = Error;

    /// `assoc`, `exact`, or `q<r>,<k>` (also `q<r><k>` for single digits).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "assoc" | "associated" => return Ok(Integrator::Associated),
            "exact" => return Ok(Integrator::Exact),
            _ => {}
        }
        let bad = || Error::Config(format!("unknown integrator '{s}' (use assoc, exact or qR,K)"));
        let body = s.strip_prefix('q').ok_or_else(bad)?;
        let body = body.strip_prefix(':').unwrap_or(body);
        let (r, k) = match body.split_once(',') {
            Some((r, k)) => (r.trim(), k.trim()),
            None if body.len() == 2 && body.is_char_boundary(1) => (&body[..1], &body[1..]),
            None => return Err(bad()),
        };
        let r = r.parse().map_err(|_| bad())?;
        let k = k.parse().map_err(|_| bad())?;
        if k > r {
            return Err(Error::Config(format!("integrator Q^{{{r},{k}}} needs k <= r")));
        }
        Ok(Integrator::Rule { r, k })
    }
}

/// One polynomial per mesh interval that replaces `f` of an affine problem.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseForcing<R> {
    pieces: Vec<LocalPolynomial<R>>,
}

impl<R: Real> PiecewiseForcing<R> {
    pub fn new(pieces: Vec<LocalPolynomial<R>>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParameters("piecewise forcing without pieces".into()));
        }
        let dim = pieces[0].dim();
        for w in pieces.windows(2) {
            if w[0].b() != w[1].a() || w[1].dim() != dim {
                return Err(Error::InvalidParameters(
                    "forcing pieces must be contiguous and of equal dimension".into(),
                ));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[LocalPolynomial<R>] {
        &self.pieces
    }

    /// Piece on interval `n = 1..=N`.
    pub fn piece(&self, n: usize) -> &LocalPolynomial<R> {
        &self.pieces[n - 1]
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    pub fn matches_mesh(&self, mesh: &[R]) -> bool {
        self.pieces.len() + 1 == mesh.len()
            && self
                .pieces
                .iter()
                .enumerate()
                .all(|(n, p)| *p.a() == mesh[n] && *p.b() == mesh[n + 1])
    }

    /// Piecewise derivative.
    pub fn derivative(&self) -> Self {
        Self {
            pieces: self.pieces.iter().map(LocalPolynomial::derivative).collect(),
        }
    }
}

/// Method parameters: trial degree `r`, smoothness parameter `0 <= k <= r+1`,
/// the integrator and an optional replacement forcing.
#[derive(Clone, Debug)]
pub struct VtdConfig<R> {
    pub r: usize,
    pub k: usize,
    pub integrator: Integrator,
    pub forcing: Option<Arc<PiecewiseForcing<R>>>,
}

impl<R: Real> VtdConfig<R> {
    pub fn new(r: usize, k: usize) -> Self {
        Self {
            r,
            k,
            integrator: Integrator::Associated,
            forcing: None,
        }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_forcing(mut self, forcing: PiecewiseForcing<R>) -> Self {
        self.forcing = Some(Arc::new(forcing));
        self
    }
}

/// A [`VtdConfig`] with its quadrature rule and basis tables prepared.
#[derive(Clone, Debug)]
pub struct VtdMethod<R> {
    r: usize,
    k: usize,
    integrator: Integrator,
    rule: Option<QuadratureRule<R>>,
    forcing: Option<Arc<PiecewiseForcing<R>>>,
    // Legendre P_j and P_j' at the interior nodes, j <= r
    node_values: Vec<Vec<R>>,
    node_derivs: Vec<Vec<R>>,
    // reference Taylor coefficients P_m^{(l)}(-/+1) / l! of the test functions
    left_test: Vec<Vec<R>>,
    right_test: Vec<Vec<R>>,
    taylor_basis: HermiteBasis<R>,
}

impl<R: Real> VtdMethod<R> {
    pub fn new(cfg: &VtdConfig<R>) -> Result<Self> {
        let (r, k) = (cfg.r, cfg.k);
        if k > r + 1 {
            return Err(Error::InvalidParameters(format!(
                "VTD(r,k) needs 0 <= k <= r+1, got r={r}, k={k}"
            )));
        }
        let rule = if k <= r {
            Some(cfg.integrator.rule::<R>(r, k)?)
        } else {
            None
        };
        let (mut node_values, mut node_derivs) = (Vec::new(), Vec::new());
        let (mut left_test, mut right_test) = (Vec::new(), Vec::new());
        if let Some(q) = &rule {
            for x in &q.interior_nodes {
                let (v, d) = legendre::values_and_derivatives(x, r);
                node_values.push(v);
                node_derivs.push(d);
            }
            let table = |orders: usize, side: Side| -> Vec<Vec<R>> {
                (0..=r - k)
                    .map(|m| {
                        (0..orders)
                            .map(|l| {
                                let d = match side {
                                    Side::Left => legendre::left_endpoint_derivative::<R>(m, l),
                                    Side::Right => legendre::right_endpoint_derivative::<R>(m, l),
                                };
                                d / factorial::<R>(l)
                            })
                            .collect()
                    })
                    .collect()
            };
            left_test = table(q.left_orders(), Side::Left);
            right_test = table(q.right_orders(), Side::Right);
        }
        let taylor_basis = HermiteBasis::new(HermiteSpec {
            left_orders: r + 1,
            right_orders: 0,
            interior_nodes: Vec::new(),
        })?;
        Ok(Self {
            r,
            k,
            integrator: cfg.integrator,
            rule,
            forcing: cfg.forcing.clone(),
            node_values,
            node_derivs,
            left_test,
            right_test,
            taylor_basis,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    /// The variational integrator, `None` when `k = r + 1`.
    pub fn rule(&self) -> Option<&QuadratureRule<R>> {
        self.rule.as_ref()
    }

    pub fn forcing(&self) -> Option<&PiecewiseForcing<R>> {
        self.forcing.as_deref()
    }

    /// Conditions `M U^{(i+1)} = (d/dt)^i F` at the right end: `floor(k/2)`.
    pub fn right_point_conditions(&self) -> usize {
        self.k / 2
    }

    /// Conditions at the left end: `floor((k-1)/2)` for `k >= 1`.
    pub fn left_point_conditions(&self) -> usize {
        self.k.saturating_sub(1) / 2
    }

    /// Dimension of the test space `P_{r-k}`.
    pub fn test_functions(&self) -> usize {
        (self.r + 1).saturating_sub(self.k)
    }

    /// Residual rows per component.
    pub fn block_count(&self) -> usize {
        usize::from(self.k >= 1)
            + self.right_point_conditions()
            + self.left_point_conditions()
            + self.test_functions()
    }

    /// Reference-scaled Taylor coefficients `h^i G^{(i)} / i!`, `i < orders`,
    /// of the defect at one end, indexed `[component][i]`.
    fn endpoint_defect(
        &self,
        problem: &OdeProblem<R>,
        u: &LocalPolynomial<R>,
        side: Side,
        orders: usize,
        forcing: Option<&dyn TimeFunction<R>>,
    ) -> Result<Vec<Vec<R>>> {
        let t = match side {
            Side::Left => u.a(),
            Side::Right => u.b(),
        };
        let h = u.half_tau();
        let jets = u.endpoint_taylor(side, orders);
        let du: Vec<Jet<R>> = jets.iter().map(Jet::differentiate).collect();
        let ut: Vec<Jet<R>> = jets.iter().map(|j| j.truncate(orders - 1)).collect();
        let f = problem.rhs_taylor(t, &ut, forcing)?;
        let mdu = problem.mass_mul_jets(&du);
        Ok(mdu
            .iter()
            .zip(&f)
            .map(|(m, fc)| {
                let mut hp = R::one();
                (0..orders)
                    .map(|i| {
                        let v = (m.coeff(i) - fc.coeff(i)) * hp.clone();
                        hp *= h.clone();
                        v
                    })
                    .collect()
            })
            .collect())
    }

    /// Residual of the local problem on the interval of `u`; `inherited` is
    /// `U(a^-)` (or `u0` on the first interval).
    pub fn assemble_local_residual(
        &self,
        problem: &OdeProblem<R>,
        inherited: &[R],
        forcing: Option<&dyn TimeFunction<R>>,
        u: &LocalPolynomial<R>,
    ) -> Result<Vec<R>> {
        let d = problem.dim();
        if u.dim() != d || inherited.len() != d {
            return Err(Error::DimensionMismatch(
                "local polynomial and problem dimension differ".into(),
            ));
        }
        let h = u.half_tau();
        let (rule_l, rule_r) = self
            .rule
            .as_ref()
            .map(|q| (q.left_orders(), q.right_orders()))
            .unwrap_or((0, 0));
        let (n_right, n_left) = (self.right_point_conditions(), self.left_point_conditions());
        let n_b = n_right.max(rule_r);
        let n_a = n_left.max(rule_l);
        let g_b = if n_b > 0 {
            self.endpoint_defect(problem, u, Side::Right, n_b, forcing)?
        } else {
            Vec::new()
        };
        let g_a = if n_a > 0 {
            self.endpoint_defect(problem, u, Side::Left, n_a, forcing)?
        } else {
            Vec::new()
        };
        let u_a = u.endpoint_derivative(Side::Left, 0);
        let jump: Vec<R> = u_a
            .iter()
            .zip(inherited)
            .map(|(x, y)| x.clone() - y.clone())
            .collect();

        let mut res = Vec::with_capacity(self.block_count() * d);
        if self.k >= 1 {
            res.extend(jump.iter().cloned());
        }
        for (i, g) in [(n_right, &g_b), (n_left, &g_a)]
            .into_iter()
            .flat_map(|(n, g)| (0..n).map(move |i| (i, g)))
        {
            let scale = h.clone() * factorial::<R>(i);
            res.extend(g.iter().map(|gc| gc[i].clone() * scale.clone()));
        }

        if let Some(rule) = &self.rule {
            let coeffs = u.coeffs();
            let nodes = rule.mapped_nodes(u.a(), u.b());
            let mut g_int = Vec::with_capacity(nodes.len());
            for (q, t) in nodes.iter().enumerate() {
                let (vals, ders) = (&self.node_values[q], &self.node_derivs[q]);
                let uq: Vec<R> = coeffs
                    .iter()
                    .map(|c| dot(c, vals))
                    .collect();
                let duq: Vec<R> = coeffs
                    .iter()
                    .map(|c| dot(c, ders) / h.clone())
                    .collect();
                let f = problem.rhs_value(t, &uq, forcing)?;
                let mdu = problem.mass().mul_vec(&duq);
                g_int.push(
                    mdu.into_iter()
                        .zip(f)
                        .map(|(m, fc)| m - fc)
                        .collect::<Vec<R>>(),
                );
            }
            let mjump = if self.k == 0 {
                problem.mass().mul_vec(&jump)
            } else {
                Vec::new()
            };
            for m in 0..self.test_functions() {
                for c in 0..d {
                    let mut s = R::zero();
                    for (i, w) in rule.left_weights.iter().enumerate() {
                        s += w.clone() * factorial::<R>(i) * cauchy(&g_a[c], &self.left_test[m], i);
                    }
                    for (q, w) in rule.interior_weights.iter().enumerate() {
                        s += w.clone() * g_int[q][c].clone() * self.node_values[q][m].clone();
                    }
                    for (i, w) in rule.right_weights.iter().enumerate() {
                        s += w.clone() * factorial::<R>(i) * cauchy(&g_b[c], &self.right_test[m], i);
                    }
                    let mut v = h.clone() * s;
                    if self.k == 0 {
                        let p = if m % 2 == 0 { mjump[c].clone() } else { -mjump[c].clone() };
                        v += p;
                    }
                    res.push(v);
                }
            }
        }
        Ok(res)
    }

    /// Solves the local problem on `[a, b]`, starting Newton at `guess`.
    /// Affine problems take a single linear solve unless the settings force
    /// finite-difference Newton.
    #[allow(clippy::too_many_arguments)]
    pub fn solve_local(
        &self,
        problem: &OdeProblem<R>,
        a: &R,
        b: &R,
        inherited: &[R],
        forcing: Option<&dyn TimeFunction<R>>,
        guess: &LocalPolynomial<R>,
        settings: &NewtonSettings,
    ) -> Result<LocalPolynomial<R>> {
        let d = problem.dim();
        let f = |x: &[R]| -> Result<Vec<R>> {
            let u = LocalPolynomial::from_flat(a.clone(), b.clone(), d, x)?;
            self.assemble_local_residual(problem, inherited, forcing, &u)
        };
        let out = if problem.is_affine() && settings.jacobian == JacobianMode::Auto {
            solve_affine(f, d * (self.r + 1))?
        } else {
            let x0 = guess.with_degree(self.r).to_flat();
            newton_solve(f, x0, settings)?
        };
        LocalPolynomial::from_flat(a.clone(), b.clone(), d, &out.solution)
    }

    /// Degree-`r` Taylor polynomial of the given jets at `a`.
    pub fn taylor_guess(&self, a: &R, b: &R, jets: &[Jet<R>]) -> Result<LocalPolynomial<R>> {
        let data = HermiteData {
            left: (0..=self.r)
                .map(|i| jets.iter().map(|j| j.derivative(i)).collect())
                .collect(),
            interior: Vec::new(),
            right: Vec::new(),
        };
        self.taylor_basis.interpolate(a, b, &data)
    }

    fn forcing_piece(&self, n: usize) -> Option<&dyn TimeFunction<R>> {
        self.forcing
            .as_ref()
            .map(|f| f.piece(n) as &dyn TimeFunction<R>)
    }

    fn check_mesh(&self, problem: &OdeProblem<R>, mesh: &[R]) -> Result<()> {
        validate_mesh(mesh)?;
        if mesh[0] != *problem.t0() {
            return Err(Error::InvalidMesh(format!(
                "mesh starts at {} but the problem at {}",
                mesh[0],
                problem.t0()
            )));
        }
        if let Some(f) = &self.forcing {
            if !f.matches_mesh(mesh) {
                return Err(Error::InvalidParameters(
                    "replacement forcing does not match the mesh".into(),
                ));
            }
            if !problem.is_affine() {
                return Err(Error::InvalidParameters(
                    "a replacement forcing needs an affine-linear problem".into(),
                ));
            }
        }
        Ok(())
    }

    /// Solves the local problems one interval after another.
    pub fn march(
        &self,
        problem: &OdeProblem<R>,
        mesh: &[R],
        settings: &NewtonSettings,
    ) -> Result<MeshSolution<R>> {
        self.check_mesh(problem, mesh)?;
        let jets = initial_jet(problem, self.r)?;
        let mut pieces: Vec<LocalPolynomial<R>> = Vec::with_capacity(mesh.len() - 1);
        let mut inherited = problem.u0().to_vec();
        for n in 1..mesh.len() {
            let (a, b) = (&mesh[n - 1], &mesh[n]);
            let forcing = self.forcing_piece(n);
            let step = || -> Result<LocalPolynomial<R>> {
                if problem.is_affine() && settings.jacobian == JacobianMode::Auto {
                    let unused = LocalPolynomial::constant(a.clone(), b.clone(), &inherited, self.r)?;
                    return self.solve_local(problem, a, b, &inherited, forcing, &unused, settings);
                }
                // the flow from the inherited value picks the right root when
                // several exist; extrapolation and a constant are fallbacks
                let extrapolated = match pieces.last() {
                    None => self.taylor_guess(a, b, &jets),
                    Some(p) => p.reexpand(a.clone(), b.clone()),
                };
                let guesses = [
                    problem.trajectory_guess(a, b, &inherited, forcing, self.r),
                    extrapolated,
                    LocalPolynomial::constant(a.clone(), b.clone(), &inherited, self.r),
                ];
                let mut first = None;
                for guess in guesses {
                    let attempt = guess.and_then(|g| self.solve_local(problem, a, b, &inherited, forcing, &g, settings));
                    match attempt {
                        Ok(u) => return Ok(u),
                        Err(e) if matches!(e, Error::NewtonDiverged { .. } | Error::SingularJacobian) => {
                            first.get_or_insert(e);
                        }
                        Err(e) => return Err(e),
                    }
                }
                Err(first.expect("at least one attempt"))
            };
            let u = step().map_err(|e| e.at_interval(n))?;
            inherited = u.endpoint_derivative(Side::Right, 0);
            pieces.push(u);
        }
        MeshSolution::new(mesh.to_vec(), pieces, problem.u0().to_vec())
    }

    /// Largest local residual (max norm) of a given trajectory, each interval
    /// inheriting the left limit of the trajectory itself.
    pub fn solution_residual(&self, problem: &OdeProblem<R>, sol: &MeshSolution<R>) -> Result<R> {
        self.check_mesh(problem, sol.mesh())?;
        let mut worst = R::zero();
        for n in 1..=sol.n_intervals() {
            let inherited = sol.left_limit(n - 1, 0);
            let res = self
                .assemble_local_residual(problem, &inherited, self.forcing_piece(n), sol.piece(n))
                .map_err(|e| e.at_interval(n))?;
            worst = R::max_of(worst, norm_inf(&res));
        }
        Ok(worst)
    }
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter()
        .zip(b)
        .fold(R::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Coefficient `i` of the product of two truncated series.
fn cauchy<R: Real>(a: &[R], b: &[R], i: usize) -> R {
    (0..=i).fold(R::zero(), |acc, l| acc + a[l].clone() * b[i - l].clone())
}

/// Convenience wrapper: prepare the method and march.
pub fn march<R: Real>(
    cfg: &VtdConfig<R>,
    problem: &OdeProblem<R>,
    mesh: &[R],
    settings: &NewtonSettings,
) -> Result<MeshSolution<R>> {
    VtdMethod::new(cfg)?.march(problem, mesh, settings)
}

/// `R(z)`: the value after one step of length one for `u' = z u`, `u(0) = 1`.
///
/// The complex scalar equation is solved as the real system for
/// `(Re u, Im u)`.
pub fn stability_function(cfg: &VtdConfig<f64>, z: Complex64) -> Result<Complex64> {
    if cfg.forcing.is_some() {
        return Err(Error::InvalidParameters(
            "the stability function takes no replacement forcing".into(),
        ));
    }
    let method = VtdMethod::new(cfg)?;
    let a = DenseMatrix::from_f64_rows(&[&[-z.re, z.im], &[-z.im, -z.re]])?;
    let problem = OdeProblem::affine(
        "stability",
        DenseMatrix::identity(2),
        a,
        Arc::new(ZeroFunction { dim: 2 }),
        vec![1.0, 0.0],
        0.0,
        1.0,
    )?;
    let guess = LocalPolynomial::constant(0.0, 1.0, &[1.0, 0.0], cfg.r)?;
    let settings = NewtonSettings::default();
    let u = method
        .solve_local(&problem, &0.0, &1.0, &[1.0, 0.0], None, &guess, &settings)
        .map_err(|e| match e {
            Error::SingularJacobian => Error::SingularSystem,
            e => e,
        })?;
    let v = u.endpoint_derivative(Side::Right, 0);
    Ok(Complex64::new(v[0], v[1]))
}
