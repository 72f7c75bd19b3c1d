//! Lifting a discrete solution `U` in `P_r` to `U~ = U + a_n theta_n` in
//! `P_{r+1}`, either from the defect at `t_n^-` (residual variant) or from
//! derivative jumps at `t_{n-1}` (jump variant); repeated lifting, the
//! interpolation cascade for the forcing, and the reverse map `I^{r,k}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::Real;
use crate::polynomial::{theta_polynomial, LocalPolynomial, Normalization, Side, TimeFunction};
use crate::problem::{initial_jet, OdeProblem};
use crate::quadrature::{build_rule, VtdQuadrature};
use crate::solution::{validate_mesh, MeshSolution};
use crate::solver::PiecewiseForcing;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PostprocessVariant {
    /// Correction from derivative jumps; no linear solve.
    #[default]
    Jump,
    /// Correction from the defect of the ODE at the right end.
    Residual,
}

impl fmt::Display for PostprocessVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PostprocessVariant::Jump => "jump",
            PostprocessVariant::Residual => "residual",
        })
    }
}

impl FromStr for PostprocessVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "jump" => Ok(PostprocessVariant::Jump),
            "residual" => Ok(PostprocessVariant::Residual),
            other => Err(Error::Config(format!(
                "unknown postprocessing '{other}' (use jump or residual)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostprocessMode {
    pub variant: PostprocessVariant,
    pub steps: usize,
}

impl PostprocessMode {
    pub fn new(variant: PostprocessVariant, steps: usize) -> Self {
        Self { variant, steps }
    }
}

fn rule_for<R: Real>(r: usize, k: usize) -> Result<VtdQuadrature<R>> {
    if k > r {
        return Err(Error::InvalidParameters(format!(
            "postprocessing needs 0 <= k <= r, got r={r}, k={k}"
        )));
    }
    build_rule(r, k)
}

/// `U~ = U + a_n theta_n` with the right-normalized `theta_n` of `Q^{r,k}` and
/// `a_n = M^{-1} (F^{(p)}(t_n^-) - M U^{(p+1)}(t_n^-))`, `p = floor(k/2)`,
/// where `F^{(p)}` is the total derivative along `U`.
pub fn residual_correction<R: Real>(
    sol: &MeshSolution<R>,
    problem: &OdeProblem<R>,
    r: usize,
    k: usize,
) -> Result<MeshSolution<R>> {
    let rule = rule_for::<R>(r, k)?;
    let nodes = &rule.rule.interior_nodes;
    let p = k / 2;
    sol.map_pieces(|_, u| {
        let theta = theta_polynomial(k, u.a(), u.b(), nodes, Normalization::Right)?;
        let jets = u.endpoint_taylor(Side::Right, p + 1);
        let truncated: Vec<_> = jets.iter().map(|j| j.truncate(p)).collect();
        let f = problem.rhs_taylor(u.b(), &truncated, None)?;
        let du: Vec<R> = jets.iter().map(|j| j.derivative(p + 1)).collect();
        let mdu = problem.mass().mul_vec(&du);
        let defect: Vec<R> = f
            .iter()
            .zip(mdu)
            .map(|(fj, m)| fj.derivative(p) - m)
            .collect();
        u.add_scaled(&theta, &problem.mass_solve(&defect))
    })
}

/// `U~ = U - a_n theta~_n` with the left-normalized `theta~_n` of `Q^{r,k}` and
/// `a_n = U^{(q)}(t_{n-1}^+) - U~^{(q)}(t_{n-1}^-)`, `q = floor((k-1)/2)+1`;
/// on the first interval the reference is `u^{(q)}(t_0)` from the initial jet.
pub fn jump_correction<R: Real>(
    sol: &MeshSolution<R>,
    problem: &OdeProblem<R>,
    r: usize,
    k: usize,
) -> Result<MeshSolution<R>> {
    let rule = rule_for::<R>(r, k)?;
    let nodes = &rule.rule.interior_nodes;
    let q = k.div_ceil(2);
    let jet0 = initial_jet(problem, q)?;
    let mut previous: Option<LocalPolynomial<R>> = None;
    sol.map_pieces(|_, u| {
        let theta = theta_polynomial(k, u.a(), u.b(), nodes, Normalization::Left)?;
        let reference: Vec<R> = match &previous {
            None => jet0.iter().map(|j| j.derivative(q)).collect(),
            Some(p) => p.endpoint_derivative(Side::Right, q),
        };
        let jump: Vec<R> = u
            .endpoint_derivative(Side::Left, q)
            .into_iter()
            .zip(reference)
            .map(|(x, y)| y - x)
            .collect();
        let lifted = u.add_scaled(&theta, &jump)?;
        previous = Some(lifted.clone());
        Ok(lifted)
    })
}

/// One lifting step from level `(r, k)` to `(r+1, k+2)`.
pub fn postprocess<R: Real>(
    sol: &MeshSolution<R>,
    problem: &OdeProblem<R>,
    r: usize,
    k: usize,
    variant: PostprocessVariant,
) -> Result<MeshSolution<R>> {
    match variant {
        PostprocessVariant::Jump => jump_correction(sol, problem, r, k),
        PostprocessVariant::Residual => residual_correction(sol, problem, r, k),
    }
}

/// Repeated lifting. Step `j = 0, 1, ...` treats its input as a solution at
/// level `(r+j, k+2j)` and uses the nodes of `Q^{r+j,k+2j}`; this requires
/// `steps <= r + 1 - k`. Returns the result after every step.
pub fn multi_postprocess<R: Real>(
    sol: &MeshSolution<R>,
    problem: &OdeProblem<R>,
    r: usize,
    k: usize,
    mode: PostprocessMode,
) -> Result<Vec<MeshSolution<R>>> {
    if mode.steps == 0 {
        return Err(Error::InvalidParameters("at least one postprocessing step".into()));
    }
    if k > r || mode.steps > r + 1 - k {
        return Err(Error::InvalidParameters(format!(
            "at most r+1-k postprocessing steps are defined, got {} for r={r}, k={k}",
            mode.steps
        )));
    }
    let mut stages: Vec<MeshSolution<R>> = Vec::with_capacity(mode.steps);
    for j in 0..mode.steps {
        let input = stages.last().unwrap_or(sol);
        let next = postprocess(input, problem, r + j, k + 2 * j, mode.variant)?;
        stages.push(next);
    }
    Ok(stages)
}

/// `g = I^{r+1,k+2} o ... o I^{r+l,k+2l} f` on every mesh interval, the
/// innermost interpolation applied to `f` first.
pub fn cascade_interpolant<R: Real>(
    f: &dyn TimeFunction<R>,
    r: usize,
    k: usize,
    depth: usize,
    mesh: &[R],
) -> Result<PiecewiseForcing<R>> {
    if depth == 0 || k > r || depth > r - k {
        return Err(Error::InvalidParameters(format!(
            "cascade depth must satisfy 1 <= l <= r-k, got l={depth} for r={r}, k={k}"
        )));
    }
    validate_mesh(mesh)?;
    let bases = (1..=depth)
        .map(|j| build_rule::<R>(r + j, k + 2 * j)?.interpolation_basis())
        .collect::<Result<Vec<_>>>()?;
    let pieces = mesh
        .windows(2)
        .enumerate()
        .map(|(n, w)| {
            let (a, b) = (&w[0], &w[1]);
            let interpolate = || -> Result<LocalPolynomial<R>> {
                let mut g = bases[depth - 1].interpolate_function(a, b, f)?;
                for basis in bases[..depth - 1].iter().rev() {
                    g = basis.interpolate_function(a, b, &g)?;
                }
                Ok(g)
            };
            interpolate().map_err(|e| e.at_interval(n + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseForcing::new(pieces)
}

/// `I^{r,k}` applied to every piece.
pub fn reverse_postprocess<R: Real>(sol: &MeshSolution<R>, r: usize, k: usize) -> Result<MeshSolution<R>> {
    let basis = rule_for::<R>(r, k)?.interpolation_basis()?;
    sol.map_pieces(|_, u| basis.interpolate_function(u.a(), u.b(), u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::NewtonSettings;
    use crate::problem::{dahlquist, ex1};
    use crate::solution::uniform_mesh;
    use crate::solver::{march, VtdConfig};
    use approx::assert_abs_diff_eq;

    #[test]
    fn dg0_closed_form() {
        let lambda = -1.5;
        let p = dahlquist::<f64>(lambda).unwrap();
        let mesh = uniform_mesh(&0.0, &1.0, 4).unwrap();
        let sol = march(&VtdConfig::new(0, 0), &p, &mesh, &NewtonSettings::default()).unwrap();
        let res = residual_correction(&sol, &p, 0, 0).unwrap();
        let jmp = jump_correction(&sol, &p, 0, 0).unwrap();
        for n in 1..=4 {
            let un = sol.left_limit(n, 0)[0];
            let t_n = mesh[n];
            let t = t_n - 0.1;
            assert_abs_diff_eq!(res.eval(&t, 0).unwrap()[0], un * (1.0 + lambda * (t - t_n)), epsilon = 1e-14);
            assert_abs_diff_eq!(res.right_limit(n - 1, 0)[0], sol.left_limit(n - 1, 0)[0], epsilon = 1e-14);
            assert!(res.max_difference(&jmp, 5).unwrap() < 1e-14);
        }
        assert!(res.max_jump(0) < 1e-14);
    }

    #[test]
    fn step_limits() {
        let p = ex1::<f64>().unwrap();
        let mesh = uniform_mesh(&0.0, &1.0, 2).unwrap();
        let sol = march(&VtdConfig::new(2, 1), &p, &mesh, &NewtonSettings::default()).unwrap();
        let mode = |s| PostprocessMode::new(PostprocessVariant::Residual, s);
        assert!(multi_postprocess(&sol, &p, 2, 1, mode(0)).is_err());
        assert!(multi_postprocess(&sol, &p, 2, 1, mode(3)).is_err());
        let stages = multi_postprocess(&sol, &p, 2, 1, mode(2)).unwrap();
        assert_eq!(stages[1].degree(), 4);
        assert!(cascade_interpolant(p.exact().unwrap().as_ref(), 2, 1, 2, &mesh).is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("jump".parse::<PostprocessVariant>().unwrap(), PostprocessVariant::Jump);
        assert_eq!("residual".parse::<PostprocessVariant>().unwrap(), PostprocessVariant::Residual);
        assert!("both".parse::<PostprocessVariant>().is_err());
    }
}
