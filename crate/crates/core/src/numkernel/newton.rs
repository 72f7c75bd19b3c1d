//! Damped Newton iteration with a finite-difference Jacobian, and the
//! single-solve path for residuals that are affine in the unknowns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::linalg::DenseMatrix;
use crate::numkernel::scalar::{norm_inf, Real};

/// How the Jacobian of a local residual is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// Exact columns `R(e_j) - R(0)` and one linear solve when the residual is
    /// affine, forward differences otherwise.
    #[default]
    Auto,
    /// Always iterate with forward-difference Jacobians.
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    /// Absolute residual tolerance; `None` selects `512 * eps` of the active precision.
    pub abs_tol: Option<f64>,
    /// Tolerance relative to the initial residual norm.
    pub rel_tol: Option<f64>,
    pub max_iter: usize,
    pub jacobian: JacobianMode,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            abs_tol: None,
            rel_tol: None,
            max_iter: 50,
            jacobian: JacobianMode::Auto,
        }
    }
}

impl NewtonSettings {
    pub fn abs_tol<R: Real>(&self) -> R {
        self.abs_tol
            .map(R::from_f64)
            .unwrap_or_else(|| R::from_f64(512.0) * R::epsilon())
    }

    pub fn rel_tol<R: Real>(&self) -> R {
        self.rel_tol
            .map(R::from_f64)
            .unwrap_or_else(|| R::from_f64(512.0) * R::epsilon())
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome<R> {
    pub solution: Vec<R>,
    pub iterations: usize,
    pub residual_norm: R,
}

const MIN_DAMPING: f64 = 1.0 / 1024.0;

fn jacobian_fd<R: Real, F>(f: &mut F, x: &[R], fx: &[R]) -> Result<DenseMatrix<R>>
where
    F: FnMut(&[R]) -> Result<Vec<R>>,
{
    let n = x.len();
    let m = fx.len();
    let sqrt_eps = R::epsilon().sqrt();
    let mut jac = DenseMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = sqrt_eps.clone() * (R::one() + x[j].abs());
        xp[j] = x[j].clone() + h.clone();
        // the representable step, not the nominal one
        let h_eff = xp[j].clone() - x[j].clone();
        let fp = f(&xp)?;
        for i in 0..m {
            jac[(i, j)] = (fp[i].clone() - fx[i].clone()) / h_eff.clone();
        }
        xp[j] = x[j].clone();
    }
    Ok(jac)
}

/// Newton iteration for `f(x) = 0` starting at `x0`, halving the step until
/// the simplified Newton correction decreases sufficiently.
///
/// Stops when `|f(x)|_inf <= abs_tol + rel_tol * |f(x0)|_inf` or when the update
/// has stagnated at round-off level.
pub fn newton_solve<R: Real, F>(
    mut f: F,
    x0: Vec<R>,
    settings: &NewtonSettings,
) -> Result<NewtonOutcome<R>>
where
    F: FnMut(&[R]) -> Result<Vec<R>>,
{
    let abs_tol = settings.abs_tol::<R>();
    let rel_tol = settings.rel_tol::<R>();
    let mut x = x0;
    let mut fx = f(&x)?;
    let r0 = norm_inf(&fx);
    let target = abs_tol + rel_tol * r0.clone();
    let mut rnorm = r0;
    let stagnation = R::from_f64(8.0) * R::epsilon();
    for iter in 0..=settings.max_iter {
        if rnorm <= target {
            return Ok(NewtonOutcome {
                solution: x,
                iterations: iter,
                residual_norm: rnorm,
            });
        }
        if iter == settings.max_iter {
            break;
        }
        let jac = jacobian_fd(&mut f, &x, &fx)?;
        let lu = jac.lu().map_err(|_| Error::SingularJacobian)?;
        let rhs: Vec<R> = fx.iter().map(|v| -v.clone()).collect();
        let mut delta = lu.solve(&rhs);
        // natural monotonicity test: the simplified correction `J^{-1} f(x + l d)`
        // must shrink relative to `d`; the last trial is kept
        let full = norm_inf(&delta);
        let mut lambda = R::one();
        let (trial, f_trial) = loop {
            let trial: Vec<R> = x.iter().zip(&delta).map(|(xi, di)| xi.clone() + di.clone()).collect();
            let f_trial = f(&trial)?;
            let simplified = norm_inf(&lu.solve(&f_trial));
            let accept = simplified <= (R::one() - R::from_f64(0.25) * lambda.clone()) * full.clone();
            if accept || lambda < R::from_f64(MIN_DAMPING) {
                break (trial, f_trial);
            }
            lambda *= R::from_f64(0.5);
            delta.iter_mut().for_each(|d| *d = d.clone() * R::from_f64(0.5));
        };
        x = trial;
        fx = f_trial;
        rnorm = norm_inf(&fx);
        let dnorm = norm_inf(&delta);
        let xnorm = norm_inf(&x);
        if dnorm <= stagnation.clone() * (R::one() + xnorm) {
            return Ok(NewtonOutcome {
                solution: x,
                iterations: iter + 1,
                residual_norm: rnorm,
            });
        }
    }
    Err(Error::NewtonDiverged {
        iterations: settings.max_iter,
        residual: rnorm.to_f64(),
    })
}

/// Solves `f(x) = 0` for a residual that is affine in `x` with one linear solve.
///
/// The Jacobian columns are exact: `f(e_j) - f(0)`.
pub fn solve_affine<R: Real, F>(mut f: F, n: usize) -> Result<NewtonOutcome<R>>
where
    F: FnMut(&[R]) -> Result<Vec<R>>,
{
    let mut x = vec![R::zero(); n];
    let f0 = f(&x)?;
    let mut jac = DenseMatrix::zeros(f0.len(), n);
    for j in 0..n {
        x[j] = R::one();
        let col = f(&x)?;
        for i in 0..f0.len() {
            jac[(i, j)] = col[i].clone() - f0[i].clone();
        }
        x[j] = R::zero();
    }
    let lu = jac.lu().map_err(|_| Error::SingularJacobian)?;
    let rhs: Vec<R> = f0.iter().map(|v| -v.clone()).collect();
    let solution = lu.solve(&rhs);
    let residual_norm = norm_inf(&f(&solution)?);
    Ok(NewtonOutcome {
        solution,
        iterations: 1,
        residual_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_square_root() {
        let out = newton_solve(|x: &[f64]| Ok(vec![x[0] * x[0] - 2.0]), vec![1.0], &NewtonSettings::default())
            .unwrap();
        assert_abs_diff_eq!(out.solution[0], 2f64.sqrt(), epsilon = 1e-14);
        assert!(out.iterations < 10);
    }

    #[test]
    fn coupled_system() {
        // x^2 + y^2 = 1, x = y
        let f = |v: &[f64]| Ok(vec![v[0] * v[0] + v[1] * v[1] - 1.0, v[0] - v[1]]);
        let out = newton_solve(f, vec![1.0, 0.5], &NewtonSettings::default()).unwrap();
        assert_abs_diff_eq!(out.solution[0], 0.5f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(out.solution[1], 0.5f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn affine_matches_newton() {
        let f = |v: &[f64]| Ok(vec![3.0 * v[0] - v[1] + 1.0, v[0] + 2.0 * v[1] - 4.0]);
        let a = solve_affine(f, 2).unwrap();
        let n = newton_solve(f, vec![0.0, 0.0], &NewtonSettings::default()).unwrap();
        assert_abs_diff_eq!(a.solution[0], n.solution[0], epsilon = 1e-13);
        assert_abs_diff_eq!(a.solution[1], n.solution[1], epsilon = 1e-13);
        assert_abs_diff_eq!(a.solution[0], 2.0 / 7.0, epsilon = 1e-15);
    }

    #[test]
    fn no_root_diverges() {
        let settings = NewtonSettings {
            max_iter: 20,
            ..NewtonSettings::default()
        };
        let res = newton_solve(|x: &[f64]| Ok(vec![x[0] * x[0] + 1.0]), vec![0.3], &settings);
        assert!(matches!(
            res,
            Err(Error::NewtonDiverged { .. }) | Err(Error::SingularJacobian)
        ));
    }

    #[test]
    fn singular_affine_system() {
        let res = solve_affine(|v: &[f64]| Ok(vec![v[0] + v[1], 2.0 * v[0] + 2.0 * v[1]]), 2);
        assert!(matches!(res, Err(Error::SingularJacobian)));
    }
}
