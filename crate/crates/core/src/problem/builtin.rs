//! Built-in test problems with closed-form solutions.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numkernel::{DenseMatrix, Jet, Real};
use crate::problem::{FnRhs, JetFunction, OdeProblem, ZeroFunction};

pub const BUILTIN_NAMES: &[&str] = &["ex1", "ex2", "dahlquist:<lambda>"];

/// `u1' = -u1^2 - u2`, `u2' = u1 - u1 u2` on `(0, 32)` with `u(0) = (1/2, 0)`.
///
/// Solution: `(cos t, sin t) / (2 + sin t)`.
pub fn ex1<R: Real>() -> Result<OdeProblem<R>> {
    let rhs = FnRhs::new(2, |_t: &Jet<R>, u: &[Jet<R>]| {
        let (u1, u2) = (&u[0], &u[1]);
        let sq = u1 * u1;
        Ok(vec![-(&sq + u2), u1 - &(u1 * u2)])
    });
    let exact = JetFunction::new(2, |t: &Jet<R>| {
        let (s, c) = t.sin_cos();
        let den = s.add_scalar(&R::from_f64(2.0));
        Ok(vec![c.checked_div(&den)?, s.checked_div(&den)?])
    });
    OdeProblem::general(
        "ex1",
        DenseMatrix::identity(2),
        Arc::new(rhs),
        vec![R::ratio(1, 2), R::zero()],
        R::zero(),
        R::from_f64(32.0),
    )?
    .with_exact(Arc::new(exact))
}

/// `M u' = f(t) - A u` on `(0, 1)` with `u(0) = 0` and solution
/// `((t + t^2) e^t, -t e^t)`.
pub fn ex2<R: Real>() -> Result<OdeProblem<R>> {
    let mass = DenseMatrix::from_f64_rows(&[&[1.0, 2.0], &[-1.0, 3.0]])?;
    let a = DenseMatrix::from_f64_rows(&[&[1.0, 2.0], &[3.0, 4.0]])?;
    // f = M u' + A u, expanded by hand
    let forcing = JetFunction::new(2, |t: &Jet<R>| {
        let e = t.exp();
        let t2 = t * t;
        let p1 = t2.scale(&R::from_f64(2.0)).add_scalar(&R::from_f64(-1.0));
        let p2 = (&t2.scale(&R::from_f64(2.0)) - &t.scale(&R::from_f64(7.0)))
            .add_scalar(&R::from_f64(-4.0));
        Ok(vec![&p1 * &e, &p2 * &e])
    });
    let exact = JetFunction::new(2, |t: &Jet<R>| {
        let e = t.exp();
        let te = t * &e;
        Ok(vec![&te + &(t * &te), -te])
    });
    OdeProblem::affine(
        "ex2",
        mass,
        a,
        Arc::new(forcing),
        vec![R::zero(), R::zero()],
        R::zero(),
        R::one(),
    )?
    .with_exact(Arc::new(exact))
}

/// `u' = lambda u`, `u(0) = 1` on `(0, 1)`.
pub fn dahlquist<R: Real>(lambda: f64) -> Result<OdeProblem<R>> {
    let a = DenseMatrix::from_rows(vec![vec![R::from_f64(-lambda)]])?;
    let lam = R::from_f64(lambda);
    let exact = JetFunction::new(1, move |t: &Jet<R>| Ok(vec![t.scale(&lam).exp()]));
    OdeProblem::affine(
        &format!("dahlquist:{lambda}"),
        DenseMatrix::identity(1),
        a,
        Arc::new(ZeroFunction { dim: 1 }),
        vec![R::one()],
        R::zero(),
        R::one(),
    )?
    .with_exact(Arc::new(exact))
}

/// Looks up `ex1`, `ex2`, `dahlquist:<lambda>` or `dahlquist(<lambda>)`.
pub fn builtin<R: Real>(name: &str) -> Result<OdeProblem<R>> {
    let name = name.trim();
    match name {
        "ex1" => return ex1(),
        "ex2" => return ex2(),
        _ => {}
    }
    let arg = name
        .strip_prefix("dahlquist:")
        .or_else(|| {
            name.strip_prefix("dahlquist(")
                .and_then(|s| s.strip_suffix(')'))
        });
    match arg.map(|s| s.trim().parse::<f64>()) {
        Some(Ok(lambda)) if lambda.is_finite() => dahlquist(lambda),
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}
