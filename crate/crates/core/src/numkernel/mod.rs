//! Scalar contract, dense linear algebra, Taylor jets and the Newton driver.

#[cfg(feature = "extended")]
pub mod extended;
pub mod jet;
pub mod linalg;
pub mod newton;
pub mod scalar;

pub use jet::Jet;
pub use linalg::{solve_linear, DenseMatrix, Lu};
pub use newton::{newton_solve, solve_affine, JacobianMode, NewtonOutcome, NewtonSettings};
pub use scalar::{binomial, factorial, norm2, norm_inf, Real};
