#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod collocation;
pub mod error;
pub mod numkernel;
pub mod polynomial;
pub mod postprocess;
pub mod problem;
pub mod quadrature;
pub mod solution;
pub mod solver;

pub use error::{Error, Result};
pub use numkernel::{DenseMatrix, Jet, NewtonSettings, Real};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/quadrature.md")]
    pub struct Quadrature;
    #[doc = include_str!("../../../book/src/solving.md")]
    pub struct Solving;
    #[doc = include_str!("../../../book/src/postprocessing.md")]
    pub struct Postprocessing;
    #[doc = include_str!("../../../book/src/convergence.md")]
    pub struct Convergence;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
