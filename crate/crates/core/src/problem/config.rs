//! Data-file description of a problem: either a built-in name or an
//! affine-linear system `M u' = f(t) - A u` with a preset forcing `f`.
//!
//! ```json
//! { "M": [[1, 0], [0, 1]], "A": [[0, -1], [1, 0]],
//!   "f": { "type": "polynomial", "coefficients": [[0, 1], [1]] },
//!   "u0": [1, 0], "t0": 0, "T": 2 }
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{DenseMatrix, Jet, Real};
use crate::polynomial::TimeFunction;
use crate::problem::{builtin, OdeProblem, ZeroFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemConfig {
    Builtin(String),
    Custom(CustomProblem),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(rename = "M")]
    pub mass: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "f")]
    pub forcing: ForcingPreset,
    pub u0: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
    /// Length of the time interval.
    #[serde(rename = "T")]
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingPreset {
    Zero,
    /// Per component, coefficients of `1, t, t^2, ...`.
    Polynomial { coefficients: Vec<Vec<f64>> },
    /// Sum of `amplitude * exp(rate t) * sin(frequency t + phase)` terms.
    ExpTrig { terms: Vec<ExpTrigTerm> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpTrigTerm {
    pub component: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl ProblemConfig {
    pub fn build<R: Real>(&self) -> Result<OdeProblem<R>> {
        match self {
            ProblemConfig::Builtin(name) => builtin(name),
            ProblemConfig::Custom(c) => c.build(),
        }
    }
}

fn matrix<R: Real>(what: &str, rows: &[Vec<f64>], d: usize) -> Result<DenseMatrix<R>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Config(format!("{what} must be a {d}x{d} matrix")));
    }
    DenseMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&v| R::from_f64(v)).collect())
            .collect(),
    )
}

impl CustomProblem {
    pub fn build<R: Real>(&self) -> Result<OdeProblem<R>> {
        let d = self.u0.len();
        if d == 0 {
            return Err(Error::Config("u0 must not be empty".into()));
        }
        if !(self.length > 0.0) || !self.t0.is_finite() || !self.length.is_finite() {
            return Err(Error::Config("T must be positive and finite".into()));
        }
        let mass = matrix::<R>("M", &self.mass, d)?;
        let a = matrix::<R>("A", &self.a, d)?;
        let f: Arc<dyn TimeFunction<R>> = match &self.forcing {
            ForcingPreset::Zero => Arc::new(ZeroFunction { dim: d }),
            ForcingPreset::Polynomial { coefficients } => {
                if coefficients.len() != d {
                    return Err(Error::Config(format!(
                        "polynomial forcing needs {d} coefficient lists"
                    )));
                }
                Arc::new(PolynomialForcing {
                    coefficients: coefficients
                        .iter()
                        .map(|c| c.iter().map(|&v| R::from_f64(v)).collect())
                        .collect(),
                })
            }
            ForcingPreset::ExpTrig { terms } => {
                if let Some(t) = terms.iter().find(|t| t.component >= d) {
                    return Err(Error::Config(format!(
                        "exp_trig term targets component {} of {d}",
                        t.component
                    )));
                }
                Arc::new(ExpTrigForcing {
                    dim: d,
                    terms: terms.clone(),
                })
            }
        };
        let t0 = R::from_f64(self.t0);
        let t_end = R::from_f64(self.t0 + self.length);
        let u0 = self.u0.iter().map(|&v| R::from_f64(v)).collect();
        let name = self.name.clone().unwrap_or_else(|| "custom".into());
        OdeProblem::affine(&name, mass, a, f, u0, t0, t_end).map_err(|e| match e {
            Error::SingularMass => e,
            other => Error::Config(other.to_string()),
        })
    }
}

/// Polynomial forcing in monomial form, evaluated by Horner's scheme on jets.
#[derive(Clone, Debug)]
pub struct PolynomialForcing<R> {
    pub coefficients: Vec<Vec<R>>,
}

impl<R: Real> TimeFunction<R> for PolynomialForcing<R> {
    fn dim(&self) -> usize {
        self.coefficients.len()
    }

    fn taylor(&self, t: &R, order: usize) -> Result<Vec<Jet<R>>> {
        let tj = Jet::variable(t.clone(), order);
        Ok(self
            .coefficients
            .iter()
            .map(|c| {
                c.iter().rev().fold(Jet::constant(R::zero(), order), |acc, ci| {
                    (&acc * &tj).add_scalar(ci)
                })
            })
            .collect())
    }
}

#[derive(Clone, Debug)]
pub struct ExpTrigForcing {
    pub dim: usize,
    pub terms: Vec<ExpTrigTerm>,
}

impl<R: Real> TimeFunction<R> for ExpTrigForcing {
    fn dim(&self) -> usize {
        self.dim
    }

    fn taylor(&self, t: &R, order: usize) -> Result<Vec<Jet<R>>> {
        let tj = Jet::variable(t.clone(), order);
        let mut out = vec![Jet::constant(R::zero(), order); self.dim];
        for term in &self.terms {
            let growth = tj.scale(&R::from_f64(term.rate)).exp();
            let wave = tj
                .scale(&R::from_f64(term.frequency))
                .add_scalar(&R::from_f64(term.phase))
                .sin();
            let v = (&growth * &wave).scale(&R::from_f64(term.amplitude));
            out[term.component] = &out[term.component] + &v;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_builtin_and_custom() {
        let c: ProblemConfig = serde_json::from_str("\"ex2\"").unwrap();
        assert_eq!(c.build::<f64>().unwrap().name(), "ex2");

        let text = r#"{ "M": [[1, 0], [0, 1]], "A": [[0, -1], [1, 0]],
            "f": { "type": "polynomial", "coefficients": [[0, 1], [1]] },
            "u0": [1, 0], "T": 2 }"#;
        let c: ProblemConfig = serde_json::from_str(text).unwrap();
        let p = c.build::<f64>().unwrap();
        assert_eq!(*p.t_end(), 2.0);
        let f = p.affine_part().unwrap().f.derivative(&0.5, 1).unwrap();
        assert_eq!(f, vec![1.0, 0.0]);
    }

    #[test]
    fn exp_trig_derivative() {
        let f = ExpTrigForcing {
            dim: 1,
            terms: vec![ExpTrigTerm {
                component: 0,
                amplitude: 2.0,
                rate: -1.0,
                frequency: 3.0,
                phase: 0.5,
            }],
        };
        let t = 0.4f64;
        let d = TimeFunction::<f64>::derivative(&f, &t, 1).unwrap()[0];
        let expect = 2.0 * (-t).exp() * (3.0 * (3.0 * t + 0.5).cos() - (3.0 * t + 0.5).sin());
        assert_abs_diff_eq!(d, expect, epsilon = 1e-14);
    }

    #[test]
    fn shape_errors_are_config_errors() {
        let text = r#"{ "M": [[1, 0]], "A": [[0]], "f": { "type": "zero" }, "u0": [1, 0], "T": 1 }"#;
        let c: ProblemConfig = serde_json::from_str(text).unwrap();
        assert!(matches!(c.build::<f64>(), Err(Error::Config(_))));
        let text = r#"{ "M": [[0]], "A": [[0]], "f": { "type": "zero" }, "u0": [1], "T": 1 }"#;
        let c: ProblemConfig = serde_json::from_str(text).unwrap();
        assert!(matches!(c.build::<f64>(), Err(Error::SingularMass)));
    }
}
