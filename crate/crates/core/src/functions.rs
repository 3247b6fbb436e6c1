//! Objectives and the benchmark test functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector;

/// A black-box objective. Optimizers only ever see it through an oracle; the
/// gradient is used for diagnostics and the variance lab.
pub trait Objective: Sync {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Quadratic,
    Rosenbrock,
}

impl std::str::FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Self::Quadratic),
            "rosenbrock" => Ok(Self::Rosenbrock),
            other => Err(Error::InvalidConfig(format!("unknown function {other:?}"))),
        }
    }
}

impl std::fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Quadratic => "quadratic",
            Self::Rosenbrock => "rosenbrock",
        })
    }
}

/// `quadratic`: `f(x) = ||x||^2`, minimum 0 at the origin.
///
/// `rosenbrock`: `f(x) = sum_{i<d} (1 - x_i)^2 + 100 (x_{i+1} - x_i^2)^2`,
/// minimum 0 at the all-ones vector; needs `d >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFunction {
    pub kind: FunctionKind,
    pub dim: usize,
}

impl TestFunction {
    pub fn new(kind: FunctionKind, dim: usize) -> Result<Self> {
        let min = match kind {
            FunctionKind::Quadratic => 1,
            FunctionKind::Rosenbrock => 2,
        };
        if dim < min {
            return Err(Error::InvalidConfig(format!(
                "{kind} needs dimension >= {min}, got {dim}"
            )));
        }
        Ok(Self { kind, dim })
    }

    pub fn quadratic(dim: usize) -> Self {
        Self::new(FunctionKind::Quadratic, dim).expect("quadratic dimension")
    }

    pub fn rosenbrock(dim: usize) -> Self {
        Self::new(FunctionKind::Rosenbrock, dim).expect("rosenbrock dimension")
    }

    pub fn minimizer(&self) -> Vec<f64> {
        match self.kind {
            FunctionKind::Quadratic => vec![0.0; self.dim],
            FunctionKind::Rosenbrock => vec![1.0; self.dim],
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }
}

pub fn eval_function(f: &TestFunction, x: &[f64]) -> Result<f64> {
    f.check(x)?;
    Ok(match f.kind {
        FunctionKind::Quadratic => vector::norm_sq(x),
        FunctionKind::Rosenbrock => x
            .windows(2)
            .map(|w| {
                let a = 1.0 - w[0];
                let b = w[1] - w[0] * w[0];
                a * a + 100.0 * b * b
            })
            .sum(),
    })
}

pub fn grad_function(f: &TestFunction, x: &[f64]) -> Result<Vec<f64>> {
    f.check(x)?;
    Ok(match f.kind {
        FunctionKind::Quadratic => x.iter().map(|v| 2.0 * v).collect(),
        FunctionKind::Rosenbrock => {
            let mut g = vec![0.0; x.len()];
            for i in 0..x.len() - 1 {
                let b = x[i + 1] - x[i] * x[i];
                g[i] += -2.0 * (1.0 - x[i]) - 400.0 * x[i] * b;
                g[i + 1] += 200.0 * b;
            }
            g
        }
    })
}

impl Objective for TestFunction {
    /// Panics on a dimension mismatch; use [`eval_function`] for a checked call.
    fn value(&self, x: &[f64]) -> f64 {
        eval_function(self, x).expect("dimension mismatch")
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        grad_function(self, x).ok()
    }
}

/// `f(x) = <c, x>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear(pub Vec<f64>);

impl Objective for Linear {
    fn value(&self, x: &[f64]) -> f64 {
        vector::dot(&self.0, x)
    }

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(self.0.clone())
    }
}

/// `f(x) = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Objective for Constant {
    fn value(&self, _x: &[f64]) -> f64 {
        self.0
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; x.len()])
    }
}
