//! Quadrature, ODE integration, root finding and norm estimation shared by
//! every other module.

pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod roots;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use linalg::top_singular_value;
pub use ode::{solve_ivp, Trajectory};
pub use quadrature::{gauss_legendre, integrate, integrate_real, Grid, GridRule, PanelRule};
pub use roots::{find_complex_zeros, find_zero, find_zeros, Rect};

/// Accuracy request passed to iterative routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_iter: usize) -> Result<Self, NumericsError> {
        let t = Self { rel, abs, max_iter };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.rel > 0.0 && self.abs > 0.0 && self.rel.is_finite() && self.abs.is_finite()) {
            return Err(NumericsError::InvalidTolerance);
        }
        if self.max_iter == 0 {
            return Err(NumericsError::InvalidTolerance);
        }
        Ok(())
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-12, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("tolerance must have positive rel, abs and max_iter")]
    InvalidTolerance,
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("non-finite value encountered at {at}")]
    NonFinite { at: f64 },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { what: &'static str, iterations: usize, residual: f64 },
    #[error("step size {step:e} underflowed at t = {t}")]
    StepUnderflow { t: f64, step: f64 },
    #[error("no root of {what}: smallest |f| found was {best:e}")]
    NoRoot { what: &'static str, best: f64 },
    #[error("matrix is empty or not finite")]
    InvalidMatrix,
}
