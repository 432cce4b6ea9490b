//! Adaptive quadrature, damped half-line integrals and one-dimensional convex analysis.

mod adaptive;
mod convex;
mod halfline;
mod nested;
mod roots;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use adaptive::gauss_legendre_10;
pub use adaptive::{integrate_1d, try_integrate_1d, try_integrate_breaks};
pub use convex::{
    convex_laplace, convex_laplace_from_minimum, level_set_width, minimize_convex, ConvexLaplace, LevelSet, Minimum,
};
pub use halfline::{integrate_halfline_damped, try_integrate_halfline_damped};
pub use nested::{try_integrate_nested, uniform_breaks};
pub use roots::brent_root;

/// Tolerances shared by every integration routine in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any single subinterval.
    pub max_depth: u32,
    /// Exponential tails are dropped once the exponent exceeds its minimum by this much.
    pub truncation_log_cut: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_depth: 48,
            truncation_log_cut: 40.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::invalid("max_depth must be at least 1"));
        }
        if !(self.truncation_log_cut > 0.0 && self.truncation_log_cut.is_finite()) {
            return Err(Error::invalid(format!(
                "truncation_log_cut must be positive, got {}",
                self.truncation_log_cut
            )));
        }
        Ok(())
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub(crate) fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value type an integrand may return.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + 'static
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
    fn finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult<T = f64> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Scalar> IntegralResult<T> {
    /// Turns a non-converged result into an `IntegralFailure`.
    pub fn require_converged(self, context: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::IntegralFailure(Box::new(crate::error::Diagnostics {
                value: self.value.modulus(),
                error_estimate: self.error_estimate,
                evaluations: self.evaluations,
                intervals: 0,
                context: context.to_string(),
            })))
        }
    }
}
