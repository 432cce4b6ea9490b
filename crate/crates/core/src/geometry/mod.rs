//! Non-isotropic geometry of the boundary: `Λ`, its inverse `μ`, distances, ball volumes and
//! the derivative-reconstruction tools behind the polynomial models of `Λ`.

mod distance;
mod lambda;
mod vandermonde;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{PotentialRef, WeightRef};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;

pub use distance::{ball_volume, cc_distance, rho_tilde, sigma_tau, smooth_distance, SmoothDistance, Twist};
pub use lambda::{
    default_directions, lambda_integral, lambda_poly, lambda_star_model, mu_invert, mu_star, LambdaStar, LambdaVariant,
};
pub use vandermonde::{max_direction, reconstruct_partials, vandermonde_coeffs, MaxDirection, VandermondeTable};

/// `(z, t)` standing for the boundary point `(z, t + iP(z))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub z: Complex64,
    pub t: f64,
}

impl BoundaryPoint {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        Self {
            z: Complex64::new(x, y),
            t,
        }
    }
}

/// Numeric parameters of a [`MetricContext`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricOptions {
    /// Type order `m` from (H1).
    pub m: usize,
    /// Exponent `ν` of `ρ̃_τ`; `None` means `1/m`.
    pub nu_exponent: Option<f64>,
    /// Upper limit of `δ` for the polynomial models of `Λ`.
    pub delta0: f64,
    /// Angular grid for the supremum in `Λ₂`.
    pub lambda2_directions: usize,
    /// Angular grid for the maximal direction search.
    pub nu_star_directions: usize,
    /// `ε` of the large-scale cutoff in `d*`.
    pub smooth_epsilon: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            m: 2,
            nu_exponent: None,
            delta0: 1.0,
            lambda2_directions: 256,
            nu_star_directions: 1024,
            smooth_epsilon: 1.0,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl MetricOptions {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::invalid(format!(
                "type order m must be at least 2, got {}",
                self.m
            )));
        }
        let nu = self.nu();
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::invalid(format!("nu_exponent must lie in (0, 1], got {nu}")));
        }
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return Err(Error::invalid(format!("delta0 must be positive, got {}", self.delta0)));
        }
        if self.lambda2_directions == 0 || self.nu_star_directions == 0 {
            return Err(Error::invalid("angular grids must be nonempty"));
        }
        if !(self.smooth_epsilon > 0.5 && self.smooth_epsilon <= 1.0) {
            return Err(Error::invalid(format!(
                "smooth_epsilon must lie in (1/2, 1], got {}; smaller values leave d* = 0 on a band of points",
                self.smooth_epsilon
            )));
        }
        self.quadrature.validate()
    }

    pub fn nu(&self) -> f64 {
        self.nu_exponent.unwrap_or(1.0 / self.m as f64)
    }
}

/// Weight, potential and options shared by all geometric quantities.
#[derive(Debug, Clone)]
pub struct MetricContext {
    pub weight: WeightRef,
    pub potential: PotentialRef,
    pub options: MetricOptions,
}

impl MetricContext {
    pub fn new(weight: WeightRef, potential: PotentialRef, options: MetricOptions) -> Result<Self> {
        options.validate()?;
        Ok(Self {
            weight,
            potential,
            options,
        })
    }

    pub fn m(&self) -> usize {
        self.options.m
    }
}
