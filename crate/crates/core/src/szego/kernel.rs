use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::inner::inner_weight_integral;
use crate::domain::ProfileRef;
use crate::error::{Error, Result};
use crate::geometry::BoundaryPoint;
use crate::quadrature::{try_integrate_breaks, try_integrate_halfline_damped, QuadratureConfig};

/// Default tolerances for kernel evaluation.
pub fn kernel_quadrature() -> QuadratureConfig {
    QuadratureConfig::default().with_rel_tol(1e-8).with_abs_tol(1e-15)
}

/// Evaluation request for the regularized kernel `S^ε(a, b)` of a tube domain.
#[derive(Debug, Clone)]
pub struct KernelQuery {
    pub profile: ProfileRef,
    pub a: BoundaryPoint,
    pub b: BoundaryPoint,
    /// Regularization height `ε > 0`.
    pub epsilon: f64,
    /// Order `k` of `Z̄^k Z`; used by [`tube_szego_derivative`].
    pub deriv_order_k: usize,
    /// Extra heights above the boundary: `Im z₂ = b(Re z) + height_a`, `Im w₂ = b(Re w) + height_b`.
    pub height_a: f64,
    pub height_b: f64,
    pub quadrature: QuadratureConfig,
}

impl KernelQuery {
    pub fn new(profile: ProfileRef, a: BoundaryPoint, b: BoundaryPoint, epsilon: f64) -> Self {
        Self {
            profile,
            a,
            b,
            epsilon,
            deriv_order_k: 0,
            height_a: 0.0,
            height_b: 0.0,
            quadrature: kernel_quadrature(),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.deriv_order_k = k;
        self
    }

    pub fn with_heights(mut self, height_a: f64, height_b: f64) -> Self {
        self.height_a = height_a;
        self.height_b = height_b;
        self
    }

    pub fn with_quadrature(mut self, q: QuadratureConfig) -> Self {
        self.quadrature = q;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        for v in [
            self.a.z.re,
            self.a.z.im,
            self.a.t,
            self.b.z.re,
            self.b.z.im,
            self.b.t,
            self.height_a,
            self.height_b,
        ] {
            if !v.is_finite() {
                return Err(Error::invalid("kernel query coordinates must be finite"));
            }
        }
        self.quadrature.validate()
    }
}

/// Statistics of the `I(η, τ)` evaluations behind one kernel value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InnerStats {
    pub inner_integrals: usize,
    pub cache_hits: usize,
    pub profile_evaluations: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    pub error_estimate: f64,
    /// Exponential damping rate of the `τ` integrand.
    pub damping: f64,
    pub converged: bool,
    pub inner_integral_stats: InnerStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Szego,
    /// `Z̄^k Z` with `k >= 1`.
    Derivative(usize),
    /// `Z S` with `Z = ∂_z + i P_z ∂_t`.
    ZDerivative,
    Bergman,
}

/// Memo of `log I(η, τ)` keyed by the exact lattice coordinates.
#[derive(Default)]
pub(crate) struct InnerCache {
    map: HashMap<(u64, u64), f64>,
    pub(crate) stats: InnerStats,
}

impl InnerCache {
    pub(crate) fn log_inner(
        &mut self,
        profile: &ProfileRef,
        eta: f64,
        tau: f64,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        let key = (eta.to_bits(), tau.to_bits());
        if let Some(&v) = self.map.get(&key) {
            self.stats.cache_hits += 1;
            return Ok(v);
        }
        let r = inner_weight_integral(profile.as_ref(), eta, tau, cfg)?;
        if !r.converged {
            return Err(Error::IntegralFailure(Box::new(crate::error::Diagnostics {
                value: r.log_value,
                error_estimate: r.rel_error,
                evaluations: r.evaluations,
                intervals: 0,
                context: format!("I(η = {eta}, τ = {tau})"),
            })));
        }
        self.stats.inner_integrals += 1;
        self.stats.profile_evaluations += r.evaluations;
        self.stats.max_rel_error = self.stats.max_rel_error.max(r.rel_error);
        self.map.insert(key, r.log_value);
        Ok(r.log_value)
    }
}

pub(crate) fn inner_cfg(q: &QuadratureConfig) -> QuadratureConfig {
    q.with_rel_tol((q.rel_tol * 1e-2).max(1e-13))
}

/// Half-width of the `η` window: beyond it the integrand is `e^{-(cut+5)}` below its peak.
pub(crate) fn eta_half_width(profile: &ProfileRef, tau: f64, cut: f64) -> f64 {
    let big_a = profile.convexity_bounds().1;
    (tau * big_a * (cut + 5.0)).sqrt()
}

pub(crate) fn eta_breaks(center: f64, half: f64) -> Vec<f64> {
    (-4..=4).map(|i| center + half * i as f64 / 4.0).collect()
}

fn evaluate(q: &KernelQuery, kind: Kind) -> Result<KernelValue> {
    q.validate()?;
    let p = &q.profile;
    let (xa, xb) = (q.a.z.re, q.b.z.re);
    let x_sum = xa + xb;
    let y_diff = q.a.z.im - q.b.z.im;
    let dt = q.a.t - q.b.t;
    let mid = 0.5 * x_sum;
    let b_mid = p.b(mid);
    let gap = p.b(xa) + p.b(xb) - 2.0 * b_mid;
    let damping = q.epsilon + q.height_a + q.height_b + gap;
    if !(damping > 0.0) {
        return Err(Error::Divergence(format!(
            "damping exponent {damping} <= 0: the points are not on or above the boundary"
        )));
    }

    let prefactor = match kind {
        Kind::Szego | Kind::ZDerivative | Kind::Bergman => 1.0 / (4.0 * PI * PI),
        Kind::Derivative(k) => {
            let d = p.deriv(k + 1, xa)?;
            if d == 0.0 {
                return Ok(KernelValue {
                    value: Complex64::new(0.0, 0.0),
                    error_estimate: 0.0,
                    damping,
                    converged: true,
                    inner_integral_stats: InnerStats::default(),
                });
            }
            -d / (2f64.powi(k as i32 + 2) * PI * PI)
        }
    };
    let slope_a = p.deriv(1, xa)?;
    let slope_mid = p.deriv(1, mid)?;

    let cfg = q.quadrature;
    let icfg = inner_cfg(&cfg);
    let cut = cfg.truncation_log_cut;
    let cache = RefCell::new(InnerCache::default());
    let worst_inner = RefCell::new(0.0f64);

    let outer = try_integrate_halfline_damped(
        |tau: f64| -> Result<Complex64> {
            if tau <= 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let center = tau * slope_mid;
            let half = eta_half_width(p, tau, cut);
            let integrand = |eta: f64| -> Result<Complex64> {
                let log_i = cache.borrow_mut().log_inner(p, eta, tau, &icfg)?;
                let weight = match kind {
                    Kind::Szego => 1.0,
                    Kind::Derivative(_) => tau,
                    Kind::ZDerivative => eta - tau * slope_a,
                    Kind::Bergman => 2.0 * tau,
                };
                let expo = eta * x_sum - 2.0 * tau * b_mid - log_i;
                Ok(Complex64::from_polar(weight * expo.exp(), eta * y_diff))
            };
            let breaks = eta_breaks(center, half);
            // tolerance relative to ∫|f| dη: e^{iηY} may cancel far below the I(η, τ) accuracy
            let mass = try_integrate_breaks(|eta: f64| Ok(integrand(eta)?.norm()), &breaks, &cfg)?;
            let ecfg = cfg.with_abs_tol(cfg.abs_tol.max(cfg.rel_tol * mass.value));
            let r = try_integrate_breaks(integrand, &breaks, &ecfg)?.require_converged("η integral")?;
            let mut w = worst_inner.borrow_mut();
            *w = w.max(r.error_estimate);
            Ok(r.value * Complex64::from_polar((-tau * damping).exp(), tau * dt))
        },
        damping,
        &cfg,
    )?;
    let stats = cache.into_inner().stats;
    let error = outer.error_estimate + worst_inner.into_inner() / damping;
    Ok(KernelValue {
        value: outer.value * prefactor,
        error_estimate: error * prefactor.abs(),
        damping,
        converged: outer.converged,
        inner_integral_stats: stats,
    })
}

/// `S^ε(a, b) = (1/4π²) ∫_0^∞ ∫_ℝ e^{iτ(z₂ + iε - w̄₂) + η(z + w̄)} / I(η, τ) dη dτ`.
pub fn tube_szego_kernel(q: &KernelQuery) -> Result<KernelValue> {
    evaluate(q, Kind::Szego)
}

/// `Z̄^k Z S^ε(a, b)` for `k = q.deriv_order_k`; for `k >= 1` this is
/// `-b^{(k+1)}(Re z) / (2^{k+2} π²) ∫∫ τ e^{…} / I`, and for `k = 0` it is `Z S^ε`.
pub fn tube_szego_derivative(q: &KernelQuery) -> Result<KernelValue> {
    match q.deriv_order_k {
        0 => evaluate(q, Kind::ZDerivative),
        k => {
            let available = q.profile.max_order();
            if k + 1 > available {
                return Err(Error::Capability(format!(
                    "profile '{}' provides derivatives up to order {available}, order {} requested",
                    q.profile.name(),
                    k + 1
                )));
            }
            evaluate(q, Kind::Derivative(k))
        }
    }
}

/// Bergman kernel `B(a, b) = 2i ∂_{w̄₂} S(a, b)`, i.e. an extra `2τ` in the integrand.
pub fn bergman_kernel(q: &KernelQuery) -> Result<KernelValue> {
    evaluate(q, Kind::Bergman)
}
