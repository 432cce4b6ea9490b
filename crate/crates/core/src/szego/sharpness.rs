use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::inner::inner_weight_integral;
use super::kernel::{eta_breaks, eta_half_width, inner_cfg, kernel_quadrature, InnerCache, InnerStats};
use crate::domain::ProfileRef;
use crate::error::{Error, Result};
use crate::geometry::{ball_volume, cc_distance, BoundaryPoint, MetricContext, Twist};
use crate::quadrature::{try_integrate_breaks, try_integrate_halfline_damped, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub n: i64,
    /// `∫_0^∞ τ e^{-τ G} ∫ I(η, τ)^{-1} dη dτ`.
    pub value: f64,
    /// `G = b(n) + b(-n) + ε`.
    pub gap: f64,
    /// `Z̄^k Z S^ε(z_n, z_{-n}) = -b^{(k+1)}(n) value / (2^{k+2} π²)`.
    pub kernel_value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub k: usize,
    pub epsilon: f64,
    pub rows: Vec<SharpnessRow>,
    /// Least-squares slope of `ln value` against `ln gap`.
    pub slope_vs_gap: f64,
    /// Least-squares slope of `ln value` against `ln |n|`.
    pub slope_vs_n: f64,
    pub inner_integral_stats: InnerStats,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("a slope fit needs at least two paired samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit abscissae are all equal"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Slope of `ln y` against `ln x`; every sample must be positive.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("log-log fit needs positive samples"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

/// `Z̄^k Z S^ε` at the antipodal points `z_n = (n, ib(n))`, `z_{-n}`, where `z + w̄ = 0`.
///
/// The `η` integral `K(τ) = ∫ I(η, τ)^{-1} dη` does not depend on `n` and is shared across the scan.
pub fn sharpness_scan(
    profile: &ProfileRef,
    k: usize,
    ns: &[i64],
    epsilon: f64,
    cfg: &QuadratureConfig,
) -> Result<SharpnessReport> {
    if k == 0 {
        return Err(Error::invalid("the sharpness scan needs k >= 1"));
    }
    if k + 1 > profile.max_order() {
        return Err(Error::Capability(format!(
            "profile '{}' provides derivatives up to order {}, order {} requested",
            profile.name(),
            profile.max_order(),
            k + 1
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if ns.len() < 2 || ns.contains(&0) {
        return Err(Error::invalid("the sharpness scan needs at least two nonzero n"));
    }
    cfg.validate()?;
    let icfg = inner_cfg(cfg);
    let cache = RefCell::new(InnerCache::default());
    let k_of_tau: RefCell<HashMap<u64, (f64, f64)>> = RefCell::new(HashMap::new());
    let slope0 = profile.deriv(1, 0.0)?;
    let b0 = profile.b(0.0);

    let shared_k = |tau: f64| -> Result<(f64, f64)> {
        if let Some(&v) = k_of_tau.borrow().get(&tau.to_bits()) {
            return Ok(v);
        }
        let half = eta_half_width(profile, tau, cfg.truncation_log_cut);
        let r = try_integrate_breaks(
            |eta: f64| -> Result<f64> {
                let log_i = cache.borrow_mut().log_inner(profile, eta, tau, &icfg)?;
                Ok((-2.0 * tau * b0 - log_i).exp())
            },
            &eta_breaks(tau * slope0, half),
            cfg,
        )?
        .require_converged("η integral")?;
        let v = (r.value, r.error_estimate);
        k_of_tau.borrow_mut().insert(tau.to_bits(), v);
        Ok(v)
    };

    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let x = n as f64;
        let gap = profile.b(x) + profile.b(-x) - 2.0 * b0 + epsilon;
        let mut inner_err = 0.0f64;
        let r = try_integrate_halfline_damped(
            |tau: f64| -> Result<f64> {
                if tau <= 0.0 {
                    return Ok(0.0);
                }
                let (kv, ke) = shared_k(tau)?;
                inner_err = inner_err.max(ke);
                Ok(tau * (-tau * gap).exp() * kv)
            },
            gap,
            cfg,
        )?;
        let pref = -profile.deriv(k + 1, x)? / (2f64.powi(k as i32 + 2) * PI * PI);
        let error = r.error_estimate + inner_err / (gap * gap);
        rows.push(SharpnessRow {
            n,
            value: r.value,
            gap,
            kernel_value: pref * r.value,
            error_estimate: error,
            converged: r.converged,
        });
    }
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let abs_n: Vec<f64> = rows.iter().map(|r| r.n.unsigned_abs() as f64).collect();
    Ok(SharpnessReport {
        k,
        epsilon,
        slope_vs_gap: loglog_slope(&gaps, &values)?,
        slope_vs_n: loglog_slope(&abs_n, &values)?,
        rows,
        inner_integral_stats: cache.into_inner().stats,
    })
}

/// [`sharpness_scan`] with the kernel tolerances.
pub fn sharpness_scan_default(profile: &ProfileRef, k: usize, ns: &[i64], epsilon: f64) -> Result<SharpnessReport> {
    sharpness_scan(profile, k, ns, epsilon, &kernel_quadrature())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerConstant {
    pub n: i64,
    /// `d(z_n, z_{-n})`.
    pub distance: f64,
    /// `|B(z_n, d)|`.
    pub ball_volume: f64,
    /// `value · |B(z_n, d)| · d²`.
    pub constant: f64,
}

/// Compares each scan value with `d^{-2} / |B_d|`; the ratio stays bounded below when the
/// decay rate is sharp.
pub fn sharpness_lower_constants(ctx: &MetricContext, rows: &[SharpnessRow]) -> Result<Vec<LowerConstant>> {
    rows.iter()
        .map(|r| {
            let x = r.n as f64;
            let a = BoundaryPoint::new(x, 0.0, 0.0);
            let b = BoundaryPoint::new(-x, 0.0, 0.0);
            let distance = cc_distance(ctx, &a, &b, Twist::Line)?;
            let volume = ball_volume(ctx, &a, distance)?;
            Ok(LowerConstant {
                n: r.n,
                distance,
                ball_volume: volume,
                constant: r.value * volume * distance * distance,
            })
        })
        .collect()
}

/// Level-set width and minimum of the phase `φ(θ) = 2[τb(θ) - ηθ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub tau: f64,
    pub eta: f64,
    /// `|L(τ, η)|`.
    pub level_width: f64,
    /// `|L(τ, η)| τ^{1/2}`.
    pub scaled_width: f64,
    /// `-φ(θ₀)`.
    pub neg_phi0: f64,
}

pub fn phase_samples(profile: &ProfileRef, points: &[(f64, f64)], cfg: &QuadratureConfig) -> Result<Vec<PhaseSample>> {
    points
        .iter()
        .map(|&(tau, eta)| {
            let r = inner_weight_integral(profile.as_ref(), eta, tau, cfg)?;
            Ok(PhaseSample {
                tau,
                eta,
                level_width: r.level_width,
                scaled_width: r.level_width * tau.sqrt(),
                neg_phi0: -r.phi0,
            })
        })
        .collect()
}
