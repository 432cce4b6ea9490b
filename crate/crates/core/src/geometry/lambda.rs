use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MetricContext;
use crate::domain::{directional_from_partials, partials_of_order, Weight};
use crate::error::{Error, Result};
use crate::quadrature::{brent_root, try_integrate_breaks, try_integrate_nested, uniform_breaks, QuadratureConfig};

const THETA_PANELS: usize = 8;
const MU_START: f64 = 1e-12;
const MU_LIMIT: f64 = 1e9;
const STRIP_PANELS_MAX: usize = 1 << 14;

/// `Λ(z, δ) = ∫_{|η-z|<δ} h(η) dm(η)` by polar quadrature around `z`.
pub fn lambda_integral(ctx: &MetricContext, z: Complex64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!(
            "delta must be positive and finite, got {delta}"
        )));
    }
    let q = ctx.options.quadrature;
    let m = ctx.m() as i32;
    let scale = delta * delta * delta.powi(m - 2).min(1.0);
    let outer = q.with_abs_tol(q.abs_tol * scale);
    let inner = q.with_abs_tol(q.abs_tol * scale / delta);
    let w = &ctx.weight;
    if w.depends_on_real_part_only() {
        return strip_integral(w.as_ref(), z, delta, &outer);
    }
    let r = try_integrate_nested(
        |rho, theta| Ok(rho * w.eval(z + Complex64::from_polar(rho, theta))),
        &[0.0, delta],
        |_| uniform_breaks(-PI, PI, THETA_PANELS),
        &outer,
        &inner,
    )?
    .require_converged("disk integral of the weight")?;
    Ok(r.value)
}

/// `∫_{-π/2}^{π/2} 2δ² cos²φ h(z + δ sin φ) dφ`, the disk integral of a weight of `Re z` alone.
fn strip_integral(w: &dyn Weight, z: Complex64, delta: f64, q: &QuadratureConfig) -> Result<f64> {
    let panels = ((8.0 * delta).ceil() as usize).clamp(8, STRIP_PANELS_MAX);
    let r = try_integrate_breaks(
        |phi: f64| -> Result<f64> {
            let c = phi.cos();
            Ok(2.0 * delta * delta * c * c * w.eval(Complex64::new(z.re + delta * phi.sin(), z.im)))
        },
        &uniform_breaks(-0.5 * PI, 0.5 * PI, panels),
        q,
    )?
    .require_converged("strip integral of the weight")?;
    Ok(r.value)
}

/// Which polynomial model of `Λ` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaVariant {
    /// `sup_ν Σ_j |∇_ν^{j-2} h(z)| δ^j`.
    Two,
    /// `Σ_j (Σ_{n=0}^m |∇_{ν_n}^{j-2} h(z)|) δ^j` with `ν_n = exp(iπn/(m+1))`.
    Three,
    /// `Σ_j (Σ_k |∂^{j-2} h / ∂z^k ∂z̄^{j-2-k}(z)|) δ^j`.
    Four,
}

/// `ν_n = exp(iπn/(m+1))`, `n = 0..=m`.
pub fn default_directions(m: usize) -> Vec<Complex64> {
    (0..=m)
        .map(|n| Complex64::from_polar(1.0, PI * n as f64 / (m + 1) as f64))
        .collect()
}

fn partial_table(ctx: &MetricContext, z: Complex64) -> Result<Vec<Vec<Complex64>>> {
    (0..=ctx.m() - 2)
        .map(|i| partials_of_order(ctx.weight.as_ref(), i, z))
        .collect()
}

/// `c_j` of `Λ₃` for `j = 2..=m` (index `j - 2`).
fn lambda3_coefficients(table: &[Vec<Complex64>], m: usize) -> Vec<f64> {
    let dirs = default_directions(m);
    table
        .iter()
        .map(|p| dirs.iter().map(|&nu| directional_from_partials(p, nu).abs()).sum())
        .collect()
}

fn powers_sum(coeffs: &[f64], delta: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * delta.powi(i as i32 + 2))
        .sum()
}

/// Polynomial model `Λ₂`, `Λ₃` or `Λ₄` at `(z, δ)` for `δ <= δ₀`.
pub fn lambda_poly(ctx: &MetricContext, z: Complex64, delta: f64, variant: LambdaVariant) -> Result<f64> {
    if !(delta > 0.0 && delta <= ctx.options.delta0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, delta0 = {}], got {delta}",
            ctx.options.delta0
        )));
    }
    let m = ctx.m();
    let table = partial_table(ctx, z)?;
    Ok(match variant {
        LambdaVariant::Two => {
            let n = ctx.options.lambda2_directions;
            (0..n)
                .map(|k| {
                    let nu = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                    let coeffs: Vec<f64> = table.iter().map(|p| directional_from_partials(p, nu).abs()).collect();
                    powers_sum(&coeffs, delta)
                })
                .fold(0.0, f64::max)
        }
        LambdaVariant::Three => powers_sum(&lambda3_coefficients(&table, m), delta),
        LambdaVariant::Four => {
            let coeffs: Vec<f64> = table.iter().map(|p| p.iter().map(|c| c.norm()).sum()).collect();
            powers_sum(&coeffs, delta)
        }
    })
}

/// Inverse of `δ ↦ Λ(z, δ)`: bracket by doubling from `1e-12`, then a bracketed root solve.
pub fn mu_invert(ctx: &MetricContext, z: Complex64, target: f64) -> Result<f64> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::invalid(format!("target must be finite and >= 0, got {target}")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = MU_START;
    loop {
        if lambda_integral(ctx, z, hi)? >= target {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > MU_LIMIT {
            return Err(Error::Domain(format!(
                "Λ(z, δ) stays below {target} for all δ <= {MU_LIMIT:e} at z = {z}"
            )));
        }
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |d: f64| {
        if d <= 0.0 {
            return -target;
        }
        match lambda_integral(ctx, z, d) {
            Ok(v) => v - target,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let root = brent_root(f, lo, hi, 1e-15 * hi, 200);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    root
}

/// Model `Λ*(δ) = Σ a_j δ^j` for `δ <= 1` and `δ²` beyond, with the `Λ₃` coefficients at the
/// base point normalized to `Σ a_j = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaStar {
    /// `a_j` for `j = 2..=m` (index `j - 2`).
    pub coeffs: Vec<f64>,
}

impl LambdaStar {
    pub fn from_coefficients(raw: &[f64]) -> Result<Self> {
        if raw.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::invalid("model coefficients must be finite and >= 0"));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain(
                "all Λ₃ coefficients vanish; the weight is flat to order m - 2".into(),
            ));
        }
        Ok(Self {
            coeffs: raw.iter().map(|c| c / total).collect(),
        })
    }

    pub fn eval(&self, delta: f64) -> f64 {
        if delta >= 1.0 {
            delta * delta
        } else {
            powers_sum(&self.coeffs, delta)
        }
    }

    /// Non-decreasing inverse; `Λ*(√2 δ) >= 2 Λ*(δ)` makes it satisfy the `√2`-doubling bound.
    pub fn inverse(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return t.sqrt();
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `Λ*` at `z` from the `Λ₃` coefficients.
pub fn lambda_star_model(ctx: &MetricContext, z: Complex64) -> Result<LambdaStar> {
    let table = partial_table(ctx, z)?;
    LambdaStar::from_coefficients(&lambda3_coefficients(&table, ctx.m()))
}

/// `μ*(z, t)`, the inverse of the model [`LambdaStar`] at `z`.
pub fn mu_star(ctx: &MetricContext, z: Complex64, target: f64) -> Result<f64> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::invalid(format!("target must be finite and >= 0, got {target}")));
    }
    Ok(lambda_star_model(ctx, z)?.inverse(target))
}
