use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::potential::{fd_grad_z, holo_deriv_fourier, require_positive_order, Potential};
use super::weight::WeightRef;
use crate::error::{Error, Result};
use crate::quadrature::{try_integrate_nested, uniform_breaks, QuadratureConfig};

const THETA_PANELS: usize = 32;
const GRAD_STEP: f64 = 1e-3;

/// `K₁(z, η) · ρ` with `η = ρ e^{iθ}`, the polar Jacobian folded in.
fn k1_polar(z: Complex64, rho: f64, theta: f64) -> f64 {
    let eta = Complex64::from_polar(rho, theta);
    let dist = (z - eta).norm();
    if dist == 0.0 {
        return 0.0;
    }
    let lin = (z * Complex64::from_polar(1.0, -theta)).re;
    (rho * (dist.ln() - rho.ln()) + lin) / (2.0 * PI)
}

/// `K₂(z, η) = (ln|1 - u| + Re u + Re u² / 2) / 2π` with `u = z / η`.
fn k2(z: Complex64, eta: Complex64) -> f64 {
    let u = z / eta;
    let a = u.norm();
    if a < 0.5 {
        // -Re Σ_{n≥3} u^n / n
        let mut acc = 0.0;
        let mut p = u * u * u;
        let mut n = 3.0;
        while p.norm() > 1e-18 * a.powi(3) && n < 200.0 {
            acc -= p.re / n;
            p *= u;
            n += 1.0;
        }
        return acc / (2.0 * PI);
    }
    let one_minus = Complex64::new(1.0, 0.0) - u;
    let m = one_minus.norm();
    if m == 0.0 {
        return 0.0;
    }
    (m.ln() + u.re + 0.5 * (u * u).re) / (2.0 * PI)
}

/// Potential `P̃` with `ΔP̃ = h` from the normalized logarithmic kernels `K₁` (on `|η| <= 1`)
/// and `K₂` (on `|η| >= 1`).
#[derive(Debug, Clone)]
pub struct BuiltPotential {
    weight: WeightRef,
    cfg: QuadratureConfig,
    sup: f64,
}

/// Builds `P̃` for a bounded weight; the weight must report a sup bound.
pub fn build_potential(w: WeightRef, q: &QuadratureConfig) -> Result<BuiltPotential> {
    q.validate()?;
    let sup = w.sup_bound().ok_or_else(|| {
        Error::Capability(format!(
            "weight '{}' has no sup bound; the K₂ tail cannot be controlled",
            w.name()
        ))
    })?;
    if !(sup >= 0.0 && sup.is_finite()) {
        return Err(Error::invalid(format!("sup bound must be finite and >= 0, got {sup}")));
    }
    Ok(BuiltPotential {
        weight: w,
        cfg: *q,
        sup,
    })
}

impl BuiltPotential {
    /// Outer radius beyond which the `K₂` tail is below `tol`.
    pub fn truncation_radius(&self, z: Complex64, tol: f64) -> f64 {
        let a = z.norm();
        let tail = 4.0 * PI / 3.0 * a.powi(3) * self.sup / tol;
        tail.max(2.0 * a).max(2.0)
    }

    fn inner_cfg(&self) -> QuadratureConfig {
        self.cfg
            .with_abs_tol(self.cfg.abs_tol * 0.1)
            .with_rel_tol(self.cfg.rel_tol * 0.1)
    }

    fn remainder(&self, z: Complex64, hz: f64, tol: f64) -> Result<f64> {
        let a = z.norm();
        let arg = z.arg();
        let theta = |_: f64| uniform_breaks(arg, arg + 2.0 * PI, THETA_PANELS);
        let inner = self.inner_cfg();
        let g = |eta: Complex64| self.weight.eval(eta) - hz;

        let mut disk = vec![0.0];
        if a < 1.0 {
            disk.push(a);
        }
        disk.push(1.0);
        let r1 = try_integrate_nested(
            |rho, th| {
                let gv = g(Complex64::from_polar(rho, th));
                Ok(if gv == 0.0 { 0.0 } else { k1_polar(z, rho, th) * gv })
            },
            &disk,
            theta,
            &self.cfg,
            &inner,
        )?
        .require_converged("K₁ disk integral")?;

        let radius = self.truncation_radius(z, tol);
        let mut outer = vec![0.0];
        if a > 1.0 {
            outer.push(a.ln());
        }
        outer.push(radius.ln());
        let r2 = try_integrate_nested(
            |s, th| {
                let rho = s.exp();
                let eta = Complex64::from_polar(rho, th);
                let gv = g(eta);
                Ok(if gv == 0.0 { 0.0 } else { k2(z, eta) * gv * rho * rho })
            },
            &outer,
            theta,
            &self.cfg,
            &inner,
        )?
        .require_converged("K₂ exterior integral")?;
        Ok(r1.value + r2.value)
    }
}

impl Potential for BuiltPotential {
    fn eval(&self, z: Complex64) -> Result<f64> {
        if z == Complex64::new(0.0, 0.0) {
            return Ok(0.0);
        }
        let hz = self.weight.eval(z);
        let base = 0.25 * hz * z.norm_sqr();
        let tol = self.cfg.target(base).max(self.cfg.abs_tol);
        if self.sup == 0.0 {
            return Ok(base);
        }
        Ok(base + self.remainder(z, hz, tol)?)
    }

    fn grad_z(&self, z: Complex64) -> Result<Complex64> {
        fd_grad_z(|p| self.eval(p), z, GRAD_STEP)
    }

    fn holo_deriv(&self, j: usize, z: Complex64) -> Result<Complex64> {
        require_positive_order(j)?;
        if j == 1 {
            return self.grad_z(z);
        }
        holo_deriv_fourier(|p| self.eval(p), j, z)
    }

    fn weight(&self) -> WeightRef {
        Arc::clone(&self.weight)
    }

    fn name(&self) -> String {
        format!("built({})", self.weight.name())
    }
}
