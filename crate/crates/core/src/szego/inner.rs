use serde::{Deserialize, Serialize};

use crate::domain::TubeProfile;
use crate::error::{Error, Result};
use crate::quadrature::{convex_laplace_from_minimum, QuadratureConfig};

/// `θ` with `b'(θ) = s`, by Newton steps safeguarded by bisection.
///
/// Since `b'(0) = 0` and `a <= b'' <= A`, the root lies between `s/A` and `s/a`.
pub fn phase_minimizer(profile: &dyn TubeProfile, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::invalid(format!("slope must be finite, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let (a, big_a) = profile.convexity_bounds();
    let (mut lo, mut hi) = if s > 0.0 {
        (s / big_a, s / a)
    } else {
        (s / a, s / big_a)
    };
    let widen = 1e-12 * s.abs().max(1.0);
    lo -= widen;
    hi += widen;
    let g = |x: f64| -> Result<f64> { Ok(profile.deriv(1, x)? - s) };
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo > 0.0 || ghi < 0.0 {
        return Err(Error::invalid(format!(
            "profile derivative is not bracketed on [{lo}, {hi}] for slope {s}; check the convexity bounds"
        )));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d2 = profile.deriv(2, x)?;
        let newton = x - gx / d2;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// `I(η, τ) = ∫ e^{2[ηθ - τb(θ)]} dθ` in log form, with the data of the convex phase
/// `φ(θ) = 2[τb(θ) - ηθ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerIntegral {
    pub log_value: f64,
    pub theta0: f64,
    /// `φ(θ₀)`.
    pub phi0: f64,
    /// `|L|` for `L = {φ <= φ(θ₀) + 1}`.
    pub level_width: f64,
    /// `log(|L| e^{-φ(θ₀)})`.
    pub log_surrogate: f64,
    pub rel_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl InnerIntegral {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

pub fn inner_weight_integral(
    profile: &dyn TubeProfile,
    eta: f64,
    tau: f64,
    cfg: &QuadratureConfig,
) -> Result<InnerIntegral> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be positive and finite, got {tau}")));
    }
    if !eta.is_finite() {
        return Err(Error::invalid(format!("eta must be finite, got {eta}")));
    }
    let theta0 = phase_minimizer(profile, eta / tau)?;
    let b0 = profile.b(theta0);
    let phi0 = 2.0 * (tau * b0 - eta * theta0);
    let curvature = profile.deriv(2, theta0)?;
    let scale = 1.0 / (tau * curvature).sqrt();
    let shifted = |th: f64| 2.0 * tau * (profile.b(th) - b0) - 2.0 * eta * (th - theta0);
    let lap = convex_laplace_from_minimum(shifted, theta0, scale, cfg)?;
    Ok(InnerIntegral {
        log_value: lap.log_refined - phi0,
        theta0,
        phi0,
        level_width: lap.level.width,
        log_surrogate: lap.log_surrogate - phi0,
        rel_error: lap.rel_error,
        evaluations: lap.evaluations,
        converged: lap.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ParabolicTube, SharpnessTube};
    use std::f64::consts::PI;

    #[test]
    fn parabolic_closed_form() {
        let cfg = QuadratureConfig::default();
        let p = ParabolicTube;
        let r = inner_weight_integral(&p, 0.0, 1.0, &cfg).unwrap();
        assert!((r.value() - PI.sqrt()).abs() < 1e-10);
        let r = inner_weight_integral(&p, 2.0, 1.0, &cfg).unwrap();
        let exact = PI.sqrt() * 4f64.exp();
        assert!((r.value() - exact).abs() < 1e-3 * exact);
        for &(eta, tau) in &[(0.3, 0.2), (-7.0, 3.0), (40.0, 10.0)] {
            let r = inner_weight_integral(&p, eta, tau, &cfg).unwrap();
            let log_exact = 0.5 * (PI / tau).ln() + eta * eta / tau;
            assert!((r.log_value - log_exact).abs() < 1e-9, "eta {eta} tau {tau}");
        }
    }

    #[test]
    fn even_profile_symmetry() {
        let cfg = QuadratureConfig::default();
        let p = ParabolicTube;
        let a = inner_weight_integral(&p, 1.7, 0.6, &cfg).unwrap();
        let b = inner_weight_integral(&p, -1.7, 0.6, &cfg).unwrap();
        assert!((a.log_value - b.log_value).abs() < 1e-10);
    }

    #[test]
    fn minimizer_inverts_derivative() {
        let p = SharpnessTube::new();
        for &s in &[-5.0, -0.3, 0.0, 0.01, 2.5, 30.0] {
            let th = phase_minimizer(&p, s).unwrap();
            assert!((p.deriv(1, th).unwrap() - s).abs() < 1e-12 * s.abs().max(1.0));
        }
    }
}
