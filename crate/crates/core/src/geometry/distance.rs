use serde::{Deserialize, Serialize};

use super::lambda::{lambda_integral, lambda_star_model, mu_invert};
use super::{BoundaryPoint, MetricContext};
use crate::error::{Error, Result};
use crate::normalize::{twist_t, twist_t_kappa};
use crate::smooth::cutoff;

/// Twist used to align the `t` coordinates of two boundary points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Twist {
    /// Line integral `T(z, w)`.
    Line,
    /// Taylor twist `T_κ(z, w)`.
    Taylor(usize),
}

impl Twist {
    pub fn eval(&self, ctx: &MetricContext, a: &BoundaryPoint, b: &BoundaryPoint) -> Result<f64> {
        match *self {
            Twist::Line => twist_t(ctx.potential.as_ref(), a.z, b.z, &ctx.options.quadrature),
            Twist::Taylor(k) => twist_t_kappa(ctx.potential.as_ref(), a.z, b.z, k),
        }
    }
}

/// `d(a, b) = |z_a - z_b| + μ(z_b, |t_a - t_b - T(z_a, z_b)|)`.
pub fn cc_distance(ctx: &MetricContext, a: &BoundaryPoint, b: &BoundaryPoint, twist: Twist) -> Result<f64> {
    let gap = (a.t - b.t - twist.eval(ctx, a, b)?).abs();
    Ok((a.z - b.z).norm() + mu_invert(ctx, b.z, gap)?)
}

/// `|B(a, δ)| ≈ δ² Λ(z_a, δ)`.
pub fn ball_volume(ctx: &MetricContext, a: &BoundaryPoint, delta: f64) -> Result<f64> {
    Ok(delta * delta * lambda_integral(ctx, a.z, delta)?)
}

/// `σ_τ(w) = μ(w, 1/τ)`.
pub fn sigma_tau(ctx: &MetricContext, w: &BoundaryPoint, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be positive and finite, got {tau}")));
    }
    mu_invert(ctx, w.z, 1.0 / tau)
}

/// `ρ̃_τ(a, b) = (τΛ(z_b, |z_a - z_b|) + τΛ(z_a, |z_a - z_b|))^ν`.
pub fn rho_tilde(ctx: &MetricContext, a: &BoundaryPoint, b: &BoundaryPoint, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be positive and finite, got {tau}")));
    }
    let r = (a.z - b.z).norm();
    if r == 0.0 {
        return Ok(0.0);
    }
    let la = lambda_integral(ctx, a.z, r)?;
    let lb = lambda_integral(ctx, b.z, r)?;
    Ok((tau * la + tau * lb).powf(ctx.options.nu()))
}

/// Both branches of `d*` and the blended value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothDistance {
    pub small: f64,
    pub large: f64,
    pub value: f64,
}

/// `d* = χ(d*_small) d*_small + (1 - χ(ε d*_large)) d*_large` around the base point `w0`, with
/// `d*_small = μ̃((Λ̃(|z|²) + g²)^{1/2})`, `g = t - T(z, w0)` and
/// `d*_large = (|z|⁴ + (t - T₂(z, w0))²)^{1/4}`; `χ ≡ 1` on `[0, 1]` and `≡ 0` on `[2, ∞)`.
pub fn smooth_distance(ctx: &MetricContext, a: &BoundaryPoint, w0: &BoundaryPoint) -> Result<SmoothDistance> {
    let dz = a.z - w0.z;
    let g = a.t - w0.t - Twist::Line.eval(ctx, a, w0)?;
    let g2 = a.t - w0.t - Twist::Taylor(2).eval(ctx, a, w0)?;
    let model = lambda_star_model(ctx, w0.z)?;
    let r2 = dz.norm_sqr();
    let small = model.inverse((model.eval(r2) + g * g).sqrt());
    let large = (r2 * r2 + g2 * g2).sqrt().sqrt();
    let eps = ctx.options.smooth_epsilon;
    let value = cutoff(small, 1.0, 2.0) * small + (1.0 - cutoff(eps * large, 1.0, 2.0)) * large;
    Ok(SmoothDistance { small, large, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_heisenberg, make_parabolic_tube, make_tube_domain};
    use crate::geometry::MetricOptions;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn heis() -> MetricContext {
        let (w, p) = make_heisenberg();
        MetricContext::new(w, p, MetricOptions::default()).unwrap()
    }

    #[test]
    fn heisenberg_distances() {
        let ctx = heis();
        let o = BoundaryPoint::new(0.0, 0.0, 0.0);
        assert_eq!(cc_distance(&ctx, &o, &o, Twist::Line).unwrap(), 0.0);
        let a = BoundaryPoint::new(1.0, 0.0, 0.0);
        assert!((cc_distance(&ctx, &a, &o, Twist::Line).unwrap() - 1.0).abs() < 1e-12);
        let up = BoundaryPoint::new(0.0, 0.0, 4.0 * PI);
        assert!((cc_distance(&ctx, &up, &o, Twist::Line).unwrap() - 1.0).abs() < 1e-8);
        for k in [1, 2, 3] {
            assert!((cc_distance(&ctx, &up, &o, Twist::Taylor(k)).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn ball_volumes() {
        let ctx = heis();
        let a = BoundaryPoint::new(0.5, 0.5, 1.0);
        assert!((ball_volume(&ctx, &a, 1.0).unwrap() - 4.0 * PI).abs() < 1e-11);
        let v1 = ball_volume(&ctx, &a, 0.3).unwrap();
        let v2 = ball_volume(&ctx, &a, 0.6).unwrap();
        assert!(v2 / v1 >= 4.0);
    }

    #[test]
    fn sigma_tau_values() {
        let ctx = heis();
        let w = BoundaryPoint::new(0.0, 0.0, 0.0);
        assert!((sigma_tau(&ctx, &w, 1.0 / (4.0 * PI)).unwrap() - 1.0).abs() < 1e-8);
        assert!((sigma_tau(&ctx, &w, 1.0 / PI).unwrap() - 0.5).abs() < 1e-8);
        assert!(sigma_tau(&ctx, &w, 0.5).unwrap() >= sigma_tau(&ctx, &w, 2.0).unwrap());
    }

    #[test]
    fn rho_tilde_heisenberg_unit_separation() {
        let ctx = heis();
        let a = BoundaryPoint::new(0.0, 0.0, 0.0);
        let b = BoundaryPoint::new(1.0, 0.0, 3.0);
        let v = rho_tilde(&ctx, &a, &b, 1.0).unwrap();
        assert!((v - (8.0 * PI).sqrt()).abs() < 1e-10);
        assert_eq!(v, rho_tilde(&ctx, &b, &a, 1.0).unwrap());
        assert_eq!(
            rho_tilde(&ctx, &a, &BoundaryPoint::new(0.0, 0.0, 7.0), 1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn smooth_distance_vanishes_on_diagonal_and_tracks_d() {
        let ctx = heis();
        let w0 = BoundaryPoint::new(0.3, -0.2, 1.0);
        assert_eq!(smooth_distance(&ctx, &w0, &w0).unwrap().value, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for _ in 0..100 {
            let a = BoundaryPoint::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-20.0..20.0),
            );
            let b = BoundaryPoint::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-20.0..20.0),
            );
            let ds = smooth_distance(&ctx, &a, &b).unwrap().value;
            let d = cc_distance(&ctx, &a, &b, Twist::Line).unwrap();
            assert!(ds > 0.0);
            lo = lo.min(ds / d);
            hi = hi.max(ds / d);
        }
        assert!(lo > 0.1 && hi < 10.0, "ratio band [{lo}, {hi}]");
    }

    #[test]
    fn parabolic_tube_distance_is_positive() {
        let (w, p) = make_tube_domain(make_parabolic_tube());
        let ctx = MetricContext::new(w, p, MetricOptions::default()).unwrap();
        let a = BoundaryPoint::new(1.0, 2.0, 0.5);
        let b = BoundaryPoint::new(-0.5, 0.0, -1.0);
        assert!(cc_distance(&ctx, &a, &b, Twist::Line).unwrap() > 0.0);
        assert!(smooth_distance(&ctx, &a, &b).unwrap().value > 0.0);
    }

    #[test]
    fn small_epsilon_rejected() {
        let (w, p) = make_heisenberg();
        let opts = MetricOptions {
            smooth_epsilon: 0.25,
            ..MetricOptions::default()
        };
        assert!(MetricContext::new(w, p, opts).is_err());
    }
}
