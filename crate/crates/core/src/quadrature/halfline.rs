use super::adaptive::try_integrate_breaks;
use super::{IntegralResult, QuadratureConfig, Scalar};
use crate::error::{Error, Result};

const MAX_PANELS: usize = 96;

/// `∫_0^∞ f` for integrands dominated by `M e^{-damping τ / 2}`, summed over the panels
/// `[0,1], [1,2], [2,4], ...` until two consecutive panels are negligible.
pub fn try_integrate_halfline_damped<T, F>(mut f: F, damping: f64, cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: Scalar,
    F: FnMut(f64) -> Result<T>,
{
    cfg.validate()?;
    if !(damping > 0.0 && damping.is_finite()) {
        return Err(Error::Divergence(format!(
            "damping exponent must be positive, got {damping}"
        )));
    }
    let mut total = T::zero();
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut converged = true;
    let mut quiet = 0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..MAX_PANELS {
        let r = try_integrate_breaks(&mut f, &[lo, hi], cfg)?;
        total += r.value;
        error += r.error_estimate;
        evaluations += r.evaluations;
        converged &= r.converged;

        let small = r.value.modulus() + r.error_estimate <= cfg.target(total.modulus());
        quiet = if small { quiet + 1 } else { 0 };
        if quiet >= 2 && damping * lo >= 1.0 {
            return Ok(IntegralResult {
                value: total,
                error_estimate: error,
                evaluations,
                converged,
            });
        }
        if !small && 0.5 * damping * lo > cfg.truncation_log_cut + 10.0 {
            return Err(Error::Divergence(format!(
                "panel [{lo:e}, {hi:e}] still contributes {:.3e} far beyond the damping horizon",
                r.value.modulus()
            )));
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::Divergence(format!(
        "half-line integral did not settle within {MAX_PANELS} panels"
    )))
}

/// Infallible convenience wrapper around [`try_integrate_halfline_damped`].
pub fn integrate_halfline_damped<T, F>(mut f: F, damping: f64, cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: Scalar,
    F: FnMut(f64) -> T,
{
    try_integrate_halfline_damped(|x| Ok(f(x)), damping, cfg)
}
