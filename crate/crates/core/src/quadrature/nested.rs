use std::cell::Cell;

use super::adaptive::{failure, try_integrate_breaks};
use super::{IntegralResult, QuadratureConfig, Scalar};
use crate::error::Result;

/// Iterated adaptive integral `∫ dx ∫ f(x, y) dy` over panels `outer` in `x` and
/// panels `inner(x)` in `y`.
///
/// Every inner integral must converge under `inner_cfg`; the reported error adds the
/// largest inner error estimate times the outer length.
pub fn try_integrate_nested<T, F, B>(
    mut f: F,
    outer: &[f64],
    inner: B,
    outer_cfg: &QuadratureConfig,
    inner_cfg: &QuadratureConfig,
) -> Result<IntegralResult<T>>
where
    T: Scalar,
    F: FnMut(f64, f64) -> Result<T>,
    B: Fn(f64) -> Vec<f64>,
{
    let evaluations = Cell::new(0usize);
    let worst_inner = Cell::new(0.0f64);
    let r = try_integrate_breaks(
        |x| {
            let breaks = inner(x);
            let ri = try_integrate_breaks(|y| f(x, y), &breaks, inner_cfg)?;
            evaluations.set(evaluations.get() + ri.evaluations);
            if !ri.converged {
                return Err(failure(&ri, "inner integral of iterated quadrature"));
            }
            worst_inner.set(worst_inner.get().max(ri.error_estimate));
            Ok(ri.value)
        },
        outer,
        outer_cfg,
    )?;
    let length = outer.last().copied().unwrap_or(0.0) - outer.first().copied().unwrap_or(0.0);
    Ok(IntegralResult {
        value: r.value,
        error_estimate: r.error_estimate + worst_inner.get() * length.abs(),
        evaluations: evaluations.get(),
        converged: r.converged,
    })
}

/// Evenly spaced break points `a = p_0 < … < p_n = b`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
        .collect()
}
