use serde::Serialize;

use super::adaptive::{failure, try_integrate_breaks};
use super::roots::brent_root;
use super::{IntegralResult, QuadratureConfig};
use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_DOUBLINGS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Minimum {
    pub theta: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimizes a convex function, growing `bracket` by doubling until it encloses the minimizer
/// and then refining by golden-section search until the bracket is narrower than `tol`.
pub fn minimize_convex<F>(mut phi: F, bracket: (f64, f64), tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    if !(lo.is_finite() && hi.is_finite()) || !(tol > 0.0) {
        return Err(Error::invalid(
            "minimize_convex needs a finite bracket and positive tolerance",
        ));
    }
    let mut evals = 0usize;
    let mut eval = |x: f64| -> Result<f64> {
        evals += 1;
        let v = phi(x);
        if v.is_nan() {
            return Err(Error::Integrand { location: x, value: v });
        }
        Ok(v)
    };

    let mut half = 0.5 * (hi - lo);
    if half <= 0.0 {
        half = tol.max(1e-8 * lo.abs().max(1.0));
    }
    let mut b = 0.5 * (lo + hi);
    let mut a = b - half;
    let mut c = b + half;
    let mut fa = eval(a)?;
    let mut fb = eval(b)?;
    let mut fc = eval(c)?;

    let mut steps = 0;
    while !(fb <= fa && fb <= fc) {
        steps += 1;
        if steps > MAX_DOUBLINGS || !(a.is_finite() && c.is_finite()) || fb == f64::NEG_INFINITY {
            return Err(Error::UnboundedBelow(format!(
                "no interior minimum found while expanding bracket to [{a:e}, {c:e}]"
            )));
        }
        let width = c - a;
        if fa < fb {
            c = b;
            fc = fb;
            b = a;
            fb = fa;
            a = b - width;
            fa = eval(a)?;
        } else {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            c = b + width;
            fc = eval(c)?;
        }
    }

    // Golden-section refinement of the bracket [a, c].
    let mut x1 = c - INV_PHI * (c - a);
    let mut x2 = a + INV_PHI * (c - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let mut iter = 0;
    while (c - a) > tol && iter < 400 {
        iter += 1;
        if f1 <= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - INV_PHI * (c - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (c - a);
            f2 = eval(x2)?;
        }
    }
    let (mut theta, mut value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if fb < value {
        theta = b;
        value = fb;
    }
    Ok(Minimum {
        theta,
        value,
        evaluations: evals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSet {
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub width: f64,
}

/// Distance `s > 0` from `theta0` in direction `dir` at which `phi` rises by `rise`,
/// starting the bracket search at `guess`.
fn rise_distance<F>(phi: &mut F, theta0: f64, phi0: f64, dir: f64, rise: f64, guess: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut g = |s: f64| phi(theta0 + dir * s) - phi0 - rise;
    let mut s = if guess > 0.0 && guess.is_finite() { guess } else { 1.0 };
    let mut gs = g(s);
    if gs.is_nan() {
        return Err(Error::Integrand {
            location: theta0 + dir * s,
            value: gs,
        });
    }
    let (lo, hi);
    if gs < 0.0 {
        let mut n = 0;
        loop {
            n += 1;
            s *= 2.0;
            gs = g(s);
            if gs >= 0.0 {
                break;
            }
            if n > MAX_DOUBLINGS || !s.is_finite() || s > 1e300 {
                return Err(Error::InfiniteWidth(format!(
                    "level phi(theta0) + {rise} never reached on the {} side",
                    if dir > 0.0 { "right" } else { "left" }
                )));
            }
        }
        lo = 0.5 * s;
        hi = s;
    } else {
        let mut n = 0;
        loop {
            n += 1;
            s *= 0.5;
            gs = g(s);
            if gs < 0.0 {
                break;
            }
            if n > MAX_DOUBLINGS || s < 1e-300 {
                return Err(Error::invalid("function rises discontinuously at its minimizer"));
            }
        }
        lo = s;
        hi = 2.0 * s;
    }
    brent_root(g, lo, hi, 1e-15 * hi, 200)
}

/// Unit sublevel set `{phi <= phi(theta0) + 1}` of a convex function minimized at `theta0`.
pub fn level_set_width<F>(mut phi: F, theta0: f64, guess: f64) -> Result<LevelSet>
where
    F: FnMut(f64) -> f64,
{
    let phi0 = phi(theta0);
    let plus = rise_distance(&mut phi, theta0, phi0, 1.0, 1.0, guess)?;
    let minus = rise_distance(&mut phi, theta0, phi0, -1.0, 1.0, guess)?;
    Ok(LevelSet {
        theta_minus: minus,
        theta_plus: plus,
        width: minus + plus,
    })
}

/// Both the `|L| e^{-phi(theta0)}` surrogate and a truncated-quadrature value of `∫ e^{-phi}`,
/// kept in logarithmic form so that huge or tiny integrals stay representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexLaplace {
    pub theta0: f64,
    pub phi0: f64,
    pub level: LevelSet,
    pub log_surrogate: f64,
    pub log_refined: f64,
    /// Relative error estimate of the refined value.
    pub rel_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl ConvexLaplace {
    pub fn surrogate(&self) -> f64 {
        self.log_surrogate.exp()
    }

    pub fn refined(&self) -> f64 {
        self.log_refined.exp()
    }

    /// surrogate / refined.
    pub fn ratio(&self) -> f64 {
        (self.log_surrogate - self.log_refined).exp()
    }

    pub fn refined_result(&self) -> IntegralResult<f64> {
        let value = self.refined();
        IntegralResult {
            value,
            error_estimate: self.rel_error * value,
            evaluations: self.evaluations,
            converged: self.converged,
        }
    }
}

/// Convex Laplace evaluation of `∫_R e^{-phi}`; `center` and `scale` seed the minimizer bracket.
pub fn convex_laplace<F>(mut phi: F, center: f64, scale: f64, cfg: &QuadratureConfig) -> Result<ConvexLaplace>
where
    F: FnMut(f64) -> f64,
{
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let min = minimize_convex(&mut phi, (center - scale, center + scale), 1e-9 * scale)?;
    let mut out = convex_laplace_from_minimum(&mut phi, min.theta, scale, cfg)?;
    out.evaluations += min.evaluations;
    Ok(out)
}

/// As [`convex_laplace`] with the minimizer already known.
pub fn convex_laplace_from_minimum<F>(
    mut phi: F,
    theta0: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<ConvexLaplace>
where
    F: FnMut(f64) -> f64,
{
    cfg.validate()?;
    let mut evals = 0usize;
    let mut counted = |x: f64| {
        evals += 1;
        phi(x)
    };
    let phi0 = counted(theta0);
    if !phi0.is_finite() {
        return Err(Error::Integrand {
            location: theta0,
            value: phi0,
        });
    }
    let plus = rise_distance(&mut counted, theta0, phi0, 1.0, 1.0, scale)?;
    let minus = rise_distance(&mut counted, theta0, phi0, -1.0, 1.0, scale)?;
    let level = LevelSet {
        theta_minus: minus,
        theta_plus: plus,
        width: minus + plus,
    };

    let cut = cfg.truncation_log_cut;
    let (cut_plus, cut_minus) = if cut > 1.0 {
        (
            rise_distance(&mut counted, theta0, phi0, 1.0, cut, plus * cut.sqrt())?,
            rise_distance(&mut counted, theta0, phi0, -1.0, cut, minus * cut.sqrt())?,
        )
    } else {
        (plus, minus)
    };

    let breaks = [
        theta0 - cut_minus,
        theta0 - minus,
        theta0,
        theta0 + plus,
        theta0 + cut_plus,
    ];
    let qcfg = QuadratureConfig {
        abs_tol: cfg.rel_tol * 1e-3 * level.width,
        ..*cfg
    };
    let r = try_integrate_breaks(|x| Ok((-(counted(x) - phi0)).exp()), &breaks, &qcfg)?;
    if r.value <= 0.0 {
        return Err(failure(&r, "convex Laplace integral is not positive"));
    }
    // Convexity bounds each dropped tail by s_cut e^{-cut} / cut.
    let tail = (cut_plus + cut_minus) * (-cut).exp() / cut.max(1.0);
    let rel_error = (r.error_estimate + tail) / r.value;
    Ok(ConvexLaplace {
        theta0,
        phi0,
        level,
        log_surrogate: level.width.ln() - phi0,
        log_refined: r.value.ln() - phi0,
        rel_error,
        evaluations: evals + r.evaluations,
        converged: r.converged,
    })
}
