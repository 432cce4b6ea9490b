//! Smooth cutoff functions built from `e^{-1/u}`.

fn flat(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth non-increasing step: 1 for `u <= 0`, 0 for `u >= 1`, with `S(u) + S(1-u) = 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let p = flat(1.0 - u);
    let q = flat(u);
    p / (p + q)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let v = 1.0 - u;
    let p = flat(v);
    let q = flat(u);
    let s = p + q;
    -(p / s) * (q / s) * (1.0 / (v * v) + 1.0 / (u * u))
}

/// 1 for `t <= lo`, 0 for `t >= hi`, smooth and non-increasing in between.
pub fn cutoff(t: f64, lo: f64, hi: f64) -> f64 {
    smooth_step((t - lo) / (hi - lo))
}

/// Derivative of [`cutoff`] in `t`.
pub fn cutoff_deriv(t: f64, lo: f64, hi: f64) -> f64 {
    smooth_step_deriv((t - lo) / (hi - lo)) / (hi - lo)
}

/// Compactly supported bump on (-1, 1) with value 1 at the origin.
pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}
