use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_10;
use crate::smooth::{cutoff, cutoff_deriv};

/// Convex profile `b` of a tube domain `{Im z₂ > b(Re z)}`.
pub trait TubeProfile: Send + Sync + fmt::Debug {
    fn b(&self, x: f64) -> f64;

    /// `b^{(k)}(x)`; `k = 0` returns `b(x)`.
    fn deriv(&self, k: usize, x: f64) -> Result<f64>;

    /// Constants `0 < a <= b'' <= A`.
    fn convexity_bounds(&self) -> (f64, f64);

    /// Highest derivative order the evaluator is trusted for.
    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn name(&self) -> String;
}

/// `b(x) = x²/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParabolicTube;

impl TubeProfile for ParabolicTube {
    fn b(&self, x: f64) -> f64 {
        0.5 * x * x
    }
    fn deriv(&self, k: usize, x: f64) -> Result<f64> {
        Ok(match k {
            0 => self.b(x),
            1 => x,
            2 => 1.0,
            _ => 0.0,
        })
    }
    fn convexity_bounds(&self) -> (f64, f64) {
        (1.0, 1.0)
    }
    fn name(&self) -> String {
        "parabolic".to_string()
    }
}

const CELLS: usize = 4096;
const INNER: f64 = 0.25;
const OUTER: f64 = 0.45;

fn chi(s: f64) -> f64 {
    cutoff(s, INNER, OUTER)
}

/// `β(t) = exp(t χ(|t|))`.
fn beta(t: f64) -> f64 {
    (t * chi(t.abs())).exp()
}

/// `β'(t) = β(t) (χ(|t|) + |t| χ'(|t|))`.
fn beta_prime(t: f64) -> f64 {
    let s = t.abs();
    beta(t) * (chi(s) + s * cutoff_deriv(s, INNER, OUTER))
}

/// Quintic Hermite interpolant on `[0, 1]` in the local variable `s`, cell width `h`.
fn hermite5(s: f64, h: f64, y0: [f64; 3], y1: [f64; 3]) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 0.5 * (s3 - 2.0 * s4 + s5);
    y0[0] * h0 + h * y0[1] * h1 + h * h * y0[2] * h2 + y1[0] * h3 + h * y1[1] * h4 + h * h * y1[2] * h5
}

/// Profile with `b'' (x) = β(x - round x)`, so `b'' = e^{x-n}` near every integer `n`
/// and `e^{-1/2} <= b'' <= e^{1/2}`; `b(0) = b'(0) = 0`.
#[derive(Clone)]
pub struct SharpnessTube {
    /// First antiderivative `F(t) = ∫_{-1/2}^t β` at the cell nodes.
    f1: Vec<f64>,
    /// Second antiderivative `G(t) = ∫_{-1/2}^t F` at the cell nodes.
    g: Vec<f64>,
    beta: Vec<f64>,
    beta_prime: Vec<f64>,
    f1_center: f64,
    g_center: f64,
    /// `∫_{-1/2}^{1/2} β`, the per-period increment of `b'`.
    c1: f64,
    /// `b(1) - c1 / 2`.
    d: f64,
}

impl fmt::Debug for SharpnessTube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SharpnessTube")
            .field("cells", &CELLS)
            .field("c1", &self.c1)
            .finish()
    }
}

impl Default for SharpnessTube {
    fn default() -> Self {
        Self::new()
    }
}

impl SharpnessTube {
    pub fn new() -> Self {
        let h = 1.0 / CELLS as f64;
        let node = |i: usize| -0.5 + i as f64 * h;
        let mut f1 = vec![0.0; CELLS + 1];
        let mut g = vec![0.0; CELLS + 1];
        for i in 0..CELLS {
            let (a, b) = (node(i), node(i + 1));
            let inc = gauss_legendre_10(beta, a, b);
            let moment = gauss_legendre_10(|u| (b - u) * beta(u), a, b);
            f1[i + 1] = f1[i] + inc;
            g[i + 1] = g[i] + h * f1[i] + moment;
        }
        let beta_n: Vec<f64> = (0..=CELLS).map(|i| beta(node(i))).collect();
        let beta_p: Vec<f64> = (0..=CELLS).map(|i| beta_prime(node(i))).collect();
        let mid = CELLS / 2;
        let c1 = f1[CELLS];
        let d = g[CELLS] - f1[mid];
        Self {
            f1_center: f1[mid],
            g_center: g[mid],
            f1,
            g,
            beta: beta_n,
            beta_prime: beta_p,
            c1,
            d,
        }
    }

    fn locate(t: f64) -> (usize, f64) {
        let h = 1.0 / CELLS as f64;
        let pos = (t + 0.5) / h;
        let i = (pos.floor() as isize).clamp(0, CELLS as isize - 1) as usize;
        (i, pos - i as f64)
    }

    fn f1_at(&self, t: f64) -> f64 {
        let (i, s) = Self::locate(t);
        let h = 1.0 / CELLS as f64;
        hermite5(
            s,
            h,
            [self.f1[i], self.beta[i], self.beta_prime[i]],
            [self.f1[i + 1], self.beta[i + 1], self.beta_prime[i + 1]],
        )
    }

    fn g_at(&self, t: f64) -> f64 {
        let (i, s) = Self::locate(t);
        let h = 1.0 / CELLS as f64;
        hermite5(
            s,
            h,
            [self.g[i], self.f1[i], self.beta[i]],
            [self.g[i + 1], self.f1[i + 1], self.beta[i + 1]],
        )
    }

    fn split(x: f64) -> (f64, f64) {
        let r = x.round();
        (r, x - r)
    }

    /// Per-period growth constant: `b(n) + b(-n) = c1 n²` for integers `n`.
    pub fn period_constant(&self) -> f64 {
        self.c1
    }
}

impl TubeProfile for SharpnessTube {
    fn b(&self, x: f64) -> f64 {
        let (r, t) = Self::split(x);
        let slope = -self.f1_center + r * self.c1;
        r * self.d + 0.5 * self.c1 * r * r + t * slope + (self.g_at(t) - self.g_center)
    }

    fn deriv(&self, k: usize, x: f64) -> Result<f64> {
        let (r, t) = Self::split(x);
        Ok(match k {
            0 => self.b(x),
            1 => -self.f1_center + r * self.c1 + self.f1_at(t),
            2 => beta(t),
            3 => beta_prime(t),
            _ => {
                let s = t.abs();
                if s <= INNER {
                    t.exp()
                } else if s >= OUTER {
                    0.0
                } else {
                    let order = k - 3;
                    let step = crate::domain::weight::fd_step(order);
                    let mut acc = 0.0;
                    for i in 0..=order {
                        let c = (0..i).fold(1.0, |a, j| a * (order - j) as f64 / (j + 1) as f64);
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        acc += sign * c * beta_prime(t + (order as f64 / 2.0 - i as f64) * step);
                    }
                    acc / step.powi(order as i32)
                }
            }
        })
    }

    fn convexity_bounds(&self) -> (f64, f64) {
        ((-0.5f64).exp(), 0.5f64.exp())
    }

    fn max_order(&self) -> usize {
        8
    }

    fn name(&self) -> String {
        "sharpness".to_string()
    }
}

/// Validates a user-chosen profile against its own contract on a sample of points.
pub fn check_profile(p: &dyn TubeProfile, samples: &[f64]) -> Result<()> {
    let (a, big_a) = p.convexity_bounds();
    if !(a > 0.0 && a <= big_a) {
        return Err(Error::invalid(format!(
            "convexity bounds ({a}, {big_a}) are not ordered and positive"
        )));
    }
    if p.b(0.0).abs() > 1e-12 || p.deriv(1, 0.0)?.abs() > 1e-12 {
        return Err(Error::invalid("profile must satisfy b(0) = b'(0) = 0"));
    }
    for &x in samples {
        let d2 = p.deriv(2, x)?;
        if d2 < a * (1.0 - 1e-12) || d2 > big_a * (1.0 + 1e-12) {
            return Err(Error::invalid(format!("b''({x}) = {d2} outside [{a}, {big_a}]")));
        }
    }
    Ok(())
}
