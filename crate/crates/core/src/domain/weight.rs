use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::tube::TubeProfile;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_1d, QuadratureConfig};
use crate::smooth::{bump, cutoff, smooth_step};

pub type WeightRef = Arc<dyn Weight>;

/// How a weight obtains its mixed partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference,
}

/// Nonnegative density `h = ΔP` with mixed partials `∂^{α+β} h / ∂z^α ∂z̄^β`.
pub trait Weight: Send + Sync + fmt::Debug {
    fn eval(&self, z: Complex64) -> f64;

    /// Mixed partial of order `alpha` in `z` and `beta` in `z̄`; `partial(0, 0, z) == eval(z)`.
    fn partial(&self, alpha: usize, beta: usize, z: Complex64) -> Result<Complex64>;

    /// Highest derivative order the evaluator is trusted for.
    fn max_order(&self) -> usize;

    fn derivative_source(&self) -> DerivativeSource;

    /// Known upper bound for `sup |h|`, when one is available.
    fn sup_bound(&self) -> Option<f64> {
        None
    }

    /// True when `h(z)` depends on `Re z` alone.
    fn depends_on_real_part_only(&self) -> bool {
        false
    }

    fn name(&self) -> String;
}

pub(crate) fn check_order(w: &dyn Weight, alpha: usize, beta: usize) -> Result<()> {
    if alpha + beta > w.max_order() {
        return Err(Error::Capability(format!(
            "weight '{}' provides derivatives up to order {}, order {} requested",
            w.name(),
            w.max_order(),
            alpha + beta
        )));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

/// Finite-difference step for a derivative of total order `k`.
pub fn fd_step(k: usize) -> f64 {
    if k <= 2 {
        1e-4
    } else {
        f64::EPSILON.powf(1.0 / (k as f64 + 2.0)).max(1e-4)
    }
}

/// `∂_x^nx ∂_y^ny f` by tensor central differences with step `h`.
fn central_xy<F: Fn(Complex64) -> f64>(f: &F, z: Complex64, nx: usize, ny: usize, h: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..=nx {
        let cx = binomial(nx, i) * if i % 2 == 0 { 1.0 } else { -1.0 };
        let dx = (nx as f64 / 2.0 - i as f64) * h;
        for l in 0..=ny {
            let cy = binomial(ny, l) * if l % 2 == 0 { 1.0 } else { -1.0 };
            let dy = (ny as f64 / 2.0 - l as f64) * h;
            acc += cx * cy * f(z + Complex64::new(dx, dy));
        }
    }
    acc / h.powi((nx + ny) as i32)
}

/// Mixed Wirtinger partial of a real function by central differences.
pub fn fd_partial<F: Fn(Complex64) -> f64>(f: &F, alpha: usize, beta: usize, z: Complex64) -> Complex64 {
    if alpha == 0 && beta == 0 {
        return Complex64::new(f(z), 0.0);
    }
    let k = alpha + beta;
    let h = fd_step(k);
    // ∂_z^α ∂_z̄^β = 2^{-k} (∂_x - i∂_y)^α (∂_x + i∂_y)^β
    let mut acc = Complex64::new(0.0, 0.0);
    let mut cache: BTreeMap<usize, f64> = BTreeMap::new();
    let minus_i = Complex64::new(0.0, -1.0);
    let plus_i = Complex64::new(0.0, 1.0);
    for p in 0..=alpha {
        for q in 0..=beta {
            let ny = p + q;
            let d = *cache.entry(ny).or_insert_with(|| central_xy(f, z, k - ny, ny, h));
            let coeff = binomial(alpha, p) * binomial(beta, q);
            acc += minus_i.powu(p as u32) * plus_i.powu(q as u32) * (coeff * d);
        }
    }
    acc / 2f64.powi(k as i32)
}

/// `∇_ν^j h = Σ_k C(j,k) ν^k ν̄^{j-k} ∂^j h / ∂z^k ∂z̄^{j-k}` from the partials of order `j`
/// (`partials[k]` holds the `z^k z̄^{j-k}` partial).
pub fn directional_from_partials(partials: &[Complex64], nu: Complex64) -> f64 {
    let j = partials.len() - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, p) in partials.iter().enumerate() {
        acc += nu.powu(k as u32) * nu.conj().powu((j - k) as u32) * (binomial(j, k) * p);
    }
    acc.re
}

/// All partials of order `j` at `z`, indexed by the number of `z` derivatives.
pub fn partials_of_order(w: &dyn Weight, j: usize, z: Complex64) -> Result<Vec<Complex64>> {
    (0..=j).map(|k| w.partial(k, j - k, z)).collect()
}

/// Directional derivative `∇_ν^j h(z)` along the unit vector `nu`.
pub fn directional_derivative(w: &dyn Weight, j: usize, nu: Complex64, z: Complex64) -> Result<f64> {
    Ok(directional_from_partials(&partials_of_order(w, j, z)?, nu))
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantWeight {
    pub value: f64,
}

impl ConstantWeight {
    pub fn new(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::invalid(format!(
                "constant weight must be finite and >= 0, got {value}"
            )));
        }
        Ok(Self { value })
    }
}

impl Weight for ConstantWeight {
    fn eval(&self, _z: Complex64) -> f64 {
        self.value
    }
    fn partial(&self, alpha: usize, beta: usize, z: Complex64) -> Result<Complex64> {
        if alpha == 0 && beta == 0 {
            return Ok(Complex64::new(self.eval(z), 0.0));
        }
        Ok(Complex64::new(0.0, 0.0))
    }
    fn max_order(&self) -> usize {
        usize::MAX
    }
    fn derivative_source(&self) -> DerivativeSource {
        DerivativeSource::Analytic
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(self.value)
    }
    fn depends_on_real_part_only(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("constant({})", self.value)
    }
}

/// Real polynomial `Σ c_{ab} z^a z̄^b` with `c_{ba} = conj(c_{ab})`.
#[derive(Debug, Clone)]
pub struct PolynomialWeight {
    terms: Vec<(usize, usize, Complex64)>,
}

impl PolynomialWeight {
    pub fn new(terms: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut map: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for &(a, b, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid("polynomial coefficients must be finite"));
            }
            *map.entry((a, b)).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let scale = map.values().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        for (&(a, b), &c) in &map {
            let mirror = map.get(&(b, a)).copied().unwrap_or_default();
            if (c - mirror.conj()).norm() > 1e-12 * scale {
                return Err(Error::invalid(format!(
                    "polynomial is not real-valued: coefficient of z^{a} z̄^{b} is {c}, mirror term has {mirror}"
                )));
            }
        }
        Ok(Self {
            terms: map.into_iter().map(|((a, b), c)| (a, b, c)).collect(),
        })
    }

    /// `(Re z)^2 = (z² + 2 z z̄ + z̄²) / 4`.
    pub fn real_part_squared() -> Self {
        let q = Complex64::new(0.25, 0.0);
        Self::new(&[(2, 0, q), (1, 1, q * 2.0), (0, 2, q)]).expect("real polynomial")
    }

    /// `c |z|^{2p}`.
    pub fn radial_power(c: f64, p: usize) -> Self {
        Self::new(&[(p, p, Complex64::new(c, 0.0))]).expect("real polynomial")
    }

    pub fn terms(&self) -> &[(usize, usize, Complex64)] {
        &self.terms
    }

    fn sum(&self, alpha: usize, beta: usize, z: Complex64) -> Complex64 {
        let zb = z.conj();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b, c) in &self.terms {
            if a < alpha || b < beta {
                continue;
            }
            let f = falling(a, alpha) * falling(b, beta);
            acc += c * f * z.powu((a - alpha) as u32) * zb.powu((b - beta) as u32);
        }
        acc
    }
}

impl Weight for PolynomialWeight {
    fn eval(&self, z: Complex64) -> f64 {
        self.sum(0, 0, z).re
    }
    fn partial(&self, alpha: usize, beta: usize, z: Complex64) -> Result<Complex64> {
        if alpha == 0 && beta == 0 {
            return Ok(Complex64::new(self.eval(z), 0.0));
        }
        Ok(self.sum(alpha, beta, z))
    }
    fn max_order(&self) -> usize {
        usize::MAX
    }
    fn derivative_source(&self) -> DerivativeSource {
        DerivativeSource::Analytic
    }
    fn name(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, b, c)| format!("({c})z^{a}zbar^{b}"))
            .collect();
        format!("polynomial[{}]", parts.join(" + "))
    }
}

/// `h(z) = b''(Re z)`: the weight of the tube potential `P(z) = b(Re z)`.
#[derive(Debug, Clone)]
pub struct TubeWeight {
    pub profile: Arc<dyn TubeProfile>,
}

impl Weight for TubeWeight {
    fn eval(&self, z: Complex64) -> f64 {
        self.profile.deriv(2, z.re).unwrap_or(f64::NAN)
    }
    fn partial(&self, alpha: usize, beta: usize, z: Complex64) -> Result<Complex64> {
        check_order(self, alpha, beta)?;
        if alpha == 0 && beta == 0 {
            return Ok(Complex64::new(self.eval(z), 0.0));
        }
        let k = alpha + beta;
        let d = self.profile.deriv(2 + k, z.re)?;
        Ok(Complex64::new(d / 2f64.powi(k as i32), 0.0))
    }
    fn max_order(&self) -> usize {
        self.profile.max_order().saturating_sub(2)
    }
    fn derivative_source(&self) -> DerivativeSource {
        DerivativeSource::Analytic
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(self.profile.convexity_bounds().1)
    }
    fn depends_on_real_part_only(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("tube({})", self.profile.name())
    }
}

/// `t` for `t <= 1`, `1 + ∫_0^{t-1} S` on `[1, 2]`, `3/2` for `t >= 2`.
pub fn saturating_chi(t: f64) -> f64 {
    if t <= 1.0 {
        return t;
    }
    if t >= 2.0 {
        return 1.5;
    }
    let cfg = QuadratureConfig::default().with_rel_tol(1e-14).with_abs_tol(1e-16);
    let r = integrate_1d(smooth_step, 0.0, t - 1.0, &cfg).expect("smooth step integrates");
    1.0 + r.value
}

/// `h = χ(ΔQ)` with the saturating profile [`saturating_chi`].
#[derive(Debug, Clone)]
pub struct SmoothedPolynomialWeight {
    pub q_laplacian: WeightRef,
}

impl Weight for SmoothedPolynomialWeight {
    fn eval(&self, z: Complex64) -> f64 {
        saturating_chi(self.q_laplacian.eval(z))
    }
    fn partial(&self, alpha: usize, beta: usize, z: Complex64) -> Result<Complex64> {
        check_order(self, alpha, beta)?;
        Ok(fd_partial(&|p| self.eval(p), alpha, beta, z))
    }
    fn max_order(&self) -> usize {
        4
    }
    fn derivative_source(&self) -> DerivativeSource {
        DerivativeSource::FiniteDifference
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(1.5)
    }
    fn name(&self) -> String {
        format!("smoothed({})", self.q_laplacian.name())
    }
}

/// `h(re^{iθ}) = 1 + χ(r) f(θ)` with `χ` rising from 0 at `r = 1` to 1 at `r = 2`
/// and `f` a unit bump of half-width `half_width` around `θ = 0`.
#[derive(Debug, Clone, Copy)]
pub struct SectorBumpWeight {
    pub half_width: f64,
}

impl Default for SectorBumpWeight {
    fn default() -> Self {
        Self { half_width: 0.01 }
    }
}

impl Weight for SectorBumpWeight {
    fn eval(&self, z: Complex64) -> f64 {
        let r = z.norm();
        if r <= 1.0 {
            return 1.0;
        }
        let rise = 1.0 - cutoff(r, 1.0, 2.0);
        1.0 + rise * bump(z.arg() / self.half_width)
    }
    fn partial(&self, alpha: usize, beta: usize, z: Complex64) -> Result<Complex64> {
        check_order(self, alpha, beta)?;
        Ok(fd_partial(&|p| self.eval(p), alpha, beta, z))
    }
    fn max_order(&self) -> usize {
        4
    }
    fn derivative_source(&self) -> DerivativeSource {
        DerivativeSource::FiniteDifference
    }
    fn sup_bound(&self) -> Option<f64> {
        Some(2.0)
    }
    fn name(&self) -> String {
        format!("sector-bump(half_width={})", self.half_width)
    }
}

/// `z ↦ base(z + shift)`.
#[derive(Debug, Clone)]
pub struct ShiftedWeight {
    pub base: WeightRef,
    pub shift: Complex64,
}

impl Weight for ShiftedWeight {
    fn eval(&self, z: Complex64) -> f64 {
        self.base.eval(z + self.shift)
    }
    fn partial(&self, alpha: usize, beta: usize, z: Complex64) -> Result<Complex64> {
        self.base.partial(alpha, beta, z + self.shift)
    }
    fn max_order(&self) -> usize {
        self.base.max_order()
    }
    fn derivative_source(&self) -> DerivativeSource {
        self.base.derivative_source()
    }
    fn sup_bound(&self) -> Option<f64> {
        self.base.sup_bound()
    }
    fn name(&self) -> String {
        format!("{}(z + {})", self.base.name(), self.shift)
    }
}

/// Weight from an arbitrary closure; derivatives by central differences.
#[derive(Clone)]
pub struct FnWeight {
    f: Arc<dyn Fn(Complex64) -> f64 + Send + Sync>,
    label: String,
    max_order: usize,
    sup: Option<f64>,
}

impl FnWeight {
    pub fn new(
        label: &str,
        max_order: usize,
        sup: Option<f64>,
        f: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            label: label.to_string(),
            max_order,
            sup,
        }
    }
}

impl fmt::Debug for FnWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnWeight").field("label", &self.label).finish()
    }
}

impl Weight for FnWeight {
    fn eval(&self, z: Complex64) -> f64 {
        (self.f)(z)
    }
    fn partial(&self, alpha: usize, beta: usize, z: Complex64) -> Result<Complex64> {
        check_order(self, alpha, beta)?;
        Ok(fd_partial(&|p| (self.f)(p), alpha, beta, z))
    }
    fn max_order(&self) -> usize {
        self.max_order
    }
    fn derivative_source(&self) -> DerivativeSource {
        DerivativeSource::FiniteDifference
    }
    fn sup_bound(&self) -> Option<f64> {
        self.sup
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}
