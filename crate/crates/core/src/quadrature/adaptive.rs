use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{IntegralResult, QuadratureConfig, Scalar};
use crate::error::{Diagnostics, Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_993,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Fixed 10-point Gauss-Legendre rule on `[a, b]`.
pub(crate) fn gauss_legendre_10<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for j in 0..5 {
        let dx = half * XGK[2 * j + 1];
        acc += WG[j] * (f(center - dx) + f(center + dx));
    }
    acc * half
}

/// Hard cap on the number of live subintervals of one integral.
const MAX_INTERVALS: usize = 20_000;

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    resabs: f64,
    depth: u32,
}

impl<T> Segment<T> {
    fn at_rounding_floor(&self) -> bool {
        self.error <= 50.0 * f64::EPSILON * self.resabs
    }
}

struct ByError<T>(Segment<T>);

impl<T> PartialEq for ByError<T> {
    fn eq(&self, other: &Self) -> bool {
        self.0.error == other.0.error
    }
}
impl<T> Eq for ByError<T> {}
impl<T> PartialOrd for ByError<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for ByError<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.error.total_cmp(&other.0.error)
    }
}

/// 21-point Kronrod rule with embedded 10-point Gauss rule on `[a, b]`.
fn gk21<T, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<T>>
where
    T: Scalar,
    F: FnMut(f64) -> Result<T>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<T> {
        let v = f(x)?;
        if !v.finite() {
            return Err(Error::Integrand {
                location: x,
                value: v.modulus(),
            });
        }
        Ok(v)
    };

    let fc = eval(center)?;
    let mut resg = T::zero();
    let mut resk = fc * WGK[10];
    let mut resabs = WGK[10] * fc.modulus();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += (f1 + f2) * WG[j];
        resk += (f1 + f2) * WGK[jtw];
        resabs += WGK[jtw] * (f1.modulus() + f2.modulus());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += (f1 + f2) * WGK[jtwm1];
        resabs += WGK[jtwm1] * (f1.modulus() + f2.modulus());
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).modulus();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).modulus() + (fv2[j] - reskh).modulus());
    }
    let dhalf = half.abs();
    let value = resk * half;
    let resabs = resabs * dhalf;
    let resasc = resasc * dhalf;
    let mut error = ((resk - resg) * half).modulus();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Segment {
        a,
        b,
        value,
        error,
        resabs,
        depth: 0,
    })
}

/// Global adaptive Gauss-Kronrod integration of a fallible integrand over `[a, b]`.
///
/// Infinite endpoints are handled by mapping onto a finite interval.
pub fn try_integrate_1d<T, F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: Scalar,
    F: FnMut(f64) -> Result<T>,
{
    if a.is_nan() || b.is_nan() {
        return Err(Error::invalid("integration limits must not be NaN"));
    }
    if a == b {
        return Ok(IntegralResult {
            value: T::zero(),
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    if a > b {
        let r = try_integrate_1d(f, b, a, cfg)?;
        return Ok(IntegralResult {
            value: r.value * -1.0,
            ..r
        });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => try_integrate_breaks(f, &[a, b], cfg),
        (true, false) => {
            let g = move |t: f64| -> Result<T> {
                let s = 1.0 - t;
                Ok(f(a + t / s)? * (1.0 / (s * s)))
            };
            try_integrate_breaks(g, &[0.0, 1.0], cfg)
        }
        (false, true) => {
            let g = move |t: f64| -> Result<T> {
                let s = 1.0 - t;
                Ok(f(b - t / s)? * (1.0 / (s * s)))
            };
            try_integrate_breaks(g, &[0.0, 1.0], cfg)
        }
        (false, false) => {
            let g = move |t: f64| -> Result<T> {
                let s = 1.0 - t * t;
                Ok(f(t / s)? * ((1.0 + t * t) / (s * s)))
            };
            try_integrate_breaks(g, &[-1.0, 0.0, 1.0], cfg)
        }
    }
}

/// Infallible convenience wrapper around [`try_integrate_1d`].
pub fn integrate_1d<T, F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: Scalar,
    F: FnMut(f64) -> T,
{
    try_integrate_1d(|x| Ok(f(x)), a, b, cfg)
}

/// Adaptive integration over consecutive finite panels `points[0]..points[n-1]`.
pub fn try_integrate_breaks<T, F>(mut f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<IntegralResult<T>>
where
    T: Scalar,
    F: FnMut(f64) -> Result<T>,
{
    cfg.validate()?;
    if points.len() < 2 {
        return Err(Error::invalid("at least two break points are required"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("break points must be finite"));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("break points must be sorted"));
    }

    let mut heap: BinaryHeap<ByError<T>> = BinaryHeap::new();
    let mut frozen: Vec<Segment<T>> = Vec::new();
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(ByError(gk21(&mut f, w[0], w[1])?));
            evaluations += 21;
        }
    }

    let totals = |heap: &BinaryHeap<ByError<T>>, frozen: &[Segment<T>]| {
        let mut value = T::zero();
        let mut error = 0.0;
        let mut floor = 0.0;
        for s in heap.iter().map(|s| &s.0).chain(frozen.iter()) {
            value += s.value;
            error += s.error;
            floor += 50.0 * f64::EPSILON * s.resabs;
        }
        (value, error, floor)
    };

    let (mut value, mut error, _) = totals(&heap, &frozen);
    let mut iterations = 0usize;
    loop {
        if error <= cfg.target(value.modulus()) {
            break;
        }
        let Some(ByError(seg)) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        let too_narrow = mid <= seg.a || mid >= seg.b;
        if seg.depth >= cfg.max_depth || too_narrow || seg.at_rounding_floor() {
            frozen.push(seg);
            continue;
        }
        if heap.len() + frozen.len() >= MAX_INTERVALS {
            frozen.push(seg);
            break;
        }
        let mut left = gk21(&mut f, seg.a, mid)?;
        let mut right = gk21(&mut f, mid, seg.b)?;
        evaluations += 42;
        left.depth = seg.depth + 1;
        right.depth = seg.depth + 1;
        value = value - seg.value + left.value + right.value;
        error = error - seg.error + left.error + right.error;
        heap.push(ByError(left));
        heap.push(ByError(right));
        iterations += 1;
        if iterations % 64 == 0 {
            let (v, e, _) = totals(&heap, &frozen);
            value = v;
            error = e;
        }
    }

    let (value, error, floor) = totals(&heap, &frozen);
    let converged = error <= cfg.target(value.modulus()) || error <= floor * 1.000_001;
    Ok(IntegralResult {
        value,
        error_estimate: error,
        evaluations,
        converged,
    })
}

/// Builds an `IntegralFailure` for a non-converged result with interval context.
pub(crate) fn failure<T: Scalar>(r: &IntegralResult<T>, context: &str) -> Error {
    Error::IntegralFailure(Box::new(Diagnostics {
        value: r.value.modulus(),
        error_estimate: r.error_estimate,
        evaluations: r.evaluations,
        intervals: r.evaluations / 21,
        context: context.to_string(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default().with_rel_tol(1e-13).with_abs_tol(1e-15)
    }

    #[test]
    fn polynomial_on_unit_interval() {
        let r = integrate_1d(|x| x * x, 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        assert!(r.converged);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn sine_over_half_period() {
        let r = integrate_1d(f64::sin, 0.0, PI, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_over_real_line() {
        let r = integrate_1d(|x: f64| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, &cfg()).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-10, "{}", r.value);
        assert!(r.converged);
    }

    #[test]
    fn half_lines_in_both_directions() {
        let r = integrate_1d(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate_1d(|x: f64| x.exp(), f64::NEG_INFINITY, 0.0, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate_1d(|x| x, 1.0, 0.0, &cfg()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn complex_integrand_shares_subdivision() {
        let r = integrate_1d(|x: f64| Complex64::new(0.0, x).exp(), 0.0, PI, &cfg()).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate_1d(|x: f64| x.ln(), 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn non_finite_value_reports_location() {
        let e = integrate_1d(|x: f64| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &cfg()).unwrap_err();
        match e {
            Error::Integrand { location, .. } => assert!(location > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn depth_limit_is_reported_honestly() {
        let shallow = QuadratureConfig { max_depth: 1, ..cfg() };
        let r = integrate_1d(|x: f64| (1.0 / (x + 1e-9)).sin(), 0.0, 1.0, &shallow).unwrap();
        assert!(!r.converged);
        assert!(r.error_estimate > 0.0);
    }

    #[test]
    fn break_points_are_respected() {
        let r = try_integrate_breaks(|x: f64| Ok(x.abs()), &[-1.0, 0.0, 2.0], &cfg()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-14);
        assert_eq!(r.evaluations, 42);
    }
}
