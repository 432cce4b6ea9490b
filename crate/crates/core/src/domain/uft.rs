use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::weight::{directional_from_partials, partials_of_order, Weight};
use crate::error::{Error, Result};
use crate::quadrature::{try_integrate_nested, uniform_breaks, QuadratureConfig};

/// Sample grid for the (H1)–(H3) checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    /// Unit directions `ν` sampled uniformly on the circle.
    pub directions: usize,
    /// Centers for the annulus integrals, a coarser grid on the same rectangle.
    pub h3_nx: usize,
    pub h3_ny: usize,
    /// Radii `2^j` for `j = 0..=h3_max_exponent`.
    pub h3_max_exponent: u32,
    /// Initial angular panels of each annulus quadrature.
    pub theta_panels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_range: [-2.0, 2.0],
            y_range: [-2.0, 2.0],
            nx: 9,
            ny: 9,
            directions: 64,
            h3_nx: 3,
            h3_ny: 3,
            h3_max_exponent: 10,
            theta_panels: 128,
        }
    }
}

fn lattice(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> Vec<Complex64> {
    let coord = |r: [f64; 2], n: usize, i: usize| {
        if n == 1 {
            0.5 * (r[0] + r[1])
        } else {
            r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
        }
    };
    let mut pts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            pts.push(Complex64::new(coord(x, nx, i), coord(y, ny, j)));
        }
    }
    pts
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.h3_nx == 0 || self.h3_ny == 0 {
            return Err(Error::invalid("sample grid is empty"));
        }
        if self.directions < 64 {
            return Err(Error::invalid(format!(
                "at least 64 directions are required, got {}",
                self.directions
            )));
        }
        if self.theta_panels == 0 {
            return Err(Error::invalid("theta_panels must be positive"));
        }
        for r in [self.x_range, self.y_range] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
                return Err(Error::invalid(format!(
                    "grid range {r:?} is not an ordered finite interval"
                )));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Complex64> {
        lattice(self.x_range, self.y_range, self.nx, self.ny)
    }

    pub fn h3_centers(&self) -> Vec<Complex64> {
        lattice(self.x_range, self.y_range, self.h3_nx, self.h3_ny)
    }
}

/// Pass/fail thresholds; the constants of the hypotheses are not numeric, so these are policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UftThresholds {
    /// (H1) passes when the infimum is at least this.
    pub c1_min: f64,
    /// (H2) passes when every sampled `C^k` norm is at most this.
    pub ck_max: f64,
    /// (H3) fails when the sampled supremum exceeds this.
    pub c2_max: f64,
    /// (H3) also fails when `|I(r)|` keeps growing in `ln r` faster than this over the upper radii.
    pub h3_slope_max: f64,
}

impl Default for UftThresholds {
    fn default() -> Self {
        Self {
            c1_min: 1e-6,
            ck_max: 1e8,
            c2_max: 50.0,
            h3_slope_max: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UftConfig {
    pub grid: GridSpec,
    pub thresholds: UftThresholds,
    /// Highest `k` for the sampled `C^k` norms; capped by the weight's `max_order`.
    pub ck_order: usize,
    pub quadrature: QuadratureConfig,
}

impl Default for UftConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            thresholds: UftThresholds::default(),
            ck_order: 2,
            quadrature: QuadratureConfig::default().with_abs_tol(1e-10).with_rel_tol(1e-8),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
}

/// `sup_z |∫_{1≤|η|≤r} h(z+η)/η² dm(η)|` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H3Sample {
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UftReport {
    pub m: usize,
    pub h1_infimum: f64,
    pub h1_argmin: [f64; 2],
    /// `ck_norms[k]` is the sampled `max_{i≤k} sup |D^i h|`.
    pub ck_norms: Vec<f64>,
    pub h3_supremum: f64,
    pub h3_curve: Vec<H3Sample>,
    /// Least-squares slope of the curve against `ln r` over the upper half of the radii.
    pub h3_growth_slope: f64,
    pub grid: GridSpec,
    pub thresholds: UftThresholds,
    pub verdicts: Verdicts,
}

/// `sup_ν Σ_{i=0}^{m-2} |∇_ν^i h(z)|` over the sampled directions.
pub fn h1_sum(w: &dyn Weight, m: usize, z: Complex64, directions: usize) -> Result<f64> {
    let partials: Vec<Vec<Complex64>> = (0..=m - 2).map(|i| partials_of_order(w, i, z)).collect::<Result<_>>()?;
    let mut best = f64::NEG_INFINITY;
    for k in 0..directions {
        let nu = Complex64::from_polar(1.0, PI * k as f64 / directions as f64);
        let s: f64 = partials.iter().map(|p| directional_from_partials(p, nu).abs()).sum();
        best = best.max(s);
    }
    Ok(best)
}

/// `∫_{r_lo≤|η|≤r_hi} h(z+η)/η² dm(η)`, integrated in `s = ln|η|`.
pub fn annulus_integral(
    w: &dyn Weight,
    z: Complex64,
    r_lo: f64,
    r_hi: f64,
    theta_panels: usize,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    let r = try_integrate_nested(
        |s, th| {
            let eta = Complex64::from_polar(s.exp(), th);
            Ok(Complex64::from_polar(w.eval(z + eta), -2.0 * th))
        },
        &[r_lo.ln(), r_hi.ln()],
        |_| uniform_breaks(-PI, PI, theta_panels),
        q,
        q,
    )?
    .require_converged("annulus integral")?;
    Ok(r.value)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Sampled evidence for the uniform finite-type hypotheses of order `m`.
pub fn verify_uft(w: &dyn Weight, m: usize, cfg: &UftConfig) -> Result<UftReport> {
    if m < 2 {
        return Err(Error::invalid(format!("type order m must be at least 2, got {m}")));
    }
    cfg.grid.validate()?;
    cfg.quadrature.validate()?;
    if w.max_order() < m - 2 {
        return Err(Error::Capability(format!(
            "weight '{}' provides derivatives up to order {}, (H1) with m = {m} needs {}",
            w.name(),
            w.max_order(),
            m - 2
        )));
    }
    let pts = cfg.grid.points();

    let h1: Vec<f64> = pts
        .par_iter()
        .map(|&z| h1_sum(w, m, z, cfg.grid.directions))
        .collect::<Result<_>>()?;
    let (imin, h1_infimum) =
        h1.iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });

    let ck_order = cfg.ck_order.min(w.max_order());
    let per_order: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|&z| {
            (0..=ck_order)
                .map(|k| Ok(partials_of_order(w, k, z)?.iter().map(|p| p.norm()).fold(0.0, f64::max)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut ck_norms = Vec::with_capacity(ck_order + 1);
    let mut running = 0.0f64;
    for k in 0..=ck_order {
        running = per_order.iter().map(|v| v[k]).fold(running, f64::max);
        ck_norms.push(running);
    }

    let jmax = cfg.grid.h3_max_exponent as usize;
    let centers = cfg.grid.h3_centers();
    let per_center: Vec<Vec<f64>> = centers
        .par_iter()
        .map(|&z| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut out = vec![0.0];
            for i in 1..=jmax {
                let lo = 2f64.powi(i as i32 - 1);
                acc += annulus_integral(w, z, lo, 2.0 * lo, cfg.grid.theta_panels, &cfg.quadrature)?;
                out.push(acc.norm());
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let h3_curve: Vec<H3Sample> = (0..=jmax)
        .map(|i| H3Sample {
            radius: 2f64.powi(i as i32),
            value: per_center.iter().map(|v| v[i]).fold(0.0, f64::max),
        })
        .collect();
    let h3_supremum = h3_curve.iter().map(|s| s.value).fold(0.0, f64::max);
    let upper = &h3_curve[jmax / 2..];
    let h3_growth_slope = slope(
        &upper.iter().map(|s| s.radius.ln()).collect::<Vec<_>>(),
        &upper.iter().map(|s| s.value).collect::<Vec<_>>(),
    );

    let t = cfg.thresholds;
    let verdicts = Verdicts {
        h1: h1_infimum >= t.c1_min,
        h2: ck_norms.iter().all(|v| v.is_finite() && *v <= t.ck_max),
        h3: h3_supremum <= t.c2_max && h3_growth_slope <= t.h3_slope_max,
    };
    Ok(UftReport {
        m,
        h1_infimum,
        h1_argmin: [pts[imin].re, pts[imin].im],
        ck_norms,
        h3_supremum,
        h3_curve,
        h3_growth_slope,
        grid: cfg.grid.clone(),
        thresholds: t,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::weight::{ConstantWeight, PolynomialWeight};

    fn small() -> UftConfig {
        UftConfig {
            grid: GridSpec {
                nx: 3,
                ny: 3,
                h3_nx: 1,
                h3_ny: 1,
                h3_max_exponent: 4,
                theta_panels: 16,
                ..GridSpec::default()
            },
            ..UftConfig::default()
        }
    }

    #[test]
    fn heisenberg_passes() {
        let r = verify_uft(&ConstantWeight::new(4.0).unwrap(), 2, &small()).unwrap();
        assert_eq!(r.h1_infimum, 4.0);
        assert!(r.verdicts.h1 && r.verdicts.h2 && r.verdicts.h3);
        assert!(r.h3_supremum < 1e-8);
    }

    #[test]
    fn zero_weight_fails_h1() {
        let r = verify_uft(&ConstantWeight::new(0.0).unwrap(), 2, &small()).unwrap();
        assert_eq!(r.h1_infimum, 0.0);
        assert!(!r.verdicts.h1);
    }

    #[test]
    fn real_part_squared_needs_order_four() {
        let w = PolynomialWeight::real_part_squared();
        let cfg = UftConfig {
            grid: GridSpec {
                x_range: [-1.0, 1.0],
                y_range: [-1.0, 1.0],
                ..small().grid
            },
            ..small()
        };
        // h = x², ∇_ν h = 2x ν₁, ∇_ν² h = 2ν₁²: at the origin only the second derivative survives
        let r2 = verify_uft(&w, 2, &cfg).unwrap();
        assert_eq!(r2.h1_infimum, 0.0);
        let r4 = verify_uft(&w, 4, &cfg).unwrap();
        assert!((r4.h1_infimum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_grid_and_low_order_rejected() {
        let mut cfg = small();
        cfg.grid.nx = 0;
        assert!(matches!(
            verify_uft(&ConstantWeight::new(1.0).unwrap(), 2, &cfg),
            Err(Error::InvalidArgument(_))
        ));
        assert!(verify_uft(&ConstantWeight::new(1.0).unwrap(), 1, &small()).is_err());
    }

    #[test]
    fn annulus_of_constant_vanishes_and_of_radial_mode_does_not() {
        let q = UftConfig::default().quadrature;
        let w = ConstantWeight::new(3.0).unwrap();
        let v = annulus_integral(&w, Complex64::new(0.0, 0.0), 1.0, 4.0, 8, &q).unwrap();
        assert!(v.norm() < 1e-10);
        // h = Re(z²)/|z|² on the annulus: ∫ cos 2θ e^{-2iθ} dθ ds = π ln 4
        let w2 = crate::domain::weight::FnWeight::new("cos2", 2, Some(1.0), |z| (z * z).re / z.norm_sqr().max(1e-300));
        let v2 = annulus_integral(&w2, Complex64::new(0.0, 0.0), 1.0, 4.0, 8, &q).unwrap();
        assert!((v2.re - PI * 4f64.ln()).abs() < 1e-7);
    }
}
