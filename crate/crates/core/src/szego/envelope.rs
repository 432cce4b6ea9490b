use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{tube_szego_kernel, KernelQuery};
use crate::domain::ProfileRef;
use crate::error::{Error, Result};
use crate::geometry::{ball_volume, mu_invert, BoundaryPoint, MetricContext, Twist};
use crate::quadrature::QuadratureConfig;

/// Box from which boundary pairs are drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairSampling {
    pub seed: u64,
    pub count: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub t_range: [f64; 2],
}

impl Default for PairSampling {
    fn default() -> Self {
        Self {
            seed: 20240601,
            count: 50,
            x_range: [-1.5, 1.5],
            y_range: [-1.0, 1.0],
            t_range: [-2.5, 2.5],
        }
    }
}

impl PairSampling {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("x_range", self.x_range),
            ("y_range", self.y_range),
            ("t_range", self.t_range),
        ] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::invalid(format!(
                    "{name} must be a finite interval with lo < hi, got {r:?}"
                )));
            }
        }
        if self.count == 0 {
            return Err(Error::invalid("count must be positive"));
        }
        Ok(())
    }
}

/// Seeded sample; the first `k` pairs of a larger sample coincide with a sample of size `k`.
pub fn sample_pairs(s: &PairSampling) -> Result<Vec<(BoundaryPoint, BoundaryPoint)>> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let point = |rng: &mut ChaCha8Rng| {
        let x = rng.random_range(s.x_range[0]..s.x_range[1]);
        let y = rng.random_range(s.y_range[0]..s.y_range[1]);
        let t = rng.random_range(s.t_range[0]..s.t_range[1]);
        BoundaryPoint::new(x, y, t)
    };
    Ok((0..s.count).map(|_| (point(&mut rng), point(&mut rng))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub a: BoundaryPoint,
    pub b: BoundaryPoint,
    pub kernel_abs: f64,
    /// `d_ε(a, b) = |z_a - z_b| + μ(z_b, |t_a - t_b - T(z_a, z_b)| + ε)`.
    pub distance: f64,
    pub ball_volume: f64,
    /// `|S_ε(a, b)| |B(a, d_ε(a, b))|`.
    pub r: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub epsilon: f64,
    pub rows: Vec<EnvelopeRow>,
    pub max_r: f64,
    pub argmax: usize,
    pub envelope_constant: f64,
    pub pass: bool,
}

impl EnvelopeReport {
    /// `max R` over the first `count` rows.
    pub fn max_over_prefix(&self, count: usize) -> f64 {
        self.rows.iter().take(count).map(|r| r.r).fold(0.0, f64::max)
    }
}

pub fn envelope_row(
    ctx: &MetricContext,
    profile: &ProfileRef,
    a: &BoundaryPoint,
    b: &BoundaryPoint,
    epsilon: f64,
    cfg: &QuadratureConfig,
) -> Result<EnvelopeRow> {
    let k = tube_szego_kernel(&KernelQuery::new(profile.clone(), *a, *b, epsilon).with_quadrature(*cfg))?;
    let gap = (a.t - b.t - Twist::Line.eval(ctx, a, b)?).abs() + epsilon;
    let distance = (a.z - b.z).norm() + mu_invert(ctx, b.z, gap)?;
    let volume = ball_volume(ctx, a, distance)?;
    let kernel_abs = k.value.norm();
    Ok(EnvelopeRow {
        a: *a,
        b: *b,
        kernel_abs,
        distance,
        ball_volume: volume,
        r: kernel_abs * volume,
        converged: k.converged,
    })
}

/// `R(a, b) = |S_ε(a, b)| |B(a, d_ε(a, b))|` over the sample; passes when `max R <= envelope_constant`.
pub fn growth_envelope(
    ctx: &MetricContext,
    profile: &ProfileRef,
    pairs: &[(BoundaryPoint, BoundaryPoint)],
    epsilon: f64,
    envelope_constant: f64,
    cfg: &QuadratureConfig,
) -> Result<EnvelopeReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if pairs.is_empty() {
        return Err(Error::invalid("the pair sample is empty"));
    }
    let rows: Vec<EnvelopeRow> = pairs
        .par_iter()
        .map(|(a, b)| envelope_row(ctx, profile, a, b, epsilon, cfg))
        .collect::<Result<_>>()?;
    let (argmax, max_r) =
        rows.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, r)| if r.r > acc.1 { (i, r.r) } else { acc },
        );
    Ok(EnvelopeReport {
        epsilon,
        max_r,
        argmax,
        envelope_constant,
        pass: max_r.is_finite() && max_r <= envelope_constant,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_parabolic_tube, make_tube_domain};
    use crate::geometry::MetricOptions;
    use crate::szego::kernel_quadrature;
    use std::f64::consts::PI;

    fn ctx() -> MetricContext {
        let (w, p) = make_tube_domain(make_parabolic_tube());
        MetricContext::new(w, p, MetricOptions::default()).unwrap()
    }

    #[test]
    fn samples_are_prefix_stable() {
        let small = sample_pairs(&PairSampling::default()).unwrap();
        let big = sample_pairs(&PairSampling {
            count: 100,
            ..PairSampling::default()
        })
        .unwrap();
        assert_eq!(&big[..50], &small[..]);
        assert!(big.iter().all(|(a, _)| a.z.re.abs() <= 1.5 && a.t.abs() <= 2.5));
    }

    #[test]
    fn diagonal_row_uses_mu_of_epsilon() {
        let c = ctx();
        let a = BoundaryPoint::new(0.4, -0.2, 1.0);
        let row = envelope_row(&c, &make_parabolic_tube(), &a, &a, 0.5, &kernel_quadrature()).unwrap();
        let delta = mu_invert(&c, a.z, 0.5).unwrap();
        assert!((row.distance - delta).abs() < 1e-12);
        let exact = 1.0 / (4.0 * PI * PI * 0.25) * ball_volume(&c, &a, delta).unwrap();
        assert!((row.r - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn translation_invariance() {
        let c = ctx();
        let p = make_parabolic_tube();
        let q = kernel_quadrature();
        let a = BoundaryPoint::new(0.3, 0.2, 0.5);
        let b = BoundaryPoint::new(-0.6, -0.4, -1.0);
        // x ↦ x + c is a symmetry of the parabolic tube once t absorbs -c·y
        let shift = |p: &BoundaryPoint| BoundaryPoint::new(p.z.re + 0.7, p.z.im, p.t - 0.7 * p.z.im + 0.3);
        let r0 = envelope_row(&c, &p, &a, &b, 0.5, &q).unwrap();
        let r1 = envelope_row(&c, &p, &shift(&a), &shift(&b), 0.5, &q).unwrap();
        assert!((r0.kernel_abs - r1.kernel_abs).abs() < 1e-6 * r0.kernel_abs);
        assert!((r0.r - r1.r).abs() < 1e-4 * r0.r, "{} vs {}", r0.r, r1.r);
    }
}
