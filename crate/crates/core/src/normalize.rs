//! Recentered potentials `P^{σ,κ}` and the twists `T(z, w)` and `T_κ(ζ, σ)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::{Potential, PotentialRef, ShiftedWeight, WeightRef};
use crate::error::{Error, Result};
use crate::quadrature::{try_integrate_1d, QuadratureConfig};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// `P^{σ,κ}(z) = P(z+σ) - P(σ) - 2Re(P_z(σ) z) - 2Re Σ_{j=2}^κ ∂^jP(σ) z^j / j!`.
#[derive(Debug, Clone)]
pub struct NormalizedPotential {
    base: PotentialRef,
    center: Complex64,
    order: usize,
    value_at_center: f64,
    grad_at_center: Complex64,
    /// `coeffs[j - 2] = ∂^j P(σ)` for `2 <= j <= κ`.
    coeffs: Vec<Complex64>,
}

pub fn normalize_potential(p: PotentialRef, sigma: Complex64, kappa: usize) -> Result<NormalizedPotential> {
    if kappa < 2 {
        return Err(Error::invalid(format!(
            "normalization order must be at least 2, got {kappa}"
        )));
    }
    let value_at_center = p.eval(sigma)?;
    let grad_at_center = p.grad_z(sigma)?;
    let coeffs = (2..=kappa)
        .map(|j| p.holo_deriv(j, sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizedPotential {
        base: p,
        center: sigma,
        order: kappa,
        value_at_center,
        grad_at_center,
        coeffs,
    })
}

impl NormalizedPotential {
    pub fn base(&self) -> &PotentialRef {
        &self.base
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `∂^j P(σ)` for `2 <= j <= κ`, the holomorphic Taylor terms that were removed.
    pub fn removed_coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `Σ_{i >= max(2, j)} c_i z^{i-j} / (i-j)!`, the `j`-th derivative of the removed polynomial.
    fn removed_poly_deriv(&self, j: usize, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let i = idx + 2;
            if i >= j {
                acc += c * z.powu((i - j) as u32) / factorial(i - j);
            }
        }
        acc
    }
}

impl Potential for NormalizedPotential {
    fn eval(&self, z: Complex64) -> Result<f64> {
        let raw = self.base.eval(z + self.center)?;
        Ok(raw - self.value_at_center - 2.0 * (self.grad_at_center * z).re - 2.0 * self.removed_poly_deriv(0, z).re)
    }

    fn grad_z(&self, z: Complex64) -> Result<Complex64> {
        self.holo_deriv(1, z)
    }

    fn holo_deriv(&self, j: usize, z: Complex64) -> Result<Complex64> {
        if j == 0 {
            return Err(Error::invalid("holomorphic derivative order must be at least 1"));
        }
        let mut v = self.base.holo_deriv(j, z + self.center)? - self.removed_poly_deriv(j, z);
        if j == 1 {
            v -= self.grad_at_center;
        }
        Ok(v)
    }

    fn weight(&self) -> WeightRef {
        Arc::new(ShiftedWeight {
            base: self.base.weight(),
            shift: self.center,
        })
    }

    fn name(&self) -> String {
        format!(
            "normalized({}, sigma = {}, kappa = {})",
            self.base.name(),
            self.center,
            self.order
        )
    }
}

/// `T(z, w) = -2 Im ∫_0^1 (z - w) P_z(w + (z - w) r) dr`.
pub fn twist_t(p: &dyn Potential, z: Complex64, w: Complex64, q: &QuadratureConfig) -> Result<f64> {
    if z == w {
        return Ok(0.0);
    }
    let d = z - w;
    let r =
        try_integrate_1d(|r| Ok(d * p.grad_z(w + d * r)?), 0.0, 1.0, q)?.require_converged("line-integral twist")?;
    Ok(-2.0 * r.value.im)
}

/// `T_κ(ζ, σ) = -2 Im Σ_{j=1}^κ ∂^jP(σ) (ζ - σ)^j / j!`; intended for potentials already in
/// `P^{0,2}` normal form.
pub fn twist_t_kappa(p: &dyn Potential, zeta: Complex64, sigma: Complex64, kappa: usize) -> Result<f64> {
    if kappa < 1 {
        return Err(Error::invalid("twist order must be at least 1"));
    }
    let d = zeta - sigma;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for j in 1..=kappa {
        power *= d;
        acc += p.holo_deriv(j, sigma)? * power / factorial(j);
    }
    Ok(-2.0 * acc.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{fd_laplacian, make_heisenberg, make_sharpness_tube, make_tube_domain};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn heisenberg_is_already_normal() {
        let (_, p) = make_heisenberg();
        for sigma in [c(0.0, 0.0), c(1.0, 1.0)] {
            let n = normalize_potential(p.clone(), sigma, 2).unwrap();
            for z in [c(0.3, -0.2), c(-1.5, 2.0)] {
                assert!((n.eval(z).unwrap() - z.norm_sqr()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalized_tube_invariants() {
        let (w, p) = make_tube_domain(make_sharpness_tube());
        let sigma = c(0.3, 0.8);
        let n = normalize_potential(p, sigma, 4).unwrap();
        assert_eq!(n.eval(c(0.0, 0.0)).unwrap(), 0.0);
        for j in 2..=4 {
            assert!(n.holo_deriv(j, c(0.0, 0.0)).unwrap().norm() < 1e-6);
        }
        let z = c(0.05, -0.1);
        let lap = fd_laplacian(|q| n.eval(q), z, 1e-3).unwrap();
        assert!((lap - w.eval(z + sigma)).abs() < 1e-5);
        assert_eq!(n.weight().eval(z), w.eval(z + sigma));
    }

    #[test]
    fn heisenberg_twists() {
        let (_, p) = make_heisenberg();
        let q = QuadratureConfig::default();
        assert_eq!(twist_t(p.as_ref(), c(1.0, 1.0), c(1.0, 1.0), &q).unwrap(), 0.0);
        assert!((twist_t(p.as_ref(), c(1.0, 1.0), c(2.0, 0.0), &q).unwrap() + 4.0).abs() < 1e-12);
        let t1 = twist_t_kappa(p.as_ref(), c(1.0, 1.0), c(2.0, 0.0), 1).unwrap();
        let t2 = twist_t_kappa(p.as_ref(), c(1.0, 1.0), c(2.0, 0.0), 2).unwrap();
        assert!((t1 + 4.0).abs() < 1e-14);
        assert_eq!(t1, t2);
        assert_eq!(twist_t_kappa(p.as_ref(), c(0.5, 0.5), c(0.5, 0.5), 3).unwrap(), 0.0);
    }

    #[test]
    fn tube_twist_vanishes_on_real_axis() {
        let (_, p) = make_tube_domain(make_sharpness_tube());
        let q = QuadratureConfig::default();
        assert_eq!(twist_t(p.as_ref(), c(1.3, 0.0), c(-0.4, 0.0), &q).unwrap(), 0.0);
    }

    #[test]
    fn idempotent_at_origin() {
        let (_, p) = make_tube_domain(make_sharpness_tube());
        let once: PotentialRef = Arc::new(normalize_potential(p, c(0.0, 0.0), 3).unwrap());
        let twice = normalize_potential(once.clone(), c(0.0, 0.0), 3).unwrap();
        for z in [c(0.2, 0.1), c(-0.7, 0.4), c(1.1, -0.9)] {
            assert!((once.eval(z).unwrap() - twice.eval(z).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn order_below_two_rejected() {
        let (_, p) = make_heisenberg();
        assert!(matches!(
            normalize_potential(p, c(0.0, 0.0), 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    proptest! {
        #[test]
        fn heisenberg_twist_is_antisymmetric_and_closed_form(
            a in -3.0f64..3.0, b in -3.0f64..3.0, x in -3.0f64..3.0, y in -3.0f64..3.0
        ) {
            let (_, p) = make_heisenberg();
            let q = QuadratureConfig::default();
            let z = c(a, b);
            let w = c(x, y);
            let tzw = twist_t(p.as_ref(), z, w, &q).unwrap();
            let twz = twist_t(p.as_ref(), w, z, &q).unwrap();
            prop_assert!((tzw + twz).abs() < 1e-11);
            prop_assert!((tzw + 2.0 * (z * w.conj()).im).abs() < 1e-11);
        }

        #[test]
        fn normalized_second_derivative_vanishes(s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let (_, p) = make_tube_domain(make_sharpness_tube());
            let n = normalize_potential(p, c(s, t), 2).unwrap();
            prop_assert!(n.holo_deriv(2, c(0.0, 0.0)).unwrap().norm() < 1e-6);
            prop_assert!(n.grad_z(c(0.0, 0.0)).unwrap().norm() < 1e-12);
        }
    }
}
