use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::tube::TubeProfile;
use super::weight::{ConstantWeight, TubeWeight, WeightRef};
use crate::error::{Error, Result};

pub type PotentialRef = Arc<dyn Potential>;

/// Real subharmonic `P` with `ΔP = h`.
pub trait Potential: Send + Sync + fmt::Debug {
    fn eval(&self, z: Complex64) -> Result<f64>;

    /// `∂P/∂z`.
    fn grad_z(&self, z: Complex64) -> Result<Complex64>;

    /// `∂^j P / ∂z^j` for `j >= 1`.
    fn holo_deriv(&self, j: usize, z: Complex64) -> Result<Complex64>;

    fn weight(&self) -> WeightRef;

    fn name(&self) -> String;
}

pub(crate) fn require_positive_order(j: usize) -> Result<()> {
    if j == 0 {
        return Err(Error::invalid("holomorphic derivative order must be at least 1"));
    }
    Ok(())
}

/// Five-point Laplacian `(f(z±h) + f(z±ih) - 4f(z)) / h²`.
pub fn fd_laplacian<F: Fn(Complex64) -> Result<f64>>(f: F, z: Complex64, h: f64) -> Result<f64> {
    let c = f(z)?;
    let e = f(z + Complex64::new(h, 0.0))?;
    let w = f(z - Complex64::new(h, 0.0))?;
    let n = f(z + Complex64::new(0.0, h))?;
    let s = f(z - Complex64::new(0.0, h))?;
    Ok((e + w + n + s - 4.0 * c) / (h * h))
}

/// Fourth-order central-difference `∂f/∂z = (f_x - i f_y) / 2`.
pub fn fd_grad_z<F: Fn(Complex64) -> Result<f64>>(f: F, z: Complex64, h: f64) -> Result<Complex64> {
    let d = |dir: Complex64| -> Result<f64> {
        let p1 = f(z + dir * h)?;
        let m1 = f(z - dir * h)?;
        let p2 = f(z + dir * (2.0 * h))?;
        let m2 = f(z - dir * (2.0 * h))?;
        Ok((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h))
    };
    let fx = d(Complex64::new(1.0, 0.0))?;
    let fy = d(Complex64::new(0.0, 1.0))?;
    Ok(Complex64::new(fx, -fy) * 0.5)
}

const FOURIER_NODES: usize = 64;
const FOURIER_RADII: usize = 4;

/// `∂^j f / ∂z^j` of a smooth real function from the `j`-th Fourier mode on circles
/// `r = 0.5 / 2^i` around `z`, extrapolated to `r = 0` in powers of `r²`.
pub fn holo_deriv_fourier<F: Fn(Complex64) -> Result<f64>>(f: F, j: usize, z: Complex64) -> Result<Complex64> {
    require_positive_order(j)?;
    let mut table: Vec<Complex64> = Vec::with_capacity(FOURIER_RADII);
    for i in 0..FOURIER_RADII {
        let r = 0.5 / 2f64.powi(i as i32);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..FOURIER_NODES {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / FOURIER_NODES as f64;
            let e = Complex64::from_polar(1.0, theta);
            acc += f(z + e * r)? * Complex64::from_polar(1.0, -(j as f64) * theta);
        }
        table.push(acc / (FOURIER_NODES as f64 * r.powi(j as i32)));
    }
    for level in 1..FOURIER_RADII {
        let factor = 4f64.powi(level as i32);
        for i in (level..FOURIER_RADII).rev() {
            table[i] = (table[i] * factor - table[i - 1]) / (factor - 1.0);
        }
    }
    let fact: f64 = (1..=j).map(|v| v as f64).product();
    Ok(table[FOURIER_RADII - 1] * fact)
}

/// `P(z) = |z|²`, `h ≡ 4`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeisenbergPotential;

impl Potential for HeisenbergPotential {
    fn eval(&self, z: Complex64) -> Result<f64> {
        Ok(z.norm_sqr())
    }
    fn grad_z(&self, z: Complex64) -> Result<Complex64> {
        Ok(z.conj())
    }
    fn holo_deriv(&self, j: usize, z: Complex64) -> Result<Complex64> {
        require_positive_order(j)?;
        Ok(if j == 1 { z.conj() } else { Complex64::new(0.0, 0.0) })
    }
    fn weight(&self) -> WeightRef {
        Arc::new(ConstantWeight { value: 4.0 })
    }
    fn name(&self) -> String {
        "heisenberg".to_string()
    }
}

/// `P(z) = b(Re z)` for a tube profile `b`; `h = b''(Re z)`.
#[derive(Debug, Clone)]
pub struct TubePotential {
    pub profile: Arc<dyn TubeProfile>,
}

impl Potential for TubePotential {
    fn eval(&self, z: Complex64) -> Result<f64> {
        Ok(self.profile.b(z.re))
    }
    fn grad_z(&self, z: Complex64) -> Result<Complex64> {
        self.holo_deriv(1, z)
    }
    fn holo_deriv(&self, j: usize, z: Complex64) -> Result<Complex64> {
        require_positive_order(j)?;
        if j > self.profile.max_order() {
            return Err(Error::Capability(format!(
                "profile '{}' provides derivatives up to order {}, order {j} requested",
                self.profile.name(),
                self.profile.max_order()
            )));
        }
        let d = self.profile.deriv(j, z.re)?;
        Ok(Complex64::new(d / 2f64.powi(j as i32), 0.0))
    }
    fn weight(&self) -> WeightRef {
        Arc::new(TubeWeight {
            profile: self.profile.clone(),
        })
    }
    fn name(&self) -> String {
        format!("tube({})", self.profile.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tube::{ParabolicTube, SharpnessTube};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn heisenberg_laplacian() {
        let p = HeisenbergPotential;
        let lap = fd_laplacian(|z| p.eval(z), c(0.3, 0.2), 1e-3).unwrap();
        assert!((lap - 4.0).abs() < 1e-6);
        assert_eq!(p.eval(c(0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(p.weight().eval(c(1.0, 1.0)), 4.0);
    }

    #[test]
    fn fourier_derivatives_of_polynomial() {
        // P = |z|^4 + Re(z^3) has ∂P = 2 z z̄² + 3z²/2, ∂²P = 2 z̄² + 3z, ∂³P = 3
        let f = |z: Complex64| Ok(z.norm_sqr().powi(2) + (z * z * z).re);
        let z = c(0.4, -0.3);
        let d1 = holo_deriv_fourier(f, 1, z).unwrap();
        let d2 = holo_deriv_fourier(f, 2, z).unwrap();
        let d3 = holo_deriv_fourier(f, 3, z).unwrap();
        let zb = z.conj();
        assert!((d1 - (2.0 * z * zb * zb + 1.5 * z * z)).norm() < 1e-10);
        assert!((d2 - (2.0 * zb * zb + 3.0 * z)).norm() < 1e-10);
        assert!((d3 - c(3.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn fourier_derivatives_of_exponential_profile() {
        let f = |z: Complex64| Ok(z.re.exp());
        let z = c(0.2, 1.0);
        for j in 1..=4 {
            let d = holo_deriv_fourier(f, j, z).unwrap();
            let exact = 0.2f64.exp() / 2f64.powi(j as i32);
            assert!((d - c(exact, 0.0)).norm() < 1e-9, "j = {j}: {d}");
        }
    }

    #[test]
    fn tube_potential_derivatives() {
        let p = TubePotential {
            profile: Arc::new(ParabolicTube),
        };
        let z = c(1.5, -2.0);
        assert_eq!(p.grad_z(z).unwrap(), c(0.75, 0.0));
        assert_eq!(p.holo_deriv(2, z).unwrap(), c(0.25, 0.0));
        let s = TubePotential {
            profile: Arc::new(SharpnessTube::new()),
        };
        let lap = fd_laplacian(|z| s.eval(z), c(0.13, 0.4), 1e-3).unwrap();
        assert!((lap - 0.13f64.exp()).abs() < 1e-6);
        assert!(matches!(s.holo_deriv(9, z), Err(Error::Capability(_))));
    }

    #[test]
    fn grad_z_by_differences() {
        let f = |z: Complex64| Ok(z.norm_sqr());
        let z = c(0.7, 0.1);
        assert!((fd_grad_z(f, z, 1e-3).unwrap() - z.conj()).norm() < 1e-10);
    }
}
