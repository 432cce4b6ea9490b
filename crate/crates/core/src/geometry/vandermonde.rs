use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{directional_from_partials, partials_of_order, Weight};
use crate::error::{Error, Result};

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients `a(n, k)` with `∂^j f / ∂z^k ∂z̄^{j-k} = Σ_n a(n, k) ∇^j_{ν_n} f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VandermondeTable {
    pub j: usize,
    pub directions: Vec<Complex64>,
    /// `coeffs[n][k]`.
    pub coeffs: Vec<Vec<Complex64>>,
    pub max_coefficient: f64,
    /// `(j!)² (min_{α≠β} |ν_α² - ν_β²|)^{-j(j+1)/2}`.
    pub bound: f64,
    pub bound_holds: bool,
}

/// Solves the `(j+1) × (j+1)` system relating directional derivatives along `ν_0..ν_j` to the
/// mixed partials of order `j`.
pub fn vandermonde_coeffs(j: usize, directions: &[Complex64]) -> Result<VandermondeTable> {
    if directions.len() != j + 1 {
        return Err(Error::invalid(format!(
            "order {j} needs {} directions, got {}",
            j + 1,
            directions.len()
        )));
    }
    if let Some(nu) = directions.iter().find(|nu| (nu.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::invalid(format!("direction {nu} is not a unit vector")));
    }
    let mut min_gap = f64::INFINITY;
    for (a, na) in directions.iter().enumerate() {
        for nb in &directions[a + 1..] {
            let gap = (na * na - nb * nb).norm();
            if gap < 1e-12 {
                return Err(Error::SingularSystem(format!(
                    "directions {na} and {nb} have coincident squares"
                )));
            }
            min_gap = min_gap.min(gap);
        }
    }
    let m = DMatrix::from_fn(j + 1, j + 1, |n, k| {
        let nu = directions[n];
        nu.powu(k as u32) * nu.conj().powu((j - k) as u32) * binomial(j, k)
    });
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem(format!("directional system of order {j} is singular")))?;
    let coeffs: Vec<Vec<Complex64>> = (0..=j).map(|n| (0..=j).map(|k| inv[(k, n)]).collect()).collect();
    let max_coefficient = coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    let fact: f64 = (1..=j).map(|v| v as f64).product();
    let bound = if j == 0 {
        1.0
    } else {
        fact * fact * min_gap.powf(-((j * (j + 1)) as f64) / 2.0)
    };
    Ok(VandermondeTable {
        j,
        directions: directions.to_vec(),
        coeffs,
        max_coefficient,
        bound,
        bound_holds: max_coefficient <= bound * (1.0 + 1e-12),
    })
}

/// Mixed partials of order `j` from the directional derivatives `∇^j_{ν_n} f`.
pub fn reconstruct_partials(table: &VandermondeTable, directional: &[f64]) -> Result<Vec<Complex64>> {
    if directional.len() != table.j + 1 {
        return Err(Error::invalid("one directional derivative per direction is required"));
    }
    Ok((0..=table.j)
        .map(|k| (0..=table.j).map(|n| table.coeffs[n][k] * directional[n]).sum())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxDirection {
    pub nu: Complex64,
    pub angle: f64,
    /// `min_j |∇^j_ν h| / Σ_k |∂^j h / ∂z^k ∂z̄^{j-k}|` at the returned direction.
    pub constant: f64,
}

/// Grid search for the direction maximizing `min_{j≤J} |∇^j_ν h(z)| / Σ_k |∂^j h/∂z^k∂z̄^{j-k}(z)|`;
/// a vanishing denominator counts as `+∞` and ties keep the smallest angle.
pub fn max_direction(w: &dyn Weight, z: Complex64, order: usize, grid: usize) -> Result<MaxDirection> {
    if grid == 0 {
        return Err(Error::invalid("angular grid must be nonempty"));
    }
    let table: Vec<Vec<Complex64>> = (0..=order).map(|j| partials_of_order(w, j, z)).collect::<Result<_>>()?;
    let denominators: Vec<f64> = table.iter().map(|p| p.iter().map(|c| c.norm()).sum()).collect();
    let scale = denominators.iter().copied().fold(0.0, f64::max).max(1.0);
    let mut best = MaxDirection {
        nu: Complex64::new(1.0, 0.0),
        angle: 0.0,
        constant: f64::NEG_INFINITY,
    };
    for i in 0..grid {
        let angle = 2.0 * PI * i as f64 / grid as f64;
        let nu = Complex64::from_polar(1.0, angle);
        let score = table
            .iter()
            .zip(&denominators)
            .map(|(p, &den)| {
                if den <= 1e-12 * scale {
                    f64::INFINITY
                } else {
                    directional_from_partials(p, nu).abs() / den
                }
            })
            .fold(f64::INFINITY, f64::min);
        if score > best.constant {
            best = MaxDirection {
                nu,
                angle,
                constant: score,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ConstantWeight, PolynomialWeight};
    use crate::geometry::default_directions;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_monomial_from_two_directions() {
        let t = vandermonde_coeffs(1, &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        // f = z has ∇_ν f = ν
        let values = [c(1.0, 0.0), c(0.0, 1.0)];
        let fz: Complex64 = (0..2).map(|n| t.coeffs[n][1] * values[n]).sum();
        let fzb: Complex64 = (0..2).map(|n| t.coeffs[n][0] * values[n]).sum();
        assert!((fz - c(1.0, 0.0)).norm() < 1e-15);
        assert!(fzb.norm() < 1e-15);
    }

    #[test]
    fn second_order_of_z_zbar() {
        let dirs: Vec<Complex64> = (0..3)
            .map(|n| Complex64::from_polar(1.0, PI * n as f64 / 3.0))
            .collect();
        let t = vandermonde_coeffs(2, &dirs).unwrap();
        let w = PolynomialWeight::radial_power(1.0, 1);
        let values: Vec<f64> = dirs
            .iter()
            .map(|&nu| directional_from_partials(&partials_of_order(&w, 2, c(0.3, 0.1)).unwrap(), nu))
            .collect();
        let p = reconstruct_partials(&t, &values).unwrap();
        assert!((p[1] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(p[0].norm() < 1e-10 && p[2].norm() < 1e-10);
    }

    #[test]
    fn coincident_squares_are_singular() {
        let r = vandermonde_coeffs(1, &[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(r, Err(Error::SingularSystem(_))));
    }

    #[test]
    fn bound_holds_for_default_directions() {
        for m in 2..=6 {
            let t = vandermonde_coeffs(m, &default_directions(m)).unwrap();
            assert!(t.bound_holds, "m = {m}: {} > {}", t.max_coefficient, t.bound);
        }
    }

    #[test]
    fn max_direction_examples() {
        let flat = max_direction(&ConstantWeight::new(4.0).unwrap(), c(0.7, 0.2), 3, 1024).unwrap();
        assert_eq!(flat.angle, 0.0);
        assert_eq!(flat.nu, c(1.0, 0.0));
        let w = PolynomialWeight::real_part_squared();
        let r = max_direction(&w, c(0.0, 0.0), 2, 1024).unwrap();
        assert!((r.nu.re.abs() - 1.0).abs() < 1e-9);
        let along = directional_from_partials(&partials_of_order(&w, 2, c(0.0, 0.0)).unwrap(), r.nu).abs();
        assert!((along - 2.0).abs() < 1e-9);
        assert!((r.constant - 4.0 / 3.0).abs() < 1e-9);
    }
}
