//! Weierstrass p via -d^2/dz^2 log theta1, and the invariants g2, g3.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{EllipticError, EllipticModulus, Lattice};
use crate::theta::{theta_with_derivatives, Characteristic, Tolerance};

/// The invariants of (p')^2 = 4 p^3 - g2 p - g3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticInvariants {
    pub g2: Complex64,
    pub g3: Complex64,
}

fn theta1_log_derivatives(
    u: Complex64,
    modulus: &EllipticModulus,
    tol: &Tolerance,
) -> Result<(Complex64, Complex64, Complex64), EllipticError> {
    let chr = Characteristic::new(vec![0.5], vec![0.5]);
    let orders: Vec<Vec<u32>> = vec![vec![0], vec![1], vec![2], vec![3]];
    let vals = theta_with_derivatives(&[u], modulus.matrix(), Some(&chr), &orders, tol)?;
    // The -i factor of theta1 cancels in every ratio.
    if vals[0].is_zero() {
        return Err(EllipticError::PoleProximity);
    }
    let d1 = vals[1].div(&vals[0]).to_complex();
    let d2 = vals[2].div(&vals[0]).to_complex();
    let d3 = vals[3].div(&vals[0]).to_complex();
    if !d1.is_finite() {
        return Err(EllipticError::PoleProximity);
    }
    Ok((d1, d2, d3))
}

/// The additive constant fixing the Laurent expansion of p at 0 to have
/// no constant term: theta1'''(0) / (3 theta1'(0)).
fn laurent_constant(modulus: &EllipticModulus, tol: &Tolerance) -> Result<Complex64, EllipticError> {
    let chr = Characteristic::new(vec![0.5], vec![0.5]);
    let orders: Vec<Vec<u32>> = vec![vec![1], vec![3]];
    let vals = theta_with_derivatives(
        &[Complex64::new(0.0, 0.0)],
        modulus.matrix(),
        Some(&chr),
        &orders,
        tol,
    )?;
    Ok(vals[1].div(&vals[0]).to_complex() / 3.0)
}

/// Weierstrass p for the lattice, via the normalized modulus:
/// p_Lambda(z) = omega1^-2 p_{Z+bZ}(z / omega1).
pub fn weierstrass_p(
    z: Complex64,
    lat: &Lattice,
    tol: &Tolerance,
) -> Result<Complex64, EllipticError> {
    if lat.distance_to_lattice(z) < 1e-8 * lat.omega1.norm() {
        return Err(EllipticError::PoleProximity);
    }
    let u = z / lat.omega1;
    let m = lat.modulus();
    let (d1, d2, _) = theta1_log_derivatives(u, m, tol)?;
    let c = laurent_constant(m, tol)?;
    // -(log theta1)'' + C = -(t''/t - (t'/t)^2) + C
    let p_norm = -(d2 - d1 * d1) + c;
    Ok(p_norm / (lat.omega1 * lat.omega1))
}

/// Derivative of Weierstrass p: -(log theta1)''' scaled by omega1^-3.
pub fn weierstrass_p_prime(
    z: Complex64,
    lat: &Lattice,
    tol: &Tolerance,
) -> Result<Complex64, EllipticError> {
    if lat.distance_to_lattice(z) < 1e-8 * lat.omega1.norm() {
        return Err(EllipticError::PoleProximity);
    }
    let u = z / lat.omega1;
    let (d1, d2, d3) = theta1_log_derivatives(u, lat.modulus(), tol)?;
    let log_d3 = d3 - 3.0 * d2 * d1 + 2.0 * d1 * d1 * d1;
    Ok(-log_d3 / (lat.omega1 * lat.omega1 * lat.omega1))
}

/// g2 = 20 c2 and g3 = 28 c4, where c2 and c4 are the Laurent
/// coefficients of p(z) - 1/z^2 at the origin, extracted by trapezoidal
/// contour integration on a small circle in the normalized lattice.
pub fn wp_invariants(lat: &Lattice, tol: &Tolerance) -> Result<EllipticInvariants, EllipticError> {
    let norm_lat = Lattice::new(Complex64::new(1.0, 0.0), lat.modulus().b())?;
    let radius = 0.25 * norm_lat.min_vector();

    let coeffs = |n: usize| -> Result<(Complex64, Complex64), EllipticError> {
        let mut c2 = Complex64::new(0.0, 0.0);
        let mut c4 = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            let u = radius * Complex64::new(phi.cos(), phi.sin());
            let p = weierstrass_p(u, &norm_lat, tol)?;
            let reg = p - 1.0 / (u * u);
            c2 += reg / u.powi(2);
            c4 += reg / u.powi(4);
        }
        Ok((c2 / n as f64, c4 / n as f64))
    };

    let (c2a, c4a) = coeffs(128)?;
    let (c2, c4) = coeffs(256)?;
    let scale = c2.norm().max(c4.norm()).max(1.0);
    if !(c2.is_finite() && c4.is_finite())
        || (c2 - c2a).norm() + (c4 - c4a).norm() > 1e-9 * scale
    {
        return Err(EllipticError::ContourFailure);
    }

    let w4 = lat.omega1.powi(4);
    let w6 = lat.omega1.powi(6);
    Ok(EllipticInvariants {
        g2: 20.0 * c2 / w4,
        g3: 28.0 * c4 / w6,
    })
}
