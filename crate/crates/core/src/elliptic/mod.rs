//! Genus-1 specialization: Jacobi theta functions, the heat-equation
//! check, Weierstrass p with its invariants, and the classical
//! constructions of elliptic functions from theta quotients.

mod meromorphic;
mod weierstrass;

pub use meromorphic::{elliptic_from_divisor, elliptic_from_poles, DivisorFunction, PoleSumFunction};
pub use weierstrass::{weierstrass_p, weierstrass_p_prime, wp_invariants, EllipticInvariants};

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::scaled::ScaledComplex;
use crate::theta::{theta_char, Characteristic, RiemannMatrix, ThetaError, Tolerance};

/// Errors specific to the genus-1 layer.
#[derive(Debug, thiserror::Error)]
pub enum EllipticError {
    #[error("modulus must have positive imaginary part")]
    InvalidModulus,
    #[error("lattice generators must satisfy Im(omega2/omega1) > 0")]
    InvalidLattice,
    #[error("z is too close to a lattice point")]
    PoleProximity,
    #[error("contour extraction of Laurent coefficients failed")]
    ContourFailure,
    #[error("zero/pole counts must match and be at least 2, got {0}")]
    DegenerateCount(usize),
    #[error("Abel condition violated: sum(P) - sum(Q) is {0:.3e} away from the lattice")]
    AbelConditionViolated(f64),
    #[error("residues must sum to zero, got |sum| = {0:.3e}")]
    ResidueSumNonzero(f64),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

/// The 1x1 Riemann matrix, as a number b with Im b > 0.
#[derive(Debug, Clone)]
pub struct EllipticModulus {
    b: Complex64,
    matrix: RiemannMatrix,
}

impl EllipticModulus {
    pub fn new(b: Complex64) -> Result<Self, EllipticError> {
        if !(b.im > 0.0) || !b.re.is_finite() {
            return Err(EllipticError::InvalidModulus);
        }
        let matrix = RiemannMatrix::new(&[vec![b]])?;
        Ok(Self { b, matrix })
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn matrix(&self) -> &RiemannMatrix {
        &self.matrix
    }

    /// The single zero of theta3 in the fundamental parallelogram.
    pub fn theta_zero(&self) -> Complex64 {
        0.5 * (1.0 + self.b)
    }
}

/// Lattice Z omega1 + Z omega2, oriented so the derived modulus
/// b = omega2/omega1 has positive imaginary part.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub omega1: Complex64,
    pub omega2: Complex64,
    modulus: EllipticModulus,
}

impl Lattice {
    pub fn new(omega1: Complex64, omega2: Complex64) -> Result<Self, EllipticError> {
        if omega1.norm() == 0.0 || omega2.norm() == 0.0 {
            return Err(EllipticError::InvalidLattice);
        }
        let ratio = omega2 / omega1;
        if !(ratio.im > 0.0) {
            return Err(EllipticError::InvalidLattice);
        }
        let modulus = EllipticModulus::new(ratio)?;
        Ok(Self {
            omega1,
            omega2,
            modulus,
        })
    }

    pub fn modulus(&self) -> &EllipticModulus {
        &self.modulus
    }

    /// Distance from z to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        let u = z / self.omega1;
        let (_, _, res) = self
            .modulus
            .matrix
            .lattice_reduce(&[u]);
        (res[0] * self.omega1).norm()
    }

    /// Shortest nonzero lattice vector length (over the first shell).
    pub fn min_vector(&self) -> f64 {
        let mut best = f64::INFINITY;
        for m in -2i32..=2 {
            for n in -2i32..=2 {
                if m == 0 && n == 0 {
                    continue;
                }
                let v = self.omega1 * m as f64 + self.omega2 * n as f64;
                best = best.min(v.norm());
            }
        }
        best
    }
}

/// Characteristic of the j-th Jacobi theta function, j in 1..=4.
fn jacobi_characteristic(index: u8) -> Characteristic {
    match index {
        1 => Characteristic::new(vec![0.5], vec![0.5]),
        2 => Characteristic::new(vec![0.5], vec![0.0]),
        3 => Characteristic::new(vec![0.0], vec![0.0]),
        4 => Characteristic::new(vec![0.0], vec![0.5]),
        _ => panic!("jacobi theta index must be 1..=4"),
    }
}

/// The four Jacobi theta functions.  theta1 carries the conventional
/// -i factor relative to theta[1/2;1/2]; the others are the half-period
/// characteristics verbatim.
pub fn jacobi_theta(
    index: u8,
    z: Complex64,
    modulus: &EllipticModulus,
    tol: &Tolerance,
) -> Result<ScaledComplex, EllipticError> {
    let chr = jacobi_characteristic(index);
    let v = theta_char(&chr, &[z], modulus.matrix(), tol)?;
    Ok(if index == 1 {
        v.mul_complex(Complex64::new(0.0, -1.0))
    } else {
        v
    })
}

/// |4 pi d theta/dt - d^2 theta/dx^2| for theta(x|it) by fourth-order
/// central finite differences of the series evaluation.  At second
/// order the h^2 truncation with h = 1e-4 already sits at 1e-6 for
/// t near 0.5, so the wider stencil is needed to resolve the residual.
pub fn heat_equation_residual(x: f64, t: f64, h: f64) -> Result<f64, EllipticError> {
    assert!(t > 0.0 && h > 0.0 && 2.0 * h < t);
    let tol = Tolerance::with_eps(1e-13);
    let eval = |x: f64, t: f64| -> Result<Complex64, EllipticError> {
        let m = EllipticModulus::new(Complex64::new(0.0, t))?;
        Ok(theta_char(
            &Characteristic::zero(1),
            &[Complex64::new(x, 0.0)],
            m.matrix(),
            &tol,
        )?
        .to_complex())
    };
    let dt = (-eval(x, t + 2.0 * h)? + 8.0 * eval(x, t + h)? - 8.0 * eval(x, t - h)?
        + eval(x, t - 2.0 * h)?)
        / (12.0 * h);
    let dxx = (-eval(x + 2.0 * h, t)? + 16.0 * eval(x + h, t)? - 30.0 * eval(x, t)?
        + 16.0 * eval(x - h, t)?
        - eval(x - 2.0 * h, t)?)
        / (12.0 * h * h);
    Ok((4.0 * PI * dt - dxx).norm())
}

/// Winding-number count of theta3 zeros inside the fundamental
/// parallelogram spanned by 1 and b, via the boundary integral of
/// dtheta3/theta3 on `nodes_per_edge` trapezoid nodes per edge.
pub fn theta3_zero_count(
    modulus: &EllipticModulus,
    origin: Complex64,
    nodes_per_edge: usize,
    tol: &Tolerance,
) -> Result<f64, EllipticError> {
    let b = modulus.b();
    let corners = [
        origin,
        origin + 1.0,
        origin + 1.0 + b,
        origin + b,
        origin,
    ];
    let chr = Characteristic::zero(1);
    let mut total = Complex64::new(0.0, 0.0);
    for e in 0..4 {
        let a = corners[e];
        let d = corners[e + 1] - a;
        for k in 0..nodes_per_edge {
            // Trapezoid on each edge.
            let t0 = k as f64 / nodes_per_edge as f64;
            let t1 = (k + 1) as f64 / nodes_per_edge as f64;
            for (t, w) in [(t0, 0.5), (t1, 0.5)] {
                let z = a + d * t;
                let th = theta_char(&chr, &[z], modulus.matrix(), tol)?;
                let dth = crate::theta::theta_derivative(&[1], &chr, &[z], modulus.matrix(), tol)?;
                let ratio = dth.div(&th).to_complex();
                total += w * ratio * d / nodes_per_edge as f64;
            }
        }
    }
    Ok((total / Complex64::new(0.0, 2.0 * PI)).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn theta3_is_plain_theta() {
        let m = EllipticModulus::new(c64(0.2, 1.1)).unwrap();
        let tol = Tolerance::default();
        let z = c64(0.31, -0.09);
        let t3 = jacobi_theta(3, z, &m, &tol).unwrap();
        let plain = crate::theta::theta(&[z], m.matrix(), &tol).unwrap();
        assert!(t3.rel_distance(&plain) < 1e-14);
    }

    #[test]
    fn theta1_odd_and_zero_at_origin() {
        let m = EllipticModulus::new(c64(0.0, 1.0)).unwrap();
        let tol = Tolerance::default();
        let at0 = jacobi_theta(1, c64(0.0, 0.0), &m, &tol).unwrap();
        assert!(at0.is_zero() || at0.log_abs() < (1e-12f64).ln());
        for idx in 2..=4u8 {
            let v = jacobi_theta(idx, c64(0.0, 0.0), &m, &tol).unwrap();
            assert!(v.log_abs() > (0.5f64).ln());
        }
        let z = c64(0.21, 0.17);
        let plus = jacobi_theta(1, z, &m, &tol).unwrap();
        let minus = jacobi_theta(1, -z, &m, &tol).unwrap();
        assert!(plus.rel_distance(&minus.neg()) < 1e-11);
    }

    #[test]
    fn theta3_zero_location_and_count() {
        let m = EllipticModulus::new(c64(0.23, 0.87)).unwrap();
        let tol = Tolerance::default();
        let zero = m.theta_zero();
        let v = jacobi_theta(3, zero, &m, &tol).unwrap();
        let scale = jacobi_theta(3, c64(0.0, 0.0), &m, &tol).unwrap();
        assert!(v.log_abs() - scale.log_abs() < (1e-9f64).ln());
        // Argument-principle count over the parallelogram: one zero.
        let origin = c64(-0.25, -0.1);
        let count = theta3_zero_count(&m, origin, 512, &tol).unwrap();
        assert!((count - 1.0).abs() < 1e-6, "count {count}");
    }

    #[test]
    fn heat_equation_residual_small() {
        let r = heat_equation_residual(0.3, 1.0, 1e-4).unwrap();
        assert!(r <= 1e-6, "residual {r}");
        // Periodicity in x.
        let tol = Tolerance::default();
        let m = EllipticModulus::new(c64(0.0, 1.0)).unwrap();
        let a = theta_char(&Characteristic::zero(1), &[c64(0.4, 0.0)], m.matrix(), &tol).unwrap();
        let b = theta_char(&Characteristic::zero(1), &[c64(1.4, 0.0)], m.matrix(), &tol).unwrap();
        assert!(a.rel_distance(&b) < 1e-12);
        // Large t: only m = 0 survives.
        let big = heat_equation_residual(0.3, 12.0, 1e-4).unwrap();
        assert!(big < 1e-9);
        let v = theta_char(
            &Characteristic::zero(1),
            &[c64(0.3, 0.0)],
            EllipticModulus::new(c64(0.0, 12.0)).unwrap().matrix(),
            &tol,
        )
        .unwrap()
        .to_complex();
        assert!((v.re - 1.0).abs() < 1e-12);
    }
}
