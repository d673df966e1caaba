//! Elliptic functions built from theta quotients: the zero/pole product
//! construction and the logarithmic-derivative pole sum.

use num_complex::Complex64;

use super::{EllipticError, EllipticModulus};
use crate::scaled::ScaledComplex;
use crate::theta::{theta, theta_with_derivatives, Tolerance};

/// f(z) = C prod_j theta(z - P_j - s) / theta(z - Q_j - s), s = (1+b)/2.
/// Doubly periodic once sum(P) = sum(Q) exactly; the constructor shifts
/// P_1 by the lattice vector closing the Abel condition.
#[derive(Debug, Clone)]
pub struct DivisorFunction {
    modulus: EllipticModulus,
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    constant: Complex64,
    tol: Tolerance,
}

/// Zeros at the P_j, poles at the Q_j, modulo the period lattice.
pub fn elliptic_from_divisor(
    zeros: &[Complex64],
    poles: &[Complex64],
    modulus: &EllipticModulus,
    constant: Complex64,
    tol: &Tolerance,
) -> Result<DivisorFunction, EllipticError> {
    if zeros.len() != poles.len() || zeros.len() <= 1 {
        return Err(EllipticError::DegenerateCount(zeros.len().min(poles.len())));
    }
    let sum: Complex64 =
        zeros.iter().sum::<Complex64>() - poles.iter().sum::<Complex64>();
    let (n, m, res) = modulus.matrix().lattice_reduce(&[sum]);
    let dist = res[0].norm();
    if dist > 1e-9 {
        return Err(EllipticError::AbelConditionViolated(dist));
    }
    let mut zeros = zeros.to_vec();
    // Close the condition exactly: move P_1 by the offending lattice vector.
    zeros[0] -= Complex64::new(n[0] as f64, 0.0) + modulus.b() * m[0] as f64 + res[0];
    Ok(DivisorFunction {
        modulus: modulus.clone(),
        zeros,
        poles: poles.to_vec(),
        constant,
        tol: *tol,
    })
}

impl DivisorFunction {
    pub fn evaluate_scaled(&self, z: Complex64) -> Result<ScaledComplex, EllipticError> {
        let s = self.modulus.theta_zero();
        let mut acc = ScaledComplex::from_complex(self.constant);
        for (p, q) in self.zeros.iter().zip(&self.poles) {
            let num = theta(&[z - p - s], self.modulus.matrix(), &self.tol)?;
            let den = theta(&[z - q - s], self.modulus.matrix(), &self.tol)?;
            acc = acc.mul(&num).div(&den);
        }
        Ok(acc)
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        Ok(self.evaluate_scaled(z)?.to_complex())
    }
}

/// f(z) = sum_j lambda_j d/dz log theta(z - P_j) + C, with sum lambda = 0.
/// Simple poles at P_j + (1+b)/2 with residues lambda_j.
#[derive(Debug, Clone)]
pub struct PoleSumFunction {
    modulus: EllipticModulus,
    poles: Vec<Complex64>,
    residues: Vec<Complex64>,
    constant: Complex64,
    tol: Tolerance,
}

pub fn elliptic_from_poles(
    poles: &[Complex64],
    residues: &[Complex64],
    modulus: &EllipticModulus,
    constant: Complex64,
    tol: &Tolerance,
) -> Result<PoleSumFunction, EllipticError> {
    assert_eq!(poles.len(), residues.len());
    let sum: Complex64 = residues.iter().sum();
    let scale = residues.iter().map(|r| r.norm()).fold(1.0f64, f64::max);
    if sum.norm() > 1e-12 * scale {
        return Err(EllipticError::ResidueSumNonzero(sum.norm()));
    }
    Ok(PoleSumFunction {
        modulus: modulus.clone(),
        poles: poles.to_vec(),
        residues: residues.to_vec(),
        constant,
        tol: *tol,
    })
}

impl PoleSumFunction {
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        let mut acc = self.constant;
        for (p, lam) in self.poles.iter().zip(&self.residues) {
            let vals = theta_with_derivatives(
                &[z - p],
                self.modulus.matrix(),
                None,
                &[vec![0], vec![1]],
                &self.tol,
            )?;
            acc += lam * vals[1].div(&vals[0]).to_complex();
        }
        Ok(acc)
    }

    /// Location of the j-th pole in the fundamental cell convention.
    pub fn pole_location(&self, j: usize) -> Complex64 {
        self.poles[j] + self.modulus.theta_zero()
    }
}
