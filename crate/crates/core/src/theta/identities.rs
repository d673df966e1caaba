//! Classical theta addition identities used as numerical cross-checks.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{theta_char, Characteristic, RiemannMatrix, ThetaError, Tolerance};
use crate::scaled::ScaledComplex;

/// Which identity to evaluate.  All residuals are relative:
/// |LHS - RHS| / max(|LHS|, |RHS|, 1).
#[derive(Debug, Clone)]
pub enum IdentityCheck {
    /// theta[0;0](z)^2 theta[0;0](0)^2 =
    ///   theta[0;1/2](z)^2 theta[0;1/2](0)^2 + theta[1/2;0](z)^2 theta[1/2;0](0)^2
    SquaredSum { z: Complex64 },
    /// theta[1/2;1/2](z)^2 theta[0;0](0)^2 =
    ///   theta[0;1/2](z)^2 theta[1/2;0](0)^2 - theta[1/2;0](z)^2 theta[0;1/2](0)^2
    SquaredDiff { z: Complex64 },
    /// theta[0;0](0)^4 = theta[0;1/2](0)^4 + theta[1/2;0](0)^4
    JacobiAtZero,
    /// The four-point product identity with the 2^{2g} correction sum.
    /// The four z-vectors and the (m;n) characteristics are free; the
    /// (k;l) characteristics must be the image of (m;n) under the
    /// half-Hadamard matrix M.
    FourTermRiemann {
        z: [Vec<Complex64>; 4],
        chars_mn: [Characteristic; 4],
        chars_kl: [Characteristic; 4],
    },
}

/// M = (1/2) [[1,1,1,1],[1,1,-1,-1],[1,-1,1,-1],[1,-1,-1,1]], acting on
/// 4-tuples: out_i = (1/2) sum_j H[j][i] in_j.  M is symmetric and M^2 = I.
const HADAMARD: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
];

fn apply_m_vectors(input: &[Vec<Complex64>; 4]) -> [Vec<Complex64>; 4] {
    let g = input[0].len();
    let mut out = [(); 4].map(|_| vec![Complex64::new(0.0, 0.0); g]);
    for (i, row) in out.iter_mut().enumerate() {
        for (j, inp) in input.iter().enumerate() {
            for k in 0..g {
                row[k] += 0.5 * HADAMARD[j][i] * inp[k];
            }
        }
    }
    out
}

fn apply_m_reals(input: [&[f64]; 4]) -> [Vec<f64>; 4] {
    let g = input[0].len();
    let mut out = [(); 4].map(|_| vec![0.0; g]);
    for (i, row) in out.iter_mut().enumerate() {
        for (j, inp) in input.iter().enumerate() {
            for k in 0..g {
                row[k] += 0.5 * HADAMARD[j][i] * inp[k];
            }
        }
    }
    out
}

/// The (k;l) characteristics paired to given (m;n) under M.
pub fn four_term_partner_characteristics(mn: &[Characteristic; 4]) -> [Characteristic; 4] {
    let alphas = apply_m_reals([&mn[0].alpha, &mn[1].alpha, &mn[2].alpha, &mn[3].alpha]);
    let betas = apply_m_reals([&mn[0].beta, &mn[1].beta, &mn[2].beta, &mn[3].beta]);
    let mut it = alphas.into_iter().zip(betas);
    [(); 4].map(|_| {
        let (a, b) = it.next().unwrap();
        Characteristic::new(a, b)
    })
}

fn half(g: usize, which_alpha: bool) -> Characteristic {
    if which_alpha {
        Characteristic::new(vec![0.5; g], vec![0.0; g])
    } else {
        Characteristic::new(vec![0.0; g], vec![0.5; g])
    }
}

/// Evaluate the requested identity and return its relative residual.
pub fn addition_identity_check(
    check: &IdentityCheck,
    b: &RiemannMatrix,
    tol: &Tolerance,
) -> Result<f64, ThetaError> {
    match check {
        IdentityCheck::JacobiAtZero => {
            require_genus(b, 1)?;
            let zero = [Complex64::new(0.0, 0.0)];
            let t3 = theta_char(&Characteristic::zero(1), &zero, b, tol)?;
            let t4 = theta_char(&half(1, false), &zero, b, tol)?;
            let t2 = theta_char(&half(1, true), &zero, b, tol)?;
            let lhs = pow4(&t3);
            let rhs = pow4(&t4).add(&pow4(&t2));
            Ok(residual(&lhs, &rhs))
        }
        IdentityCheck::SquaredSum { z } => {
            require_genus(b, 1)?;
            let zv = [*z];
            let zero = [Complex64::new(0.0, 0.0)];
            let t3z = theta_char(&Characteristic::zero(1), &zv, b, tol)?;
            let t30 = theta_char(&Characteristic::zero(1), &zero, b, tol)?;
            let t4z = theta_char(&half(1, false), &zv, b, tol)?;
            let t40 = theta_char(&half(1, false), &zero, b, tol)?;
            let t2z = theta_char(&half(1, true), &zv, b, tol)?;
            let t20 = theta_char(&half(1, true), &zero, b, tol)?;
            let lhs = sq(&t3z).mul(&sq(&t30));
            let rhs = sq(&t4z).mul(&sq(&t40)).add(&sq(&t2z).mul(&sq(&t20)));
            Ok(residual(&lhs, &rhs))
        }
        IdentityCheck::SquaredDiff { z } => {
            require_genus(b, 1)?;
            let zv = [*z];
            let zero = [Complex64::new(0.0, 0.0)];
            let t1z = theta_char(&Characteristic::new(vec![0.5], vec![0.5]), &zv, b, tol)?;
            let t30 = theta_char(&Characteristic::zero(1), &zero, b, tol)?;
            let t4z = theta_char(&half(1, false), &zv, b, tol)?;
            let t20 = theta_char(&half(1, true), &zero, b, tol)?;
            let t2z = theta_char(&half(1, true), &zv, b, tol)?;
            let t40 = theta_char(&half(1, false), &zero, b, tol)?;
            let lhs = sq(&t1z).mul(&sq(&t30));
            let rhs = sq(&t4z).mul(&sq(&t20)).sub(&sq(&t2z).mul(&sq(&t40)));
            Ok(residual(&lhs, &rhs))
        }
        IdentityCheck::FourTermRiemann {
            z,
            chars_mn,
            chars_kl,
        } => {
            let g = b.genus();
            if g > 2 {
                return Err(ThetaError::BadConfiguration(
                    "four-term identity supported for g <= 2".into(),
                ));
            }
            for part in z.iter() {
                if part.len() != g {
                    return Err(ThetaError::BadShape);
                }
            }
            let expect_kl = four_term_partner_characteristics(chars_mn);
            for (got, want) in chars_kl.iter().zip(&expect_kl) {
                let close = got
                    .alpha
                    .iter()
                    .zip(&want.alpha)
                    .chain(got.beta.iter().zip(&want.beta))
                    .all(|(a, b)| (a - b).abs() < 1e-9);
                if !close {
                    return Err(ThetaError::BadConfiguration(
                        "(m,n)/(k,l) characteristics are not related by M".into(),
                    ));
                }
            }
            let w = apply_m_vectors(z);

            let mut lhs = ScaledComplex::from_complex(Complex64::new(1.0, 0.0));
            for i in 0..4 {
                lhs = lhs.mul(&theta_char(&chars_mn[i], &z[i], b, tol)?);
            }

            let mut rhs = ScaledComplex::ZERO;
            // a1, a2 run over {0, 1/2}^g each.
            for bits in 0u32..(1 << (2 * g)) {
                let a1: Vec<f64> = (0..g)
                    .map(|j| if bits >> j & 1 == 1 { 0.5 } else { 0.0 })
                    .collect();
                let a2: Vec<f64> = (0..g)
                    .map(|j| if bits >> (g + j) & 1 == 1 { 0.5 } else { 0.0 })
                    .collect();
                let m1_dot_a2: f64 = chars_mn[0].alpha.iter().zip(&a2).map(|(m, a)| m * a).sum();
                let phase = ScaledComplex::from_exponent(Complex64::new(0.0, -4.0 * PI * m1_dot_a2));
                let mut prod = phase;
                for i in 0..4 {
                    let chr = Characteristic::new(
                        chars_kl[i].alpha.iter().zip(&a1).map(|(k, a)| k + a).collect(),
                        chars_kl[i].beta.iter().zip(&a2).map(|(l, a)| l + a).collect(),
                    );
                    prod = prod.mul(&theta_char(&chr, &w[i], b, tol)?);
                }
                rhs = rhs.add(&prod);
            }
            rhs = rhs.mul_complex(Complex64::new(1.0 / (1u32 << g) as f64, 0.0));
            Ok(residual(&lhs, &rhs))
        }
    }
}

fn require_genus(b: &RiemannMatrix, g: usize) -> Result<(), ThetaError> {
    if b.genus() != g {
        return Err(ThetaError::BadConfiguration(format!(
            "identity requires genus {g}, matrix has genus {}",
            b.genus()
        )));
    }
    Ok(())
}

fn sq(v: &ScaledComplex) -> ScaledComplex {
    v.mul(v)
}

fn pow4(v: &ScaledComplex) -> ScaledComplex {
    sq(&sq(v))
}

fn residual(lhs: &ScaledComplex, rhs: &ScaledComplex) -> f64 {
    let diff = lhs.sub(rhs);
    if diff.is_zero() {
        return 0.0;
    }
    let scale = lhs.log_abs().max(rhs.log_abs()).max(0.0);
    (diff.log_abs() - scale).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::validate_riemann_matrix;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn b_of(v: Complex64) -> RiemannMatrix {
        validate_riemann_matrix(&[vec![v]]).unwrap()
    }

    #[test]
    fn jacobi_identity_at_b_eq_i() {
        let b = b_of(c64(0.0, 1.0));
        let tol = Tolerance::default();
        let r = addition_identity_check(&IdentityCheck::JacobiAtZero, &b, &tol).unwrap();
        assert!(r <= 1e-10, "jacobi residual {r}");
        // Side fact: theta2(0|i) = theta4(0|i) = 2^(-1/4) theta3(0|i).
        let zero = [c64(0.0, 0.0)];
        let t3 = theta_char(&Characteristic::zero(1), &zero, &b, &tol)
            .unwrap()
            .to_complex();
        let t4 = theta_char(&Characteristic::new(vec![0.0], vec![0.5]), &zero, &b, &tol)
            .unwrap()
            .to_complex();
        let t2 = theta_char(&Characteristic::new(vec![0.5], vec![0.0]), &zero, &b, &tol)
            .unwrap()
            .to_complex();
        let expected = t3 * 2f64.powf(-0.25);
        assert!((t4 - expected).norm() < 1e-10 * t3.norm());
        assert!((t2 - expected).norm() < 1e-10 * t3.norm());
    }

    #[test]
    fn squared_sum_degenerates_to_jacobi_at_zero() {
        let b = b_of(c64(0.3, 0.8));
        let tol = Tolerance::default();
        let r1 = addition_identity_check(
            &IdentityCheck::SquaredSum { z: c64(0.0, 0.0) },
            &b,
            &tol,
        )
        .unwrap();
        let r2 = addition_identity_check(&IdentityCheck::JacobiAtZero, &b, &tol).unwrap();
        assert!(r1 <= 1e-10 && r2 <= 1e-10);
    }

    #[test]
    fn squared_identities_hold_off_origin() {
        let b = b_of(c64(-0.21, 1.3));
        let tol = Tolerance::default();
        let z = c64(0.37, -0.18);
        let r1 = addition_identity_check(&IdentityCheck::SquaredSum { z }, &b, &tol).unwrap();
        let r2 = addition_identity_check(&IdentityCheck::SquaredDiff { z }, &b, &tol).unwrap();
        assert!(r1 <= 1e-10, "squared-sum residual {r1}");
        assert!(r2 <= 1e-10, "squared-diff residual {r2}");
    }

    #[test]
    fn four_term_identity_g1() {
        let b = b_of(c64(0.15, 0.95));
        let tol = Tolerance::default();
        let z = [
            vec![c64(0.31, 0.12)],
            vec![c64(-0.22, 0.05)],
            vec![c64(0.11, -0.27)],
            vec![c64(0.05, 0.4)],
        ];
        let mn = [
            Characteristic::new(vec![0.5], vec![0.0]),
            Characteristic::new(vec![0.0], vec![0.5]),
            Characteristic::new(vec![0.5], vec![0.5]),
            Characteristic::new(vec![0.0], vec![0.0]),
        ];
        let kl = four_term_partner_characteristics(&mn);
        let r = addition_identity_check(
            &IdentityCheck::FourTermRiemann {
                z,
                chars_mn: mn,
                chars_kl: kl,
            },
            &b,
            &tol,
        )
        .unwrap();
        assert!(r <= 1e-8, "four-term residual {r}");
    }

    #[test]
    fn four_term_rejects_mismatched_partners() {
        let b = b_of(c64(0.0, 1.0));
        let tol = Tolerance::default();
        let z = [(); 4].map(|_| vec![c64(0.0, 0.0)]);
        let mn = [(); 4].map(|_| Characteristic::zero(1));
        let mut kl = four_term_partner_characteristics(&mn);
        kl[0].alpha[0] += 0.25;
        let err = addition_identity_check(
            &IdentityCheck::FourTermRiemann {
                z,
                chars_mn: mn,
                chars_kl: kl,
            },
            &b,
            &tol,
        )
        .unwrap_err();
        assert!(matches!(err, ThetaError::BadConfiguration(_)));
    }
}
