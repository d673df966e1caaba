//! Landau-Lifshitz spin components as theta-product ratios.

use num_complex::Complex64;

use super::FiniteGapError;
use crate::theta::{theta, RiemannMatrix, Tolerance};

/// The data of the Landau-Lifshitz solution: omega = (U x + V t)/2 pi,
/// the offset d with Im d = -(1/2) Im r, and the two shift vectors m, r.
#[derive(Debug, Clone)]
pub struct LLData {
    pub b: RiemannMatrix,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub d: Vec<Complex64>,
    pub m_shift: Vec<Complex64>,
    pub r_shift: Vec<Complex64>,
}

impl LLData {
    pub fn new(
        b: RiemannMatrix,
        u: Vec<Complex64>,
        v: Vec<Complex64>,
        d: Vec<Complex64>,
        m_shift: Vec<Complex64>,
        r_shift: Vec<Complex64>,
    ) -> Result<Self, FiniteGapError> {
        let g = b.genus();
        for (name, vec) in [
            ("u", &u),
            ("v", &v),
            ("d", &d),
            ("m", &m_shift),
            ("r", &r_shift),
        ] {
            if vec.len() != g {
                return Err(FiniteGapError::InvalidData(format!(
                    "vector {name} must have length {g}"
                )));
            }
        }
        let defect = d
            .iter()
            .zip(&r_shift)
            .map(|(dj, rj)| (dj.im + 0.5 * rj.im).abs())
            .fold(0.0f64, f64::max);
        if defect > 1e-10 {
            return Err(FiniteGapError::InvalidData(format!(
                "Im d + (1/2) Im r must vanish, defect {defect:.3e}"
            )));
        }
        Ok(Self {
            b,
            u,
            v,
            d,
            m_shift,
            r_shift,
        })
    }

    fn omega(&self, x: f64, t: f64) -> Vec<Complex64> {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| (u * x + v * t) / two_pi)
            .collect()
    }
}

/// (S1, S2, S3) from the four thetas
/// theta(omega+d), theta(omega+d+m), theta(omega+d+r), theta(omega+d+m+r),
/// combined in shared scaled-product arithmetic.  S1^2+S2^2+S3^2 = 1
/// identically.
pub fn landau_lifshitz_eval(
    x: f64,
    t: f64,
    ld: &LLData,
    tol: &Tolerance,
) -> Result<(Complex64, Complex64, Complex64), FiniteGapError> {
    let g = ld.b.genus();
    let om = ld.omega(x, t);
    let arg = |with_m: bool, with_r: bool| -> Vec<Complex64> {
        (0..g)
            .map(|j| {
                let mut z = om[j] + ld.d[j];
                if with_m {
                    z += ld.m_shift[j];
                }
                if with_r {
                    z += ld.r_shift[j];
                }
                z
            })
            .collect()
    };
    let t00 = theta(&arg(false, false), &ld.b, tol)?;
    let tm = theta(&arg(true, false), &ld.b, tol)?;
    let tr = theta(&arg(false, true), &ld.b, tol)?;
    let tmr = theta(&arg(true, true), &ld.b, tol)?;

    // X = theta(om+d) theta(om+d+m+r), Y = theta(om+d+r) theta(om+d+m),
    // A = theta(om+d+m) theta(om+d+m+r), Bq = theta(om+d) theta(om+d+r).
    let x_prod = t00.mul(&tmr);
    let y_prod = tr.mul(&tm);
    let a_prod = tm.mul(&tmr);
    let b_prod = t00.mul(&tr);
    let denom = x_prod.sub(&y_prod);
    let scale = x_prod.log_abs().max(y_prod.log_abs());
    if denom.is_zero() || (denom.log_abs() - scale) < (1e-12f64).ln() {
        return Err(FiniteGapError::DenominatorVanishes);
    }
    let s1 = a_prod.sub(&b_prod).div(&denom).to_complex();
    let s2 = a_prod
        .add(&b_prod)
        .div(&denom)
        .mul_complex(Complex64::new(0.0, -1.0))
        .to_complex();
    let s3 = x_prod.add(&y_prod).div(&denom).to_complex();
    Ok((s1, s2, s3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::validate_riemann_matrix;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_data(g: usize) -> LLData {
        let b = if g == 1 {
            validate_riemann_matrix(&[vec![c64(0.21, 1.13)]]).unwrap()
        } else {
            validate_riemann_matrix(&[
                vec![c64(0.2, 1.1), c64(-0.3, 0.4)],
                vec![c64(-0.3, 0.4), c64(0.1, 0.9)],
            ])
            .unwrap()
        };
        let r: Vec<Complex64> = (0..g).map(|j| c64(0.21 + 0.1 * j as f64, 0.34)).collect();
        let d: Vec<Complex64> = r
            .iter()
            .enumerate()
            .map(|(j, rj)| c64(0.11 * (j as f64 + 1.0), -0.5 * rj.im))
            .collect();
        LLData::new(
            b,
            (0..g).map(|j| c64(0.5 + 0.2 * j as f64, 0.1)).collect(),
            (0..g).map(|j| c64(-0.3, 0.05 * (j as f64 + 1.0))).collect(),
            d,
            (0..g).map(|j| c64(0.4 - 0.1 * j as f64, 0.22)).collect(),
            r,
        )
        .unwrap()
    }

    #[test]
    fn unit_norm_identity() {
        for g in [1usize, 2] {
            let ld = sample_data(g);
            let tol = Tolerance::default();
            for (x, t) in [(0.0, 0.0), (0.7, -0.4), (3.1, 2.2), (-5.0, 8.0)] {
                let (s1, s2, s3) = landau_lifshitz_eval(x, t, &ld, &tol).unwrap();
                let norm = s1 * s1 + s2 * s2 + s3 * s3;
                assert!(
                    (norm - 1.0).norm() <= 1e-10,
                    "S norm defect {} at genus {g}",
                    (norm - 1.0).norm()
                );
            }
        }
    }

    #[test]
    fn zero_m_shift_degenerates() {
        // m = 0 makes X = Y identically: the denominator vanishes.
        let mut ld = sample_data(1);
        ld.m_shift = vec![c64(0.0, 0.0)];
        let tol = Tolerance::default();
        let err = landau_lifshitz_eval(0.3, 0.7, &ld, &tol).unwrap_err();
        assert!(matches!(err, FiniteGapError::DenominatorVanishes));
    }

    #[test]
    fn swapping_m_and_r_preserves_s3() {
        // Pick m and r with equal imaginary parts so one d satisfies the
        // constraint for both orderings.
        let base_data = sample_data(2);
        let m: Vec<Complex64> = vec![c64(0.4, 0.34), c64(0.3, 0.34)];
        let r: Vec<Complex64> = vec![c64(0.21, 0.34), c64(0.31, 0.34)];
        let ld = LLData::new(
            base_data.b.clone(),
            base_data.u.clone(),
            base_data.v.clone(),
            base_data.d.clone(),
            m.clone(),
            r.clone(),
        )
        .unwrap();
        let swapped = LLData::new(
            base_data.b.clone(),
            base_data.u.clone(),
            base_data.v.clone(),
            base_data.d.clone(),
            r,
            m,
        )
        .unwrap();
        let tol = Tolerance::default();
        let (_, _, s3a) = landau_lifshitz_eval(0.4, -0.2, &ld, &tol).unwrap();
        let (_, _, s3b) = landau_lifshitz_eval(0.4, -0.2, &swapped, &tol).unwrap();
        assert!((s3a - s3b).norm() <= 1e-9 * s3a.norm().max(1.0));
    }

    #[test]
    fn constraint_violation_rejected() {
        let b = validate_riemann_matrix(&[vec![c64(0.0, 1.0)]]).unwrap();
        let err = LLData::new(
            b,
            vec![c64(1.0, 0.0)],
            vec![c64(0.0, 0.0)],
            vec![c64(0.0, 0.3)],
            vec![c64(0.1, 0.0)],
            vec![c64(0.2, 0.1)],
        )
        .unwrap_err();
        assert!(matches!(err, FiniteGapError::InvalidData(_)));
    }
}
