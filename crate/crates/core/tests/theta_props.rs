//! Property tests for the theta core: quasi-periodicity across genera,
//! parity, the direct-series/shift-formula consistency, truncation
//! self-consistency, and the scaled-representation round trip.

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use thetakit::scaled::ScaledComplex;
use thetakit::theta::{
    theta, theta_char, validate_riemann_matrix, Characteristic, RiemannMatrix, Tolerance,
};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random valid Riemann matrix: symmetric real part plus i (M^T M + c I).
fn riemann_matrix_strategy(g: usize) -> impl Strategy<Value = RiemannMatrix> {
    let re = proptest::collection::vec(-0.5f64..0.5, g * g);
    let m = proptest::collection::vec(-0.6f64..0.6, g * g);
    (re, m).prop_map(move |(re, m)| {
        let mut entries = Vec::with_capacity(g * g);
        for j in 0..g {
            for k in 0..g {
                let sym = 0.5 * (re[j * g + k] + re[k * g + j]);
                let mut im = if j == k { 0.4 + 0.1 * g as f64 } else { 0.0 };
                for l in 0..g {
                    im += m[l * g + j] * m[l * g + k];
                }
                entries.push(c64(sym, im));
            }
        }
        RiemannMatrix::from_flat(g, entries).expect("construction is positive definite")
    })
}

fn z_strategy(g: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.2f64..1.2, -1.2f64..1.2), g)
        .prop_map(|v| v.into_iter().map(|(re, im)| c64(re, im)).collect())
}

fn quasi_periodicity_case(b: &RiemannMatrix, z: &[Complex64], m: &[i64], n: &[i64]) -> f64 {
    let g = b.genus();
    let tol = Tolerance::default();
    let bm = b.mul_int_vec(m);
    let shifted: Vec<Complex64> = (0..g)
        .map(|j| z[j] + bm[j] + c64(n[j] as f64, 0.0))
        .collect();
    let lhs = theta(&shifted, b, &tol).unwrap();
    let mut expo = -b.quadratic_phase(m);
    for j in 0..g {
        expo -= c64(0.0, 2.0 * PI * m[j] as f64) * z[j];
    }
    let rhs = ScaledComplex::from_exponent(expo).mul(&theta(z, b, &tol).unwrap());
    lhs.rel_distance(&rhs)
}

macro_rules! quasi_periodicity_test {
    ($name:ident, $g:expr) => {
        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn $name(
                b in riemann_matrix_strategy($g),
                z in z_strategy($g),
                m in proptest::collection::vec(-3i64..=3, $g),
                n in proptest::collection::vec(-3i64..=3, $g),
            ) {
                let dev = quasi_periodicity_case(&b, &z, &m, &n);
                prop_assert!(dev <= 1e-9, "deviation {dev}");
            }
        }
    };
}

quasi_periodicity_test!(quasi_periodicity_g1, 1);
quasi_periodicity_test!(quasi_periodicity_g2, 2);
quasi_periodicity_test!(quasi_periodicity_g3, 3);

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Characteristic periodicity: the characteristic phase factor with
    /// exp(2 pi i (<alpha, n> - <beta, m>)) on top of quasi-periodicity.
    #[test]
    fn characteristic_periodicity_g2(
        b in riemann_matrix_strategy(2),
        z in z_strategy(2),
        alpha in proptest::collection::vec(0.0f64..1.0, 2),
        beta in proptest::collection::vec(0.0f64..1.0, 2),
        m in proptest::collection::vec(-2i64..=2, 2),
        n in proptest::collection::vec(-2i64..=2, 2),
    ) {
        let tol = Tolerance::default();
        let chr = Characteristic::new(alpha.clone(), beta.clone());
        let bm = b.mul_int_vec(&m);
        let shifted: Vec<Complex64> = (0..2)
            .map(|j| z[j] + bm[j] + c64(n[j] as f64, 0.0))
            .collect();
        let lhs = theta_char(&chr, &shifted, &b, &tol).unwrap();
        let mut expo = -b.quadratic_phase(&m);
        for j in 0..2 {
            expo -= c64(0.0, 2.0 * PI * m[j] as f64) * z[j];
            expo += c64(0.0, 2.0 * PI * (alpha[j] * n[j] as f64 - beta[j] * m[j] as f64));
        }
        let rhs = ScaledComplex::from_exponent(expo)
            .mul(&theta_char(&chr, &z, &b, &tol).unwrap());
        let dev = lhs.rel_distance(&rhs);
        prop_assert!(dev <= 1e-9, "deviation {dev}");
    }

    /// theta(-z) = theta(z).
    #[test]
    fn theta_is_even(b in riemann_matrix_strategy(2), z in z_strategy(2)) {
        let tol = Tolerance::default();
        let neg: Vec<Complex64> = z.iter().map(|v| -v).collect();
        let plus = theta(&z, &b, &tol).unwrap();
        let minus = theta(&neg, &b, &tol).unwrap();
        prop_assert!(plus.rel_distance(&minus) <= 1e-10);
    }

    /// Tightening eps (which enlarges the truncation radius) moves the
    /// value by no more than the looser tolerance.
    #[test]
    fn truncation_self_consistency(
        b in riemann_matrix_strategy(2),
        z in z_strategy(2),
    ) {
        let loose = theta(&z, &b, &Tolerance::default()).unwrap();
        let tight = theta(&z, &b, &Tolerance::with_eps(1e-13)).unwrap();
        prop_assert!(loose.rel_distance(&tight) <= 1e-10);
    }

    /// Scaled representation round trip at machine precision.
    #[test]
    fn scaled_roundtrip(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        prop_assume!(re != 0.0 || im != 0.0);
        let v = c64(re, im);
        let s = ScaledComplex::from_complex(v);
        prop_assert!(s.mantissa.norm() >= 0.5 && s.mantissa.norm() <= 2.0);
        let back = s.to_complex();
        prop_assert!((back - v).norm() <= 16.0 * f64::EPSILON * v.norm());
    }

    /// Direct series of the characteristic theta agrees with the shift
    /// formula used by the implementation.
    #[test]
    fn series_vs_shift_formula_g1(
        b_im in 0.6f64..1.6,
        b_re in -0.4f64..0.4,
        z_re in -0.8f64..0.8,
        z_im in -0.8f64..0.8,
        alpha in -1.0f64..1.0,
        beta in -1.0f64..1.0,
    ) {
        let b = validate_riemann_matrix(&[vec![c64(b_re, b_im)]]).unwrap();
        let tol = Tolerance::default();
        let chr = Characteristic::new(vec![alpha], vec![beta]);
        let z = [c64(z_re, z_im)];
        let fast = theta_char(&chr, &z, &b, &tol).unwrap().to_complex();
        // Rectangular brute-force sum of the defining series.
        let mut direct = c64(0.0, 0.0);
        for m in -12i64..=12 {
            let ma = m as f64 + alpha;
            let w = c64(0.0, PI) * b.entry(0, 0) * ma * ma
                + c64(0.0, 2.0 * PI) * (z[0] + beta) * ma;
            direct += w.exp();
        }
        let scale = direct.norm().max(1e-10);
        prop_assert!(
            (fast - direct).norm() <= 1e-9 * scale,
            "shift {fast} vs series {direct}"
        );
    }
}
