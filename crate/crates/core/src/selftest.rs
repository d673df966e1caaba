//! End-to-end property suite: sixteen numbered criteria covering every
//! module, with fixed tolerances and seeded randomness.  The CLI
//! `selftest` subcommand and the acceptance test target both drive
//! [`run_all`].

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::builders::{baker_akhiezer, contour_residue, second_kind, third_kind, BAData};
use crate::elliptic::{
    heat_equation_residual, jacobi_theta, theta3_zero_count, weierstrass_p, weierstrass_p_prime,
    wp_invariants, EllipticModulus, Lattice,
};
use crate::finite_gap::{
    fit_wave_vectors, landau_lifshitz_eval, sine_gordon_residual, Grid, LLData, WaveData,
};
use crate::hyperelliptic::{
    abel_map, build_curve, jacobi_inversion, period_matrix, riemann_constants,
    theta_divisor_membership, CurvePoint, Divisor, HyperellipticCurve, Sheet,
};
use crate::kirchhoff::{
    clebsch_spectrum, integrate, linearization_rates, s_flow, ClebschParams, Method, RigidState,
    SteklovParams,
};
use crate::numeric::elliptic_k_agm;
use crate::scaled::ScaledComplex;
use crate::theta::{
    addition_identity_check, enumerate_half_periods, four_term_partner_characteristics, theta,
    theta_char, validate_riemann_matrix, Characteristic, IdentityCheck, Parity, RiemannMatrix,
    Tolerance,
};

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub seed: u64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { seed: 7 }
    }
}

fn rng_for(cfg: &SelftestConfig, criterion: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1000).wrapping_add(criterion as u64))
}

fn random_riemann_matrix(rng: &mut ChaCha8Rng, g: usize) -> RiemannMatrix {
    loop {
        let mut re = vec![0.0; g * g];
        let mut m = vec![0.0; g * g];
        for j in 0..g {
            for k in 0..=j {
                let v: f64 = rng.gen_range(-0.5..0.5);
                re[j * g + k] = v;
                re[k * g + j] = v;
            }
        }
        for v in m.iter_mut() {
            *v = rng.gen_range(-0.6..0.6);
        }
        // Im B = M^T M + c I is positive definite.
        let c = 0.35 + 0.15 * g as f64;
        let mut entries = Vec::with_capacity(g * g);
        for j in 0..g {
            for k in 0..g {
                let mut im = if j == k { c } else { 0.0 };
                for l in 0..g {
                    im += m[l * g + j] * m[l * g + k];
                }
                entries.push(Complex64::new(re[j * g + k], im));
            }
        }
        if let Ok(b) = RiemannMatrix::from_flat(g, entries) {
            return b;
        }
    }
}

fn random_z(rng: &mut ChaCha8Rng, g: usize) -> Vec<Complex64> {
    (0..g)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn report(
    id: usize,
    name: &'static str,
    start: Instant,
    passed: bool,
    detail: String,
) -> CriterionReport {
    CriterionReport {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Criterion 1: quasi-periodicity of theta under z -> z + n + B m.
fn criterion_1(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 1);
    let tol = Tolerance::default();
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let g = trial % 3 + 1;
        let b = random_riemann_matrix(&mut rng, g);
        let z = random_z(&mut rng, g);
        let m: Vec<i64> = (0..g).map(|_| rng.gen_range(-3..=3)).collect();
        let n: Vec<i64> = (0..g).map(|_| rng.gen_range(-3..=3)).collect();
        let bm = b.mul_int_vec(&m);
        let shifted: Vec<Complex64> = (0..g)
            .map(|j| z[j] + bm[j] + Complex64::new(n[j] as f64, 0.0))
            .collect();
        let lhs = theta(&shifted, &b, &tol).unwrap();
        let mut expo = -b.quadratic_phase(&m);
        for j in 0..g {
            expo -= Complex64::new(0.0, 2.0 * PI * m[j] as f64) * z[j];
        }
        let rhs = ScaledComplex::from_exponent(expo).mul(&theta(&z, &b, &tol).unwrap());
        worst = worst.max(lhs.rel_distance(&rhs));
    }
    report(
        1,
        "theta quasi-periodicity",
        start,
        worst <= 1e-9,
        format!("max relative deviation {worst:.3e} (tolerance 1e-9)"),
    )
}

/// Criterion 2: half-period census and parity signs.
fn criterion_2(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 2);
    let tol = Tolerance::default();
    let mut counts_ok = true;
    for g in 1..=4usize {
        let all = enumerate_half_periods(g).unwrap();
        let even = all.iter().filter(|(_, p)| *p == Parity::Even).count();
        let odd = all.len() - even;
        counts_ok &=
            even == (1 << (g - 1)) * ((1 << g) + 1) && odd == (1 << (g - 1)) * ((1 << g) - 1);
    }
    let mut worst: f64 = 0.0;
    for g in 1..=2usize {
        let b = random_riemann_matrix(&mut rng, g);
        let z = random_z(&mut rng, g);
        let neg: Vec<Complex64> = z.iter().map(|v| -v).collect();
        for (chr, parity) in enumerate_half_periods(g).unwrap() {
            let plus = theta_char(&chr, &z, &b, &tol).unwrap();
            let minus = theta_char(&chr, &neg, &b, &tol).unwrap();
            let expected = plus.mul_complex(Complex64::new(parity.sign(), 0.0));
            worst = worst.max(minus.rel_distance(&expected));
        }
    }
    report(
        2,
        "half-period census and parity",
        start,
        counts_ok && worst <= 1e-10,
        format!("counts exact: {counts_ok}; max parity deviation {worst:.3e}"),
    )
}

/// Criterion 3: the single zero of theta3 at (1+b)/2.
fn criterion_3(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 3);
    let tol = Tolerance::default();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_count: f64 = 0.0;
    for _ in 0..20 {
        let b = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.45..2.2));
        let modulus = EllipticModulus::new(b).unwrap();
        let zero = jacobi_theta(3, modulus.theta_zero(), &modulus, &tol).unwrap();
        let scale = jacobi_theta(3, Complex64::new(0.0, 0.0), &modulus, &tol).unwrap();
        worst_ratio = worst_ratio.max((zero.log_abs() - scale.log_abs()).exp());
        let origin = Complex64::new(rng.gen_range(-0.3..-0.1), rng.gen_range(-0.3..-0.1));
        let count = theta3_zero_count(&modulus, origin, 512, &tol).unwrap();
        worst_count = worst_count.max((count - 1.0).abs());
    }
    report(
        3,
        "theta3 zero location and count",
        start,
        worst_ratio <= 1e-9 && worst_count <= 1e-6,
        format!(
            "max |theta(zero)|/|theta(0)| = {worst_ratio:.3e}; count defect {worst_count:.3e}"
        ),
    )
}

/// Criterion 4: heat equation residual on a 10x10 grid.
fn criterion_4(_cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let x = i as f64 / 10.0;
            let t = 0.5 + 1.5 * j as f64 / 9.0;
            worst = worst.max(heat_equation_residual(x, t, 1e-4).unwrap());
        }
    }
    report(
        4,
        "heat equation residual",
        start,
        worst <= 1e-6,
        format!("max residual {worst:.3e} (tolerance 1e-6)"),
    )
}

/// Criterion 5: addition formulas.
fn criterion_5(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 5);
    let tol = Tolerance::default();
    let mut worst_sq: f64 = 0.0;
    for _ in 0..50 {
        let b = validate_riemann_matrix(&[vec![Complex64::new(
            rng.gen_range(-0.4..0.4),
            rng.gen_range(0.5..1.8),
        )]])
        .unwrap();
        let z = Complex64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
        for check in [
            IdentityCheck::JacobiAtZero,
            IdentityCheck::SquaredSum { z },
            IdentityCheck::SquaredDiff { z },
        ] {
            worst_sq = worst_sq.max(addition_identity_check(&check, &b, &tol).unwrap());
        }
    }
    let mut worst_four: f64 = 0.0;
    for g in 1..=2usize {
        for _ in 0..10 {
            let b = random_riemann_matrix(&mut rng, g);
            let z = [(); 4].map(|_| random_z(&mut rng, g));
            let mn = [(); 4].map(|_| {
                Characteristic::new(
                    (0..g)
                        .map(|_| if rng.gen_bool(0.5) { 0.5 } else { 0.0 })
                        .collect(),
                    (0..g)
                        .map(|_| if rng.gen_bool(0.5) { 0.5 } else { 0.0 })
                        .collect(),
                )
            });
            let kl = four_term_partner_characteristics(&mn);
            let check = IdentityCheck::FourTermRiemann {
                z,
                chars_mn: mn,
                chars_kl: kl,
            };
            worst_four = worst_four.max(addition_identity_check(&check, &b, &tol).unwrap());
        }
    }
    report(
        5,
        "addition formulas",
        start,
        worst_sq <= 1e-9 && worst_four <= 1e-8,
        format!("squared/Jacobi max {worst_sq:.3e}; four-term max {worst_four:.3e}"),
    )
}

/// Criterion 6: Weierstrass machinery.
fn criterion_6(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 6);
    let tol = Tolerance::with_eps(1e-13);
    let lat = Lattice::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(0.8..1.4)),
    )
    .unwrap();
    let inv = wp_invariants(&lat, &tol).unwrap();
    let mut worst_ode: f64 = 0.0;
    let mut tried = 0;
    while tried < 20 {
        let z = Complex64::new(rng.gen_range(-0.45..0.45), rng.gen_range(-0.45..0.45));
        if lat.distance_to_lattice(z) < 0.2 {
            continue;
        }
        tried += 1;
        let p = weierstrass_p(z, &lat, &tol).unwrap();
        let pp = weierstrass_p_prime(z, &lat, &tol).unwrap();
        worst_ode = worst_ode.max((pp * pp - 4.0 * p * p * p + inv.g2 * p + inv.g3).norm());
    }
    let square = Lattice::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap();
    let g3_defect = wp_invariants(&square, &tol).unwrap().g3.norm();
    let mut worst_series: f64 = 0.0;
    for i in 1..=5 {
        for j in 1..=5 {
            let z = Complex64::new(0.1 + 0.12 * i as f64, 0.08 + 0.12 * j as f64);
            let fast = weierstrass_p(z, &square, &tol).unwrap();
            let mut slow = 1.0 / (z * z);
            let n = 160;
            for mm in -n..=n {
                for kk in -n..=n {
                    if mm == 0 && kk == 0 {
                        continue;
                    }
                    let w = Complex64::new(mm as f64, kk as f64);
                    slow += 1.0 / ((z - w) * (z - w)) - 1.0 / (w * w);
                }
            }
            worst_series = worst_series.max((fast - slow).norm() / fast.norm().max(1.0));
        }
    }
    report(
        6,
        "Weierstrass p and invariants",
        start,
        worst_ode <= 1e-8 && g3_defect <= 1e-9 && worst_series <= 1e-4,
        format!(
            "ODE residual {worst_ode:.3e}; square-lattice g3 {g3_defect:.3e}; series agreement {worst_series:.3e}"
        ),
    )
}

/// Criterion 7: genus-1 period against the AGM elliptic-integral oracle.
fn criterion_7(_cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let s = std::f64::consts::SQRT_2;
    let e = [-s, -1.0, 1.0, s];
    let curve = build_curve(&[
        Complex64::new(e[0], 0.0),
        Complex64::new(e[1], 0.0),
        Complex64::new(e[2], 0.0),
        Complex64::new(e[3], 0.0),
    ])
    .unwrap();
    let pd = period_matrix(&curve, &Tolerance::default()).unwrap();
    let b = pd.riemann_matrix().entry(0, 0);
    let k2 = ((e[1] - e[0]) * (e[3] - e[2])) / ((e[2] - e[0]) * (e[3] - e[1]));
    let expect = Complex64::new(
        0.0,
        elliptic_k_agm((1.0 - k2).sqrt()) / elliptic_k_agm(k2.sqrt()),
    );
    let defect = (b - expect).norm();
    report(
        7,
        "genus-1 period vs AGM oracle",
        start,
        defect <= 1e-8,
        format!("b = {:.10}+{:.10}i, AGM oracle defect {defect:.3e}", b.re, b.im),
    )
}

fn random_curve_g2(rng: &mut ChaCha8Rng) -> HyperellipticCurve {
    loop {
        let pts: Vec<Complex64> = (0..6)
            .map(|k| {
                Complex64::new(
                    k as f64 - 2.5 + rng.gen_range(-0.35..0.35),
                    rng.gen_range(-0.6..0.6),
                )
            })
            .collect();
        if let Ok(c) = build_curve(&pts) {
            return c;
        }
    }
}

/// Criterion 8: genus-2 period-matrix oracle on random curves.
fn criterion_8(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 8);
    let mut done = 0;
    let mut failures = 0;
    for _ in 0..10 {
        let curve = random_curve_g2(&mut rng);
        match period_matrix(&curve, &Tolerance::default()) {
            Ok(_) => done += 1,
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        8,
        "genus-2 period oracle",
        start,
        failures == 0 && elapsed < 60.0,
        format!(
            "{done}/10 random curves validated (symmetry 1e-8 + positive-definite Im) in {elapsed:.1} s"
        ),
    )
}

fn inversion_test_curve() -> HyperellipticCurve {
    build_curve(&[
        Complex64::new(-2.3, 0.0),
        Complex64::new(-1.1, 0.4),
        Complex64::new(0.2, -0.3),
        Complex64::new(1.0, 0.2),
        Complex64::new(2.2, -0.1),
        Complex64::new(3.1, 0.3),
    ])
    .unwrap()
}

/// Criterion 9: Jacobi inversion round trips on a genus-2 curve.
fn criterion_9(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 9);
    let curve = inversion_test_curve();
    let tol = Tolerance::default();
    let pd = period_matrix(&curve, &tol).unwrap();
    let p0 = CurvePoint::plus(curve.base_point());
    let mut worst_xi: f64 = 0.0;
    let mut passed = true;
    let mut detail_err = String::new();
    for trial in 0..10 {
        let mut points = Vec::new();
        while points.len() < 2 {
            let xi = Complex64::new(rng.gen_range(-2.5..3.2), rng.gen_range(-1.1..1.1));
            if curve.distance_to_cuts(xi) < 0.15 * curve.scale() {
                continue;
            }
            let sheet = if rng.gen_bool(0.5) {
                Sheet::Plus
            } else {
                Sheet::Minus
            };
            points.push(CurvePoint::new(xi, sheet));
        }
        let mut z = vec![Complex64::new(0.0, 0.0); 2];
        for p in &points {
            let phi = abel_map(&curve, &pd, p, &p0, &tol).unwrap();
            for (a, b) in z.iter_mut().zip(&phi) {
                *a += b;
            }
        }
        match jacobi_inversion(&curve, &pd, &z, &tol) {
            Ok(div) => {
                for target in &points {
                    let best = div
                        .points
                        .iter()
                        .map(|(p, _)| (p.xi - target.xi).norm())
                        .fold(f64::INFINITY, f64::min);
                    worst_xi = worst_xi.max(best / curve.scale());
                }
            }
            Err(e) => {
                passed = false;
                detail_err = format!("; trial {trial} failed: {e}");
            }
        }
    }
    passed &= worst_xi <= 1e-6;
    report(
        9,
        "Jacobi inversion round trip",
        start,
        passed,
        format!("max set-recovery defect {worst_xi:.3e} (tolerance 1e-6){detail_err}"),
    )
}

/// Criterion 10: theta-divisor membership at genus 2.
fn criterion_10(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 10);
    let curve = inversion_test_curve();
    let tol = Tolerance::default();
    let pd = period_matrix(&curve, &tol).unwrap();
    let p0 = CurvePoint::plus(curve.base_point());
    let delta = riemann_constants(&curve, &pd).delta;
    let mut worst_member: f64 = 0.0;
    let mut worst_control = f64::INFINITY;
    let mut n = 0;
    while n < 10 {
        let xi = Complex64::new(rng.gen_range(-2.5..3.2), rng.gen_range(-1.1..1.1));
        if curve.distance_to_cuts(xi) < 0.15 * curve.scale() {
            continue;
        }
        n += 1;
        let sheet = if rng.gen_bool(0.5) {
            Sheet::Plus
        } else {
            Sheet::Minus
        };
        let p = CurvePoint::new(xi, sheet);
        let r = theta_divisor_membership(&curve, &pd, &[p], &tol).unwrap();
        worst_member = worst_member.max(r);
        let phi = abel_map(&curve, &pd, &p, &p0, &tol).unwrap();
        let mut c: Vec<Complex64> = (0..2).map(|j| phi[j] + delta[j]).collect();
        c[0] += 0.1;
        let control = crate::theta::theta_magnitude(&c, pd.riemann_matrix(), &tol).unwrap();
        worst_control = worst_control.min(control);
    }
    report(
        10,
        "theta-divisor membership",
        start,
        worst_member <= 1e-7 && worst_control >= 1e-3,
        format!(
            "max membership residual {worst_member:.3e}; min perturbed residual {worst_control:.3e}"
        ),
    )
}

/// Cycle realizations for the single-valuedness checks: circles around
/// cuts and two-cut crossing rectangles.
fn cycle_loops(curve: &HyperellipticCurve, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
    let mut loops = Vec::new();
    let ncuts = curve.cuts().len();
    for cut in 1..ncuts {
        let c = &curve.cuts()[cut];
        let r = 1.3 * c.half.norm();
        let n = 20;
        loops.push(
            (0..n)
                .map(|k| {
                    let ang = 2.0 * PI * k as f64 / n as f64;
                    c.mid + r * Complex64::new(ang.cos(), ang.sin())
                })
                .collect(),
        );
    }
    let y_hi = curve.top_altitude();
    let y_lo = curve
        .branch_points()
        .iter()
        .map(|z| z.im)
        .fold(f64::INFINITY, f64::min)
        - 0.75 * curve.scale();
    for _ in 0..8 {
        let i = rng.gen_range(0..ncuts);
        let mut j = rng.gen_range(0..ncuts);
        while j == i {
            j = rng.gen_range(0..ncuts);
        }
        let ci = curve.cuts()[i].mid.re;
        let cj = curve.cuts()[j].mid.re;
        loops.push(vec![
            Complex64::new(ci, y_hi),
            Complex64::new(ci, y_lo),
            Complex64::new(cj, y_lo),
            Complex64::new(cj, y_hi),
        ]);
    }
    loops
}

fn g1_builder_curve() -> HyperellipticCurve {
    let s = std::f64::consts::SQRT_2;
    build_curve(&[
        Complex64::new(-s, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(s, 0.0),
    ])
    .unwrap()
}

/// Criterion 11: third-kind differentials and pole-function builders.
fn criterion_11(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 11);
    let curve = g1_builder_curve();
    let tol = Tolerance::default();
    let pd = period_matrix(&curve, &tol).unwrap();
    let p_pole = CurvePoint::plus(Complex64::new(-0.3, 1.2));
    let q_pole = CurvePoint::minus(Complex64::new(0.6, -1.1));
    let eta = third_kind(&curve, &pd, &p_pole, &q_pole, &tol).unwrap();
    let rp = contour_residue(&curve, &eta.form, &p_pole, 1e-3 * curve.scale(), 256);
    let rq = contour_residue(&curve, &eta.form, &q_pole, 1e-3 * curve.scale(), 256);
    let res_defect = (rp - 1.0).norm().max((rq + 1.0).norm());
    // a-period of the normalized differential around a full cut circle.
    let a_defect = {
        use crate::hyperelliptic::integrate_legs_pub;
        let c = &curve.cuts()[1];
        let r = 1.3 * c.half.norm();
        let n = 64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut sign = 1.0;
        let mut prev = c.mid + r;
        for k in 1..=n {
            let ang = 2.0 * PI * k as f64 / n as f64;
            let target = c.mid + r * Complex64::new(ang.cos(), ang.sin());
            let (vals, end_sign) =
                integrate_legs_pub(&curve, prev, target, sign, 1, 1e-10, &mut |xi, w, out| {
                    out[0] = eta.form.value_full(xi, w);
                })
                .unwrap();
            acc += vals[0];
            sign = end_sign;
            prev = target;
        }
        acc.norm()
    };
    let divisor = Divisor::of_points(&[CurvePoint::plus(Complex64::new(0.45, 0.65))]);
    let psi = crate::builders::function_with_poles(
        &curve,
        &pd,
        &divisor,
        &eta,
        Complex64::new(1.0, 0.0),
        &tol,
    )
    .unwrap();
    let probe = CurvePoint::plus(Complex64::new(2.0, 1.5));
    let base = psi.evaluate(&probe).unwrap();
    let mut worst_sv: f64 = 0.0;
    for lp in cycle_loops(&curve, &mut rng).into_iter().take(10) {
        let v = psi.evaluate_with_detour(&probe, &lp).unwrap();
        worst_sv = worst_sv.max(v.rel_distance(&base));
    }
    report(
        11,
        "third-kind differentials and pole functions",
        start,
        worst_sv <= 1e-8 && res_defect <= 1e-6 && a_defect <= 1e-8,
        format!(
            "single-valuedness {worst_sv:.3e}; residue defect {res_defect:.3e}; a-period {a_defect:.3e}"
        ),
    )
}

/// Criterion 12: Baker-Akhiezer functions.
fn criterion_12(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 12);
    let curve = g1_builder_curve();
    let tol = Tolerance::default();
    let pd = period_matrix(&curve, &tol).unwrap();
    let q_pt = CurvePoint::plus(Complex64::new(-0.2, -1.0));
    let data = BAData {
        divisor: Divisor::of_points(&[CurvePoint::plus(Complex64::new(0.45, 0.65))]),
        singular_point: q_pt,
        principal: vec![Complex64::new(0.1, 0.04), Complex64::new(0.005, -0.003)],
    };
    let sk = second_kind(&curve, &pd, &q_pt, &data.principal, &tol).unwrap();
    let psi = baker_akhiezer(&curve, &pd, &data, &sk, &tol).unwrap();
    let probe = CurvePoint::plus(Complex64::new(2.0, 1.5));
    let base = psi.evaluate(&probe).unwrap();
    let mut worst_sv: f64 = 0.0;
    for lp in cycle_loops(&curve, &mut rng).into_iter().take(10) {
        let v = psi.evaluate_with_detour(&probe, &lp).unwrap();
        worst_sv = worst_sv.max(v.rel_distance(&base));
    }
    let mut maxima = Vec::new();
    for radius in [1e-2, 1e-3] {
        let mut m = f64::NEG_INFINITY;
        for k in 0..12 {
            let ang = 2.0 * PI * k as f64 / 12.0;
            let xi = q_pt.xi + radius * Complex64::new(ang.cos(), ang.sin());
            let v = psi
                .evaluate_regularized(&CurvePoint::new(xi, q_pt.sheet))
                .unwrap();
            m = m.max(v.log_abs());
        }
        maxima.push(m);
    }
    let growth = (maxima[0] - maxima[1]).abs().exp();
    let tol2 = Tolerance::with_eps(1e-12);
    let sk2 = second_kind(&curve, &pd, &q_pt, &data.principal, &tol2).unwrap();
    let psi2 = baker_akhiezer(&curve, &pd, &data, &sk2, &tol2).unwrap();
    let warm_loop = cycle_loops(&curve, &mut rng)[0].clone();
    psi2.evaluate_with_detour(&probe, &warm_loop).unwrap();
    let mut ratios = Vec::new();
    for k in 0..20 {
        let ang = 2.0 * PI * k as f64 / 20.0;
        let xi = Complex64::new(0.3, 0.2) + 2.2 * Complex64::new(ang.cos(), ang.sin());
        let p = CurvePoint::new(xi, if k % 2 == 0 { Sheet::Plus } else { Sheet::Minus });
        let v1 = psi.evaluate(&p).unwrap();
        let v2 = psi2.evaluate(&p).unwrap();
        ratios.push(v1.div(&v2).to_complex());
    }
    let mean: Complex64 = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let spread = (ratios.iter().map(|r| (r - mean).norm_sqr()).sum::<f64>()
        / ratios.len() as f64)
        .sqrt()
        / mean.norm();
    report(
        12,
        "Baker-Akhiezer functions",
        start,
        worst_sv <= 1e-8 && growth < 10.0 && spread <= 1e-6,
        format!(
            "single-valuedness {worst_sv:.3e}; shrinking-circle factor {growth:.2}; construction spread {spread:.3e}"
        ),
    )
}

/// Criterion 13: Landau-Lifshitz unit-norm identity.
fn criterion_13(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 13);
    let tol = Tolerance::default();
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let g = trial % 2 + 1;
        let b = random_riemann_matrix(&mut rng, g);
        let r: Vec<Complex64> = random_z(&mut rng, g);
        let d: Vec<Complex64> = r
            .iter()
            .map(|rj| Complex64::new(rng.gen_range(-0.5..0.5), -0.5 * rj.im))
            .collect();
        let ld = LLData::new(
            b,
            random_z(&mut rng, g),
            random_z(&mut rng, g),
            d,
            random_z(&mut rng, g),
            r,
        )
        .unwrap();
        let x = rng.gen_range(-2.0..2.0);
        let t = rng.gen_range(-2.0..2.0);
        match landau_lifshitz_eval(x, t, &ld, &tol) {
            Ok((s1, s2, s3)) => {
                worst = worst.max((s1 * s1 + s2 * s2 + s3 * s3 - 1.0).norm());
            }
            Err(crate::finite_gap::FiniteGapError::DenominatorVanishes) => {}
            Err(e) => panic!("unexpected Landau-Lifshitz failure: {e}"),
        }
    }
    report(
        13,
        "Landau-Lifshitz unit norm",
        start,
        worst <= 1e-10,
        format!("max |S1^2+S2^2+S3^2 - 1| = {worst:.3e}"),
    )
}

/// Criterion 14: sine-Gordon wave-vector fit.
fn criterion_14(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 14);
    let b = validate_riemann_matrix(&[vec![Complex64::new(0.0, 1.0)]]).unwrap();
    let tol = Tolerance::default();
    let grid = Grid::linspace(-1.0, 1.0, 20, -1.0, 1.0, 20);
    let initial = WaveData::new(
        b.clone(),
        vec![Complex64::new(0.3, 0.0)],
        vec![Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.1, 0.1)],
        Characteristic::new(vec![0.5], vec![0.0]),
        0.0,
        0,
    )
    .unwrap();
    let out = fit_wave_vectors(&b, &initial, &grid, 100_000, &tol).unwrap();
    let control_wave = WaveData::new(
        b.clone(),
        vec![Complex64::new(
            rng.gen_range(0.5..1.0),
            rng.gen_range(0.1..0.4),
        )],
        vec![Complex64::new(
            rng.gen_range(-0.6..-0.2),
            rng.gen_range(0.1..0.3),
        )],
        vec![Complex64::new(0.1, 0.05)],
        Characteristic::new(vec![0.5], vec![0.0]),
        0.8,
        0,
    )
    .unwrap();
    let control = sine_gordon_residual(&control_wave, &grid, None, &tol).unwrap();
    report(
        14,
        "sine-Gordon wave-vector fit",
        start,
        out.success && out.residual <= 1e-4 && out.evaluations <= 100_000 && control > 1e-2,
        format!(
            "fit residual {:.3e} in {} evaluations (U = {:.4}{:+.4}i, V = {:.4}{:+.4}i); control residual {control:.3e}",
            out.residual,
            out.evaluations,
            out.wave.u[0].re,
            out.wave.u[0].im,
            out.wave.v[0].re,
            out.wave.v[0].im
        ),
    )
}

/// Criterion 15: Kirchhoff conservation and the violation control.
fn criterion_15(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 15);
    let s0 = RigidState::new(
        [
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
        ],
        [
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
        ],
    );
    let clebsch = ClebschParams::new([6.0, 3.0, 2.0], [1.0, 2.0, 3.0]).unwrap();
    let traj_c = integrate(&s0, &clebsch, 10.0, 1e-3, Method::Rk4).unwrap();
    let steklov = SteklovParams::new(1.0, 0.0, 0.0, [1.0, 2.0, 3.0]);
    let traj_s = integrate(&s0, &steklov, 10.0, 1e-3, Method::Rk4).unwrap();
    let max_drift = traj_c
        .drifts
        .iter()
        .chain(traj_s.drifts.iter())
        .fold(0.0f64, |m, d| m.max(*d));
    let perturbed = ClebschParams::new_unchecked([6.06, 3.0, 2.0], [1.0, 2.0, 3.0]).unwrap();
    let traj_p = integrate(&s0, &perturbed, 10.0, 1e-3, Method::Rk4).unwrap();
    let casimir_ok = traj_p.drifts[1] <= 1e-8 && traj_p.drifts[2] <= 1e-8;
    report(
        15,
        "Kirchhoff conservation",
        start,
        max_drift <= 1e-8 && casimir_ok && traj_p.drifts[3] >= 1e-3,
        format!(
            "max drift {max_drift:.3e}; control H4 drift {:.3e} with Casimir drifts {:.1e}/{:.1e}",
            traj_p.drifts[3], traj_p.drifts[1], traj_p.drifts[2]
        ),
    )
}

/// Criterion 16: Clebsch spectral reduction and the linearized s-flow.
fn criterion_16(cfg: &SelftestConfig) -> CriterionReport {
    let start = Instant::now();
    let _ = cfg;
    let spec = clebsch_spectrum((1.0, 2.0, 3.0, 0.1), [1.0, 2.0, 3.0]).unwrap();
    let mut worst_root: f64 = 0.0;
    for z in spec.z_roots {
        let g = z * z - z * 6.0 + 2.0 * z - 3.0;
        let root = ((z - 1.0) * (z - 2.0) * (z - 3.0)).sqrt();
        let term = 2.0 * 0.1 * root;
        worst_root =
            worst_root.max((g + term).norm().min((g - term).norm()) / g.norm().max(1.0));
    }
    let s0 = (Complex64::new(0.4, 0.2), Complex64::new(1.9, -0.3));
    let traj = s_flow(&spec, 0.7, 0.3, s0, 0.5, 2e-4).unwrap();
    let rates = linearization_rates(&traj, &spec, 0.7, 0.3);
    let mut worst_u1: f64 = 0.0;
    let mut worst_u2: f64 = 0.0;
    for (u1, u2) in &rates {
        worst_u1 = worst_u1.max(u1.norm());
        worst_u2 = worst_u2.max((u2 + 1.0).norm());
    }
    let end = (*traj.s1.last().unwrap(), *traj.s2.last().unwrap());
    let back = s_flow(&spec, 0.7, 0.3, end, -0.5, 2e-4).unwrap();
    let round = (back.s1.last().unwrap() - s0.0)
        .norm()
        .max((back.s2.last().unwrap() - s0.1).norm());
    // Genus-2 bridge: the five P5 roots plus a far regulator point give
    // a valid genus-2 period matrix.  The roots of this spectrum line up
    // along the imaginary axis, which degenerates the sorted-strip cut
    // construction, so the curve is handed over in a generic affine
    // coordinate (a fixed rotation; the normalized period matrix is
    // coordinate-invariant).
    let mut pts: Vec<Complex64> = spec.p5_roots().to_vec();
    let far = 10.0 * pts.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    pts.push(Complex64::new(far, 0.0));
    let spin = Complex64::new(0.0, 0.7).exp();
    for p in pts.iter_mut() {
        *p *= spin;
    }
    let bridge_ok = build_curve(&pts)
        .ok()
        .and_then(|c| period_matrix(&c, &Tolerance::default()).ok())
        .is_some();
    report(
        16,
        "Clebsch spectral reduction and s-flow",
        start,
        worst_root <= 1e-8 && worst_u1 <= 1e-6 && worst_u2 <= 1e-6 && round <= 1e-7 && bridge_ok,
        format!(
            "root residual {worst_root:.3e}; u1 rate {worst_u1:.3e}; u2 rate {worst_u2:.3e}; round trip {round:.3e}; genus-2 bridge {bridge_ok}"
        ),
    )
}

/// Run one criterion by number (1..=16).
pub fn run_criterion(id: usize, cfg: &SelftestConfig) -> CriterionReport {
    match id {
        1 => criterion_1(cfg),
        2 => criterion_2(cfg),
        3 => criterion_3(cfg),
        4 => criterion_4(cfg),
        5 => criterion_5(cfg),
        6 => criterion_6(cfg),
        7 => criterion_7(cfg),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        10 => criterion_10(cfg),
        11 => criterion_11(cfg),
        12 => criterion_12(cfg),
        13 => criterion_13(cfg),
        14 => criterion_14(cfg),
        15 => criterion_15(cfg),
        16 => criterion_16(cfg),
        _ => panic!("criterion id must be 1..=16"),
    }
}

/// Run the whole suite in order.
pub fn run_all(cfg: &SelftestConfig) -> Vec<CriterionReport> {
    (1..=16).map(|id| run_criterion(id, cfg)).collect()
}
