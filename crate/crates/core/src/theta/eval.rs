//! Theta series evaluation with argument reduction and derivatives.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{Characteristic, RiemannMatrix, ThetaError, Tolerance};
use crate::numeric::KahanSum;
use crate::scaled::ScaledComplex;

const TWO_PI: f64 = 2.0 * PI;

/// theta(z|B) as a scaled complex value.
pub fn theta(
    z: &[Complex64],
    b: &RiemannMatrix,
    tol: &Tolerance,
) -> Result<ScaledComplex, ThetaError> {
    let g = b.genus();
    Ok(theta_with_derivatives(z, b, None, &[vec![0u32; g]], tol)?.remove(0))
}

/// theta with characteristics, via the shift identity
/// `exp(pi i <B a, a> + 2 pi i <z+b, a>) theta(z + b + B a)` after the
/// characteristic is reduced to [0,1)^g.
pub fn theta_char(
    chr: &Characteristic,
    z: &[Complex64],
    b: &RiemannMatrix,
    tol: &Tolerance,
) -> Result<ScaledComplex, ThetaError> {
    let g = b.genus();
    Ok(theta_with_derivatives(z, b, Some(chr), &[vec![0u32; g]], tol)?.remove(0))
}

/// Partial derivative of theta[chr] for a multi-index of total order <= 3.
pub fn theta_derivative(
    multi_index: &[u32],
    chr: &Characteristic,
    z: &[Complex64],
    b: &RiemannMatrix,
    tol: &Tolerance,
) -> Result<ScaledComplex, ThetaError> {
    let order: u32 = multi_index.iter().sum();
    if order > 3 {
        return Err(ThetaError::OrderTooHigh { order });
    }
    Ok(theta_with_derivatives(z, b, Some(chr), &[multi_index.to_vec()], tol)?.remove(0))
}

/// Value and all first partials of theta (no characteristic) in one
/// lattice pass.
pub fn theta_gradient(
    z: &[Complex64],
    b: &RiemannMatrix,
    tol: &Tolerance,
) -> Result<(ScaledComplex, Vec<ScaledComplex>), ThetaError> {
    let g = b.genus();
    let mut orders = vec![vec![0u32; g]];
    for j in 0..g {
        let mut e = vec![0u32; g];
        e[j] = 1;
        orders.push(e);
    }
    let mut vals = theta_with_derivatives(z, b, None, &orders, tol)?;
    let value = vals.remove(0);
    Ok((value, vals))
}

/// Relative magnitude of theta(z|B): |theta(z)| divided by its natural
/// scale (the reduction prefactor times the Gaussian term envelope).
/// Near a zero of theta this tends to zero; generically it is O(1).
pub fn theta_magnitude(
    z: &[Complex64],
    b: &RiemannMatrix,
    tol: &Tolerance,
) -> Result<f64, ThetaError> {
    let g = b.genus();
    let (vals, ln_scale) = theta_with_derivatives_scaled(z, b, None, &[vec![0u32; g]], tol)?;
    Ok((vals[0].log_abs() - ln_scale).exp())
}

/// Core evaluator: theta[chr](z|B) and the requested z-derivatives.
///
/// The value is factored as `exp(E(z)) * theta(y0)` with E affine in z
/// (characteristic shift plus argument reduction), so a derivative of
/// order k expands over the down-set of k by the product rule.
pub fn theta_with_derivatives(
    z: &[Complex64],
    b: &RiemannMatrix,
    chr: Option<&Characteristic>,
    orders: &[Vec<u32>],
    tol: &Tolerance,
) -> Result<Vec<ScaledComplex>, ThetaError> {
    Ok(theta_with_derivatives_scaled(z, b, chr, orders, tol)?.0)
}

/// As [`theta_with_derivatives`], also returning the natural log-scale
/// of the evaluation: Re of the affine prefactor exponent plus the log
/// of the Gaussian envelope bounding the largest reduced-series term.
/// `value.log_abs() - ln_scale` is a scale-free log-residual.
pub fn theta_with_derivatives_scaled(
    z: &[Complex64],
    b: &RiemannMatrix,
    chr: Option<&Characteristic>,
    orders: &[Vec<u32>],
    tol: &Tolerance,
) -> Result<(Vec<ScaledComplex>, f64), ThetaError> {
    let g = b.genus();
    if z.len() != g || orders.iter().any(|o| o.len() != g) {
        return Err(ThetaError::BadShape);
    }
    if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(ThetaError::NonFiniteEntries);
    }
    for o in orders {
        let total: u32 = o.iter().sum();
        if total > 3 {
            return Err(ThetaError::OrderTooHigh { order: total });
        }
    }

    // Affine exponent E(z) = e_const + <e_grad, z> and shifted argument y.
    let mut e_const = Complex64::new(0.0, 0.0);
    let mut e_grad = vec![Complex64::new(0.0, 0.0); g];
    let mut y = z.to_vec();
    if let Some(chr) = chr {
        if chr.genus() != g {
            return Err(ThetaError::BadShape);
        }
        let (red, q_dot_alpha) = chr.reduced();
        // Integer reduction of beta contributes exp(2 pi i <q, alpha>).
        e_const += Complex64::new(0.0, TWO_PI * q_dot_alpha);
        let alpha_c: Vec<Complex64> = red.alpha.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        let b_alpha = b.mul_vec(&alpha_c);
        let mut quad = Complex64::new(0.0, 0.0);
        for j in 0..g {
            quad += b_alpha[j] * red.alpha[j];
        }
        e_const += Complex64::new(0.0, PI) * quad;
        for j in 0..g {
            // 2 pi i <z + beta, alpha>
            e_const += Complex64::new(0.0, TWO_PI) * Complex64::new(red.beta[j], 0.0) * red.alpha[j];
            e_const += Complex64::new(0.0, TWO_PI) * z[j] * red.alpha[j];
            e_grad[j] += Complex64::new(0.0, TWO_PI * red.alpha[j]);
            y[j] += Complex64::new(red.beta[j], 0.0) + b_alpha[j];
        }
        // e_const currently includes <z, alpha> evaluated at the actual z;
        // keep it that way and remember the gradient separately.  The
        // gradient is only used for derivative recombination below.
    }

    // Argument reduction y = y0 + n + B m.
    let im_y: Vec<f64> = y.iter().map(|v| v.im).collect();
    let m_star: Vec<i64> = b
        .solve_im(&im_y)
        .iter()
        .map(|&x| x.round() as i64)
        .collect();
    let bm = b.mul_int_vec(&m_star);
    let n_star: Vec<i64> = (0..g).map(|j| (y[j] - bm[j]).re.round() as i64).collect();
    let y0: Vec<Complex64> = (0..g)
        .map(|j| y[j] - bm[j] - Complex64::new(n_star[j] as f64, 0.0))
        .collect();
    // theta(y) = exp(-pi i <Bm,m> - 2 pi i <m, y0>) theta(y0)
    let quad_m = b.quadratic_phase(&m_star); // pi i <Bm, m>
    e_const -= quad_m;
    for j in 0..g {
        e_const -= Complex64::new(0.0, TWO_PI * m_star[j] as f64) * y0[j];
        e_grad[j] -= Complex64::new(0.0, TWO_PI * m_star[j] as f64);
    }

    // Multi-index down-set needed for the product rule.
    let mut max_order = vec![0u32; g];
    for o in orders {
        for j in 0..g {
            max_order[j] = max_order[j].max(o[j]);
        }
    }
    let needed = down_set(&max_order);

    let (sums, envelope) = reduced_sums(b, &y0, &needed, tol)?;

    // Recombine: d^k (e^E h) = e^E sum_{l <= k} prod_j C(k_j,l_j) grad_j^(k_j-l_j) d^l h
    let prefactor = ScaledComplex::from_exponent(e_const);
    let mut out = Vec::with_capacity(orders.len());
    for k in orders {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in down_set(k) {
            let idx = needed.iter().position(|n| *n == l).expect("down-set member");
            let mut coeff = Complex64::new(1.0, 0.0);
            for j in 0..g {
                coeff *= Complex64::new(binom(k[j], l[j]) as f64, 0.0);
                for _ in 0..(k[j] - l[j]) {
                    coeff *= e_grad[j];
                }
            }
            acc += coeff * sums[idx];
        }
        out.push(prefactor.mul_complex(acc));
    }
    Ok((out, e_const.re + envelope.ln()))
}

fn binom(n: u32, k: u32) -> u32 {
    match (n, k) {
        (_, 0) => 1,
        (n, k) if n == k => 1,
        (2, 1) => 2,
        (3, 1) | (3, 2) => 3,
        _ => 1,
    }
}

fn down_set(max: &[u32]) -> Vec<Vec<u32>> {
    let g = max.len();
    let mut out = vec![vec![0u32; g]];
    for j in 0..g {
        let prev = out.clone();
        for v in 1..=max[j] {
            for p in &prev {
                let mut q = p.clone();
                q[j] = v;
                out.push(q);
            }
        }
    }
    out
}

/// Sums S_l = sum_m prod_j (2 pi i m_j)^(l_j) exp(pi i <Bm,m> + 2 pi i <y0, m>)
/// over the truncation ellipsoid, for every multi-index l in `needed`.
fn reduced_sums(
    b: &RiemannMatrix,
    y0: &[Complex64],
    needed: &[Vec<u32>],
    tol: &Tolerance,
) -> Result<(Vec<Complex64>, f64), ThetaError> {
    let g = b.genus();
    let max_total: u32 = needed.iter().map(|l| l.iter().sum::<u32>()).max().unwrap_or(0);

    // Fractional shift in the ellipsoid metric and the Gaussian envelope
    // exp(pi <Y c, c>) bounding the largest term.
    let im_y0: Vec<f64> = y0.iter().map(|v| v.im).collect();
    let c = b.solve_im(&im_y0);
    let mut env_exp = 0.0;
    for j in 0..g {
        env_exp += im_y0[j] * c[j];
    }
    let envelope = (PI * env_exp).exp();

    let mut radius = (((1.0 / tol.eps).ln() + g as f64 * std::f64::consts::LN_2 + 6.0) / PI)
        .sqrt()
        + 0.4 * max_total as f64;

    loop {
        if radius > tol.max_radius {
            return Err(ThetaError::RadiusExceeded {
                needed: radius,
                cap: tol.max_radius,
            });
        }
        let result = sum_over_points(b, y0, &c, needed, radius, envelope, tol.eps);
        match result {
            Some(sums) => return Ok((sums, envelope)),
            None => radius *= 2.0,
        }
    }
}

/// One truncated summation pass.  Returns None when the outermost shell
/// still contributes more than eps relative to max(|sum|, envelope).
fn sum_over_points(
    b: &RiemannMatrix,
    y0: &[Complex64],
    c: &[f64],
    needed: &[Vec<u32>],
    radius: f64,
    envelope: f64,
    eps: f64,
) -> Option<Vec<Complex64>> {
    let g = b.genus();
    let (cached_pts, cached_norms, cached_phases, cache_radius) = b.cached_points();
    let use_cache = radius + b.shift_margin() <= cache_radius;

    let mut sums = vec![KahanSum::new(); needed.len()];
    let mut shell = vec![0.0f64; needed.len()];
    let shell_lo = radius - 1.0;

    let mut local = Vec::new();
    let (points, phases): (&[i64], Option<&[Complex64]>) = if use_cache {
        (cached_pts, Some(cached_phases))
    } else {
        local = b.enumerate_ellipsoid(radius + b.shift_margin(), &vec![0.0; g]);
        (&[], None)
    };

    let npts = if use_cache {
        cached_norms.len()
    } else {
        local.len()
    };

    for idx in 0..npts {
        let (m, phase): (&[i64], Complex64) = if use_cache {
            (
                &points[idx * g..(idx + 1) * g],
                phases.unwrap()[idx],
            )
        } else {
            (&local[idx].1, b.quadratic_phase(&local[idx].1))
        };
        // Shifted ellipsoid norm for the shell bookkeeping.
        let mut shifted = 0.0;
        let l = b.cholesky_im();
        for j in 0..g {
            let mut x = 0.0;
            for k in j..g {
                x += l[k * g + j] * (m[k] as f64 + c[k]);
            }
            shifted += x * x;
        }
        let shifted = shifted.sqrt();
        if shifted > radius {
            continue;
        }
        let mut w = phase;
        for j in 0..g {
            w += Complex64::new(0.0, TWO_PI * m[j] as f64) * y0[j];
        }
        let term = Complex64::new(w.im.cos(), w.im.sin()) * w.re.exp();
        let in_shell = shifted >= shell_lo;
        for (li, l_idx) in needed.iter().enumerate() {
            let mut factor = Complex64::new(1.0, 0.0);
            for j in 0..g {
                for _ in 0..l_idx[j] {
                    factor *= Complex64::new(0.0, TWO_PI * m[j] as f64);
                }
            }
            let t = factor * term;
            sums[li].add(t);
            if in_shell {
                shell[li] += t.norm();
            }
        }
    }

    let values: Vec<Complex64> = sums.iter().map(|s| s.value()).collect();
    for (li, s) in shell.iter().enumerate() {
        if *s > eps * values[li].norm().max(envelope) {
            return None;
        }
    }
    Some(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::validate_riemann_matrix;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn b_i() -> RiemannMatrix {
        validate_riemann_matrix(&[vec![c64(0.0, 1.0)]]).unwrap()
    }

    /// Brute-force oracle: rectangular sum of the defining series of
    /// theta[alpha; beta](z|B) to radius 10 per coordinate.
    fn direct_series(
        chr: &Characteristic,
        z: &[Complex64],
        b: &RiemannMatrix,
    ) -> Complex64 {
        let g = b.genus();
        let radius = 10i64;
        let mut total = KahanSum::new();
        let mut m = vec![-radius; g];
        loop {
            let mv: Vec<Complex64> = (0..g)
                .map(|j| c64(m[j] as f64 + chr.alpha[j], 0.0))
                .collect();
            let bm = b.mul_vec(&mv);
            let mut w = Complex64::new(0.0, 0.0);
            for j in 0..g {
                w += bm[j] * mv[j];
            }
            w *= Complex64::new(0.0, PI);
            for j in 0..g {
                w += Complex64::new(0.0, TWO_PI) * (z[j] + c64(chr.beta[j], 0.0)) * mv[j];
            }
            total.add(w.exp());
            // advance counter
            let mut j = 0;
            loop {
                m[j] += 1;
                if m[j] <= radius {
                    break;
                }
                m[j] = -radius;
                j += 1;
                if j == g {
                    return total.value();
                }
            }
        }
    }

    #[test]
    fn known_value_at_origin() {
        // theta(0|i) = sum exp(-pi m^2) = 1.08643481121331...
        let b = b_i();
        let tol = Tolerance::default();
        let v = theta(&[c64(0.0, 0.0)], &b, &tol).unwrap().to_complex();
        let oracle = direct_series(&Characteristic::zero(1), &[c64(0.0, 0.0)], &b);
        assert!((v - oracle).norm() < 1e-12);
        assert!((v.re - 1.0864348112133080).abs() < 1e-12);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn periodic_in_unit_steps() {
        let b = b_i();
        let tol = Tolerance::default();
        let z1 = [c64(0.3, 0.4)];
        let z2 = [c64(1.3, 0.4)];
        let v1 = theta(&z1, &b, &tol).unwrap();
        let v2 = theta(&z2, &b, &tol).unwrap();
        assert!(v1.rel_distance(&v2) < 1e-12);
    }

    #[test]
    fn zero_at_half_period_sum() {
        // theta((1+b)/2 | b) = 0 for b = i.
        let b = b_i();
        let tol = Tolerance::default();
        let z = [c64(0.5, 0.5)];
        let v = theta(&z, &b, &tol).unwrap();
        let at0 = theta(&[c64(0.0, 0.0)], &b, &tol).unwrap();
        assert!(v.log_abs() - at0.log_abs() < (1e-9f64).ln());
    }

    #[test]
    fn characteristic_matches_direct_series() {
        let b = validate_riemann_matrix(&[
            vec![c64(0.2, 1.1), c64(-0.3, 0.4)],
            vec![c64(-0.3, 0.4), c64(0.1, 0.9)],
        ])
        .unwrap();
        let tol = Tolerance::default();
        let chr = Characteristic::new(vec![0.3, -0.7], vec![1.2, 0.25]);
        let z = [c64(0.21, -0.13), c64(-0.4, 0.33)];
        let fast = theta_char(&chr, &z, &b, &tol).unwrap().to_complex();
        let oracle = direct_series(&chr, &z, &b);
        assert!(
            (fast - oracle).norm() <= 1e-10 * oracle.norm(),
            "shift formula {fast} vs direct series {oracle}"
        );
    }

    #[test]
    fn integer_characteristic_is_plain_theta() {
        let b = b_i();
        let tol = Tolerance::default();
        let z = [c64(0.17, 0.29)];
        let plain = theta(&z, &b, &tol).unwrap();
        let zero_chr = theta_char(&Characteristic::zero(1), &z, &b, &tol).unwrap();
        let int_chr = theta_char(&Characteristic::new(vec![2.0], vec![-3.0]), &z, &b, &tol).unwrap();
        assert!(plain.rel_distance(&zero_chr) < 1e-13);
        assert!(plain.rel_distance(&int_chr) < 1e-11);
    }

    #[test]
    fn odd_half_period_vanishes_at_zero() {
        let b = b_i();
        let tol = Tolerance::default();
        let chr = Characteristic::new(vec![0.5], vec![0.5]);
        let v = theta_char(&chr, &[c64(0.0, 0.0)], &b, &tol).unwrap();
        assert!(v.is_zero() || v.log_abs() < (1e-12f64).ln());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let b = b_i();
        let tol = Tolerance::default();
        let z = [c64(0.23, 0.11)];
        let chr = Characteristic::zero(1);
        let d = theta_derivative(&[1], &chr, &z, &b, &tol).unwrap().to_complex();
        let h = 1e-5;
        let plus = theta(&[z[0] + c64(h, 0.0)], &b, &tol).unwrap().to_complex();
        let minus = theta(&[z[0] - c64(h, 0.0)], &b, &tol).unwrap().to_complex();
        let fd = (plus - minus) / c64(2.0 * h, 0.0);
        assert!((d - fd).norm() < 1e-7 * d.norm().max(1.0));
    }

    #[test]
    fn even_theta_has_zero_gradient_at_origin() {
        let b = b_i();
        let tol = Tolerance::default();
        let chr = Characteristic::zero(1);
        let d = theta_derivative(&[1], &chr, &[c64(0.0, 0.0)], &b, &tol).unwrap();
        assert!(d.is_zero() || d.log_abs() < (1e-12f64).ln());
    }

    #[test]
    fn theta1_derivative_nonzero_at_origin() {
        let b = b_i();
        let tol = Tolerance::default();
        let chr = Characteristic::new(vec![0.5], vec![0.5]);
        let d = theta_derivative(&[1], &chr, &[c64(0.0, 0.0)], &b, &tol).unwrap();
        // Series oracle for the derivative at 0.
        let h = 1e-5;
        let plus = direct_series(&chr, &[c64(h, 0.0)], &b_i());
        let minus = direct_series(&chr, &[c64(-h, 0.0)], &b_i());
        let fd = (plus - minus) / c64(2.0 * h, 0.0);
        let dv = d.to_complex();
        assert!(dv.norm() > 1.0);
        assert!((dv - fd).norm() < 1e-6 * dv.norm());
    }

    #[test]
    fn order_cap_enforced() {
        let b = b_i();
        let tol = Tolerance::default();
        let chr = Characteristic::zero(1);
        let err = theta_derivative(&[4], &chr, &[c64(0.0, 0.0)], &b, &tol).unwrap_err();
        assert!(matches!(err, ThetaError::OrderTooHigh { order: 4 }));
    }

    #[test]
    fn radius_cap_enforced() {
        let b = b_i();
        let tol = Tolerance {
            eps: 1e-10,
            max_radius: 0.5,
        };
        let err = theta(&[c64(0.3, 0.1)], &b, &tol).unwrap_err();
        assert!(matches!(err, ThetaError::RadiusExceeded { .. }));
    }

    #[test]
    fn non_finite_argument_rejected() {
        let b = b_i();
        let tol = Tolerance::default();
        let err = theta(&[c64(f64::NAN, 0.0)], &b, &tol).unwrap_err();
        assert!(matches!(err, ThetaError::NonFiniteEntries));
    }

    #[test]
    fn large_imaginary_argument_overflows_gracefully() {
        let b = b_i();
        let tol = Tolerance::default();
        // exp(pi * 60^2) is far beyond f64 but the scaled value is fine.
        let v = theta(&[c64(0.3, 60.0)], &b, &tol).unwrap();
        assert!(v.log_abs() > 1e4);
        assert!(v.mantissa.norm() >= 0.5 && v.mantissa.norm() <= 2.0);
        // Quasi-periodicity: theta(z + 60 b) = exp(-pi i 3600 b - 2 pi i 60 z) theta(z)
        let z0 = c64(0.3, 0.0);
        let base = theta(&[z0], &b, &tol).unwrap();
        let shifted = theta(&[z0 + c64(0.0, 60.0)], &b, &tol).unwrap();
        let m = 60.0;
        let factor = ScaledComplex::from_exponent(
            -Complex64::new(0.0, PI) * c64(0.0, 1.0) * m * m
                - Complex64::new(0.0, TWO_PI) * m * z0,
        );
        let rhs = factor.mul(&base);
        assert!(shifted.rel_distance(&rhs) < 1e-9);
    }
}
