//! Leg-based contour integration on the two-sheeted cover.
//!
//! Every integral is a sum of legs.  A leg is either a straight segment
//! (with square-root substitutions absorbing branch-point endpoints) or
//! an on-cut Gauss-Chebyshev pass used by the a-periods, where the cut's
//! own square-root factor cancels against the cos-substitution exactly.
//!
//! Along a leg the integrand is analytic as long as the leg avoids
//! branch points: crossing a cut interior only swaps the sheet, and the
//! continued w stays smooth.  The walker tracks the sign of w relative
//! to the principal branch and flips it whenever the principal value
//! jumps between consecutive nodes.

use num_complex::Complex64;

use super::{CurveError, HyperellipticCurve};
use crate::numeric::{gauss_legendre, KahanSum};

pub(crate) enum Leg {
    /// Collapsed loop around a cut: integrates h(xi)/w over the cut with
    /// w = side * i * half * sin(t) * w_rest, t in (0, pi).  The side is
    /// pinned to the principal boundary value on the left normal of the
    /// cut, so orientation is deterministic across cycles.
    OnCut { cut: usize },
    /// Straight segment from -> to; endpoints may be branch points.
    Segment { from: Complex64, to: Complex64 },
}

type Integrand<'a> = dyn FnMut(Complex64, Complex64, &mut [Complex64]) + 'a;

/// Integrate `dims` integrands along consecutive legs, threading the
/// sheet sign through.  Node counts double per leg until the result is
/// Cauchy-stable to `eps` and the end sign is reproducible.
pub(crate) fn integrate_legs(
    curve: &HyperellipticCurve,
    legs: &[Leg],
    start_sign: f64,
    dims: usize,
    eps: f64,
    f: &mut Integrand,
) -> Result<(Vec<Complex64>, f64), CurveError> {
    let mut total = vec![Complex64::new(0.0, 0.0); dims];
    let mut sign = start_sign;
    for leg in legs {
        let (vals, end_sign) = integrate_one_leg(curve, leg, sign, dims, eps, f)?;
        for (t, v) in total.iter_mut().zip(&vals) {
            *t += v;
        }
        sign = end_sign;
    }
    Ok((total, sign))
}

fn integrate_one_leg(
    curve: &HyperellipticCurve,
    leg: &Leg,
    start_sign: f64,
    dims: usize,
    eps: f64,
    f: &mut Integrand,
) -> Result<(Vec<Complex64>, f64), CurveError> {
    // Below ~5e-12 relative the Cauchy difference is dominated by the
    // roundoff of the node sums themselves and only grows with n.
    let eps = eps.max(5e-12);
    let mut n = 16usize;
    let max_nodes = 1 << 14;
    let (mut prev, mut prev_sign) = leg_pass(curve, leg, start_sign, dims, n, f);
    loop {
        n *= 2;
        if n > max_nodes {
            if std::env::var_os("THETAKIT_DEBUG_QUAD").is_some() {
                match leg {
                    Leg::OnCut { cut } => eprintln!("stall: on-cut leg {cut}"),
                    Leg::Segment { from, to } => {
                        eprintln!(
                            "stall: segment {from} -> {to}, last vals {prev:?}, sign {prev_sign}"
                        )
                    }
                }
            }
            return Err(CurveError::QuadratureStall);
        }
        let (cur, cur_sign) = leg_pass(curve, leg, start_sign, dims, n, f);
        let vmax = cur.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let dmax = cur
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        if std::env::var_os("THETAKIT_DEBUG_QUAD").is_some() {
            eprintln!(
                "  leg n={n}: dmax={dmax:.3e} vmax={vmax:.3e} eps={eps:.3e} signs {prev_sign}/{cur_sign}"
            );
        }
        if cur_sign == prev_sign && dmax <= eps * (vmax + 1.0) {
            return Ok((cur, cur_sign));
        }
        prev = cur;
        prev_sign = cur_sign;
    }
}

fn leg_pass(
    curve: &HyperellipticCurve,
    leg: &Leg,
    start_sign: f64,
    dims: usize,
    n: usize,
    f: &mut Integrand,
) -> (Vec<Complex64>, f64) {
    match leg {
        Leg::OnCut { cut } => on_cut_pass(curve, *cut, dims, n, f, start_sign),
        Leg::Segment { from, to } => segment_pass(curve, *from, *to, start_sign, dims, n, f),
    }
}

/// Sign choice tying the synthetic on-cut value i * half * sin(t) * rest
/// to the principal boundary value on the left-normal side of the cut.
fn cut_side_sign(curve: &HyperellipticCurve, cut: usize) -> f64 {
    let c = &curve.cuts()[cut];
    let normal = Complex64::new(0.0, 1.0) * c.half / c.half.norm();
    let probe = c.mid + normal * (1e-6 * curve.scale());
    let wp = curve.w_principal(probe);
    let synth = Complex64::new(0.0, 1.0) * c.half * curve.w_rest(cut, probe);
    if (wp - synth).norm() <= (wp + synth).norm() {
        1.0
    } else {
        -1.0
    }
}

fn on_cut_pass(
    curve: &HyperellipticCurve,
    cut: usize,
    dims: usize,
    n: usize,
    f: &mut Integrand,
    start_sign: f64,
) -> (Vec<Complex64>, f64) {
    let c = &curve.cuts()[cut];
    let side = cut_side_sign(curve, cut);
    let mut sums = vec![KahanSum::new(); dims];
    let mut out = vec![Complex64::new(0.0, 0.0); dims];
    let weight = std::f64::consts::PI / n as f64;
    for j in 0..n {
        let t = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
        let xi = c.mid + c.half * t.cos();
        let w = Complex64::new(0.0, side) * c.half * t.sin() * curve.w_rest(cut, xi);
        let jac = -c.half * t.sin() * weight;
        f(xi, w, &mut out);
        for (s, v) in sums.iter_mut().zip(&out) {
            s.add(v * jac);
        }
    }
    (sums.iter().map(|s| s.value()).collect(), start_sign)
}

fn segment_pass(
    curve: &HyperellipticCurve,
    from: Complex64,
    to: Complex64,
    start_sign: f64,
    dims: usize,
    n: usize,
    f: &mut Integrand,
) -> (Vec<Complex64>, f64) {
    let from_branch = curve.is_branch_point(from);
    let to_branch = curve.is_branch_point(to);
    let d = to - from;
    let mut sums = vec![KahanSum::new(); dims];
    let mut out = vec![Complex64::new(0.0, 0.0); dims];

    let mut sign = start_sign;
    let mut w_prev: Option<Complex64> = None;

    let mut visit = |xi: Complex64,
                     jac: Complex64,
                     sums: &mut Vec<KahanSum>,
                     sign: &mut f64,
                     w_prev: &mut Option<Complex64>,
                     out: &mut Vec<Complex64>| {
        let wp = curve.w_principal(xi);
        if let Some(prev) = *w_prev {
            let keep = *sign * wp;
            if (keep - prev).norm() > (keep + prev).norm() {
                *sign = -*sign;
            }
        }
        let w = *sign * wp;
        *w_prev = Some(w);
        f(xi, w, out);
        for (s, v) in sums.iter_mut().zip(out.iter()) {
            s.add(v * jac);
        }
    };

    if from_branch && to_branch {
        // Chebyshev substitution xi = mid + half cos t, midpoint rule.
        let mid = 0.5 * (from + to);
        let half = 0.5 * (to - from);
        let weight = std::f64::consts::PI / n as f64;
        // Walk t from pi to 0 so the geometric order runs from -> to.
        for j in 0..n {
            let t = std::f64::consts::PI * (1.0 - (j as f64 + 0.5) / n as f64);
            let xi = mid + half * t.cos();
            // dxi = -half sin t dt, and dt runs negative: net +half sin t.
            let jac = half * t.sin() * weight;
            visit(xi, jac, &mut sums, &mut sign, &mut w_prev, &mut out);
        }
    } else {
        let (nodes, weights) = gauss_legendre(n);
        for (x, wgt) in nodes.iter().zip(&weights) {
            let s = 0.5 * (x + 1.0);
            let half_w = 0.5 * wgt;
            let (xi, jac) = match (from_branch, to_branch) {
                (false, false) => (from + d * s, d * half_w),
                (true, false) => (from + d * (s * s), d * (2.0 * s) * half_w),
                (false, true) => {
                    let q = 1.0 - s;
                    (to - d * (q * q), d * (2.0 * q) * half_w)
                }
                (true, true) => unreachable!(),
            };
            visit(xi, jac, &mut sums, &mut sign, &mut w_prev, &mut out);
        }
    }

    // Carry the sign to the endpoint when it is a regular point.
    if !to_branch {
        if let Some(prev) = w_prev {
            let wp = curve.w_principal(to);
            if (sign * wp - prev).norm() > (sign * wp + prev).norm() {
                sign = -sign;
            }
        }
    }
    (sums.iter().map(|s| s.value()).collect(), sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperelliptic::build_curve;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn segment_integral_of_plain_function_matches_closed_form() {
        // Integrate xi^2 (no w dependence) along a segment; exact value
        // is the antiderivative difference.
        let curve = build_curve(&[
            c64(-2.0, 0.0),
            c64(-1.0, 0.0),
            c64(1.0, 0.0),
            c64(2.0, 0.0),
        ])
        .unwrap();
        let from = c64(0.0, 1.0);
        let to = c64(1.5, 2.0);
        let legs = [Leg::Segment { from, to }];
        let (vals, _) = integrate_legs(&curve, &legs, 1.0, 1, 1e-12, &mut |xi, _w, out| {
            out[0] = xi * xi;
        })
        .unwrap();
        let exact = (to * to * to - from * from * from) / 3.0;
        assert!((vals[0] - exact).norm() < 1e-12);
    }

    #[test]
    fn sheet_sign_flips_when_crossing_a_cut() {
        let curve = build_curve(&[
            c64(-2.0, 0.0),
            c64(-1.0, 0.0),
            c64(1.0, 0.0),
            c64(2.0, 0.0),
        ])
        .unwrap();
        // Vertical segment crossing the right cut [1, 2].
        let legs = [Leg::Segment {
            from: c64(1.5, 1.0),
            to: c64(1.5, -1.0),
        }];
        let (_, end_sign) = integrate_legs(&curve, &legs, 1.0, 1, 1e-10, &mut |_xi, w, out| {
            out[0] = Complex64::new(1.0, 0.0) / w;
        })
        .unwrap();
        assert_eq!(end_sign, -1.0);
        // A segment through the gap keeps the sheet.
        let legs = [Leg::Segment {
            from: c64(0.0, 1.0),
            to: c64(0.0, -1.0),
        }];
        let (_, end_sign) = integrate_legs(&curve, &legs, 1.0, 1, 1e-10, &mut |_xi, w, out| {
            out[0] = Complex64::new(1.0, 0.0) / w;
        })
        .unwrap();
        assert_eq!(end_sign, 1.0);
    }

    #[test]
    fn closed_loop_around_no_cut_integrates_to_zero() {
        let curve = build_curve(&[
            c64(-2.0, 0.0),
            c64(-1.0, 0.0),
            c64(1.0, 0.0),
            c64(2.0, 0.0),
        ])
        .unwrap();
        // Square loop in the upper half plane away from both cuts.
        let a = c64(-0.5, 0.5);
        let b = c64(0.5, 0.5);
        let c = c64(0.5, 1.5);
        let d = c64(-0.5, 1.5);
        let legs = [
            Leg::Segment { from: a, to: b },
            Leg::Segment { from: b, to: c },
            Leg::Segment { from: c, to: d },
            Leg::Segment { from: d, to: a },
        ];
        let (vals, end_sign) =
            integrate_legs(&curve, &legs, 1.0, 1, 1e-12, &mut |_xi, w, out| {
                out[0] = Complex64::new(1.0, 0.0) / w;
            })
            .unwrap();
        assert_eq!(end_sign, 1.0);
        assert!(vals[0].norm() < 1e-11, "loop integral {}", vals[0]);
    }
}
