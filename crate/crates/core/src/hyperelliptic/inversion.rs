//! Numerical Jacobi inversion through the zeros of theta(phi(P) - z - Delta),
//! plus the argument-principle zero count and theta-divisor membership.

use num_complex::Complex64;

use super::abel::SheetWalker;
use super::{
    abel_map, riemann_constants, CurveError, CurvePoint, Divisor, HyperellipticCurve, PeriodData,
};
use crate::theta::{theta, theta_magnitude, theta_with_derivatives_scaled, Tolerance};

/// Zeros of zeta(P) = theta(phi(P) - C) over the curve minus small
/// neighborhoods of the two points at infinity, by the argument
/// principle on the cut plane: the windings W_+/- of the single-valued
/// sheet restrictions along a circle enclosing every branch cut, plus a
/// C-independent monodromy correction kappa accounting for the
/// quasi-periodic gluing across the cuts.  Equals g for generic C.
pub fn zero_count(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    c_vec: &[Complex64],
    tol: &Tolerance,
) -> Result<i64, CurveError> {
    let center = curve
        .branch_points()
        .iter()
        .sum::<Complex64>()
        / curve.branch_points().len() as f64;
    let radius = curve
        .branch_points()
        .iter()
        .map(|&b| (b - center).norm())
        .fold(0.0f64, f64::max)
        * 1.6
        + 2.5 * curve.scale();

    let kappa = monodromy_correction(curve, pd, tol)?;

    let mut nodes = 1024usize;
    loop {
        match winding_pass(curve, pd, c_vec, center, radius, nodes, tol) {
            Ok(wind) => {
                let count = wind + kappa as f64;
                let rounded = count.round();
                if (count - rounded).abs() <= 1e-6 {
                    return Ok(rounded as i64);
                }
                if nodes >= 1 << 13 {
                    return Err(CurveError::NonIntegerCount(count));
                }
            }
            Err(CurveError::NonIntegerCount(_)) if nodes < 1 << 13 => {}
            Err(e) => return Err(e),
        }
        nodes *= 2;
    }
}

/// kappa = sum over cuts of <m_cut, d_cut>, where d_cut is the integer
/// phi-winding of a loop around the cut, and m_cut is the B-component of
/// the lattice vector lambda = phi_through + phi_plus relating the
/// branch continued through the cut to the reflected branch.  These are
/// pure differential walks, no theta evaluations.
fn monodromy_correction(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    tol: &Tolerance,
) -> Result<i64, CurveError> {
    let g = curve.genus();
    let y = curve.top_altitude();
    let base = curve.base_point();
    let eps = tol.eps.max(1e-11);
    let mut kappa = 0i64;

    for (ci, cut) in curve.cuts().iter().enumerate() {
        // Circle radius between the cut and its nearest outside neighbor.
        let r_in = cut.half.norm();
        let mut r_out = f64::INFINITY;
        for &b in curve.branch_points() {
            if (b - cut.start).norm() > 1e-12 * curve.scale()
                && (b - cut.end).norm() > 1e-12 * curve.scale()
            {
                r_out = r_out.min((b - cut.mid).norm());
            }
        }
        let rho = if r_out > 1.4 * r_in {
            (r_in * r_out).sqrt()
        } else {
            1.05 * r_in
        };
        let normal = Complex64::new(0.0, 1.0) * cut.half / cut.half.norm();
        let s_top = cut.mid + Complex64::new(0.0, rho);
        let p_above = cut.mid + normal * (0.05 * r_in);
        let p_below = cut.mid - normal * (0.05 * r_in);

        // Shared cut-free approach from the base point.
        let mut approach = SheetWalker::start(curve, pd, CurvePoint::plus(base));
        let mut phi0 = vec![Complex64::new(0.0, 0.0); g];
        let extend = |w: &mut SheetWalker,
                          phi: &mut Vec<Complex64>,
                          to: Complex64|
         -> Result<(), CurveError> {
            let v = w.walk_to(to, eps)?;
            for (a, b) in phi.iter_mut().zip(&v) {
                *a += b;
            }
            Ok(())
        };
        extend(&mut approach, &mut phi0, Complex64::new(base.re, y))?;
        extend(&mut approach, &mut phi0, Complex64::new(cut.mid.re, y))?;
        extend(&mut approach, &mut phi0, s_top)?;

        // d: phi winding of the CCW circle around the cut.
        let mut loop_walker = approach.fork();
        let mut d = vec![Complex64::new(0.0, 0.0); g];
        let segs = 24usize;
        for k in 1..=segs {
            let ang = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / segs as f64;
            let target = cut.mid + rho * Complex64::new(ang.cos(), ang.sin());
            extend(&mut loop_walker, &mut d, target)?;
        }
        let d_int: Vec<i64> = d.iter().map(|v| v.re.round() as i64).collect();
        let d_err = d
            .iter()
            .zip(&d_int)
            .map(|(v, &n)| (v - Complex64::new(n as f64, 0.0)).norm())
            .fold(0.0f64, f64::max);
        if d_err > 1e-6 {
            return Err(CurveError::NonIntegerCount(d_err));
        }

        // phi_plus at p_above, reached without crossing the cut.
        let mut wa = approach.fork();
        let mut phi_a = phi0.clone();
        extend(&mut wa, &mut phi_a, p_above)?;

        // phi continued through the cut to the same point: approach the
        // below side around the circle, then hop across.
        let mut wb = approach.fork();
        let mut phi_b = phi0.clone();
        let s_bot = cut.mid - Complex64::new(0.0, rho);
        for k in 1..=(segs / 2) {
            let ang = std::f64::consts::FRAC_PI_2
                + 2.0 * std::f64::consts::PI * k as f64 / segs as f64;
            let target = cut.mid + rho * Complex64::new(ang.cos(), ang.sin());
            extend(&mut wb, &mut phi_b, target)?;
        }
        extend(&mut wb, &mut phi_b, s_bot)?;
        extend(&mut wb, &mut phi_b, p_below)?;
        extend(&mut wb, &mut phi_b, p_above)?;
        let _ = ci;

        // lambda = phi_through + phi_plus must be a lattice vector.
        let lambda: Vec<Complex64> = phi_a.iter().zip(&phi_b).map(|(a, b)| a + b).collect();
        let (_, m_vec, res) = pd.riemann_matrix().lattice_reduce(&lambda);
        let res_norm = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if res_norm > 1e-6 {
            return Err(CurveError::VerificationFailed(res_norm));
        }
        for j in 0..g {
            kappa += m_vec[j] * d_int[j];
        }
    }
    Ok(kappa)
}

fn winding_pass(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    c_vec: &[Complex64],
    center: Complex64,
    radius: f64,
    nodes: usize,
    tol: &Tolerance,
) -> Result<f64, CurveError> {
    let g = curve.genus();
    let base = curve.base_point();
    let y = curve.top_altitude();
    let circle_start = center + Complex64::new(radius, 0.0);

    let mut walker = SheetWalker::start(curve, pd, CurvePoint::plus(base));
    let mut phi = vec![Complex64::new(0.0, 0.0); g];
    let extend = |w: &mut SheetWalker, phi: &mut Vec<Complex64>, to: Complex64| -> Result<(), CurveError> {
        let v = w.walk_to(to, tol.eps)?;
        for (a, b) in phi.iter_mut().zip(&v) {
            *a += b;
        }
        Ok(())
    };
    extend(&mut walker, &mut phi, Complex64::new(base.re, y))?;
    extend(&mut walker, &mut phi, Complex64::new(circle_start.re, y))?;
    extend(&mut walker, &mut phi, circle_start)?;

    let eval = |phi: &[Complex64], sign: f64| -> Result<crate::ScaledComplex, CurveError> {
        let u: Vec<Complex64> = (0..g).map(|j| sign * phi[j] - c_vec[j]).collect();
        Ok(theta(&u, pd.riemann_matrix(), tol)?)
    };

    let mut prev_plus = eval(&phi, 1.0)?;
    let mut prev_minus = eval(&phi, -1.0)?;
    let first_plus = prev_plus;
    let first_minus = prev_minus;
    let mut arg_plus = 0.0;
    let mut arg_minus = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut max_step: f64 = 0.0;

    for k in 1..=nodes {
        let ang = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
        let target = center + radius * Complex64::new(ang.cos(), ang.sin());
        extend(&mut walker, &mut phi, target)?;
        let vp = if k < nodes { eval(&phi, 1.0)? } else { first_plus };
        let vm = if k < nodes { eval(&phi, -1.0)? } else { first_minus };
        // At the wrap the continued phi differs from the start by a
        // lattice vector in Z^g only (the big circle bounds), so theta
        // matches and we reuse the first values to close exactly.
        let dp = (vp.mantissa * prev_plus.mantissa.conj()).arg();
        let dm = (vm.mantissa * prev_minus.mantissa.conj()).arg();
        arg_plus += dp;
        arg_minus += dm;
        max_step = max_step.max(dp.abs()).max(dm.abs());
        if k % 64 == 0 {
            let g = curve.genus();
            let u: Vec<Complex64> = (0..g).map(|j| phi[j] - c_vec[j]).collect();
            max_rel = max_rel.max(theta_magnitude(&u, pd.riemann_matrix(), tol)?);
        }
        prev_plus = vp;
        prev_minus = vm;
    }

    if max_rel < 1e-10 {
        return Err(CurveError::IdenticallyZero);
    }
    let wind = (arg_plus + arg_minus) / (2.0 * std::f64::consts::PI);
    if max_step > 2.5 {
        return Err(CurveError::NonIntegerCount(wind));
    }
    Ok(wind)
}

struct MeshSite {
    xi: Complex64,
    sign: f64,
    phi: Vec<Complex64>,
    value_plus: f64,
    value_minus: f64,
}

/// Solve phi(D) = z for a degree-g divisor D on a genus-1 or genus-2
/// curve: mesh scan of |theta(phi(P) - z - Delta)| over both sheets,
/// then complex Newton refinement in xi on the located minima.
pub fn jacobi_inversion(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    z: &[Complex64],
    tol: &Tolerance,
) -> Result<Divisor, CurveError> {
    let g = curve.genus();
    if g > 2 {
        return Err(CurveError::UnsupportedGenus(g));
    }
    let delta = riemann_constants(curve, pd).delta;
    let c_arg: Vec<Complex64> = (0..g).map(|j| z[j] + delta[j]).collect();

    let n = 64usize;
    let center = curve
        .branch_points()
        .iter()
        .sum::<Complex64>()
        / curve.branch_points().len() as f64;
    let mut half_w: f64 = 0.0;
    let mut half_h: f64 = 0.0;
    for &b in curve.branch_points() {
        half_w = half_w.max((b - center).re.abs());
        half_h = half_h.max((b - center).im.abs());
    }
    let pad = 0.25 * curve.scale();
    half_w = 1.5 * half_w + pad;
    half_h = 1.5 * half_h + pad;
    // Slight offset so no mesh segment runs straight through a branch point.
    let origin = center + Complex64::new(-half_w + 0.37e-3 * curve.scale(), -half_h
        + 0.61e-3 * curve.scale());
    let hx = 2.0 * half_w / (n - 1) as f64;
    let hy = 2.0 * half_h / (n - 1) as f64;

    let hop_eps = (tol.eps * 1e2).min(1e-8);
    let mut sites: Vec<MeshSite> = Vec::with_capacity(n * n);

    let mut col_walker = SheetWalker::start(curve, pd, CurvePoint::plus(curve.base_point()));
    let mut col_phi = vec![Complex64::new(0.0, 0.0); g];
    let theta_of = |phi: &[Complex64], sign: f64| -> Result<f64, CurveError> {
        let u: Vec<Complex64> = (0..g).map(|j| sign * phi[j] - c_arg[j]).collect();
        Ok(theta_magnitude(&u, pd.riemann_matrix(), tol)?)
    };

    for row in 0..n {
        let row_start = origin + Complex64::new(0.0, row as f64 * hy);
        let v = col_walker.walk_to(row_start, hop_eps)?;
        for (a, b) in col_phi.iter_mut().zip(&v) {
            *a += b;
        }
        let mut row_walker = col_walker.fork();
        let mut row_phi = col_phi.clone();
        for col in 0..n {
            if col > 0 {
                let target = row_start + Complex64::new(col as f64 * hx, 0.0);
                let v = row_walker.walk_to(target, hop_eps)?;
                for (a, b) in row_phi.iter_mut().zip(&v) {
                    *a += b;
                }
            }
            sites.push(MeshSite {
                xi: row_walker.position(),
                sign: row_walker.sign_value(),
                phi: row_phi.clone(),
                value_plus: theta_of(&row_phi, 1.0)?,
                value_minus: theta_of(&row_phi, -1.0)?,
            });
        }
    }

    let overall_max = sites
        .iter()
        .map(|s| s.value_plus.max(s.value_minus))
        .fold(0.0f64, f64::max);
    if overall_max < 1e-10 {
        return Err(CurveError::SpecialDivisor);
    }

    // Local minima on each sheet grid.
    let idx = |r: usize, c: usize| r * n + c;
    let mut candidates: Vec<(f64, usize, f64)> = Vec::new(); // (value, site, lift sign s)
    for r in 0..n {
        for c in 0..n {
            for s in [1.0f64, -1.0] {
                let val = |i: usize| {
                    if s > 0.0 {
                        sites[i].value_plus
                    } else {
                        sites[i].value_minus
                    }
                };
                let v = val(idx(r, c));
                let mut is_min = true;
                for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let rr = r as i64 + dr;
                    let cc = c as i64 + dc;
                    if rr < 0 || cc < 0 || rr >= n as i64 || cc >= n as i64 {
                        continue;
                    }
                    if val(idx(rr as usize, cc as usize)) < v {
                        is_min = false;
                        break;
                    }
                }
                if is_min && v < 0.25 * overall_max {
                    candidates.push((v, idx(r, c), s));
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    candidates.truncate(6 * g);

    let mut roots: Vec<(CurvePoint, Vec<Complex64>)> = Vec::new();
    'cand: for &(_, site_idx, s) in &candidates {
        let site = &sites[site_idx];
        match newton_refine(curve, pd, &c_arg, site, s, tol) {
            Ok((point, phi_signed)) => {
                for (existing, _) in &roots {
                    if (existing.xi - point.xi).norm() <= 1e-6 * curve.scale()
                        && (existing.sheet == point.sheet
                            || curve.is_branch_point(point.xi))
                    {
                        continue 'cand;
                    }
                }
                roots.push((point, phi_signed));
                if roots.len() == g {
                    break;
                }
            }
            Err(_) => continue,
        }
    }

    if roots.len() < g {
        return Err(CurveError::NewtonDivergence);
    }

    // Verify the inversion sum: sum phi(P_k) = z mod lattice.
    let mut total = vec![Complex64::new(0.0, 0.0); g];
    for (_, phi) in &roots {
        for (a, b) in total.iter_mut().zip(phi) {
            *a += b;
        }
    }
    let diff: Vec<Complex64> = (0..g).map(|j| total[j] - z[j]).collect();
    let defect = pd.riemann_matrix().lattice_distance(&diff);
    if defect > 1e-6 {
        if std::env::var_os("THETAKIT_DEBUG_INVERSION").is_some() {
            for (p, phi) in &roots {
                eprintln!("root {p:?} walker-phi {phi:?}");
            }
            eprintln!("sum defect {defect:.3e}");
        }
        return Err(CurveError::VerificationFailed(defect));
    }

    Ok(Divisor::of_points(
        &roots.iter().map(|(p, _)| *p).collect::<Vec<_>>(),
    ))
}

/// Newton in the plane coordinate on a fixed lift: F(xi) = theta(s phi(xi) - C),
/// F' = s sum_j d_j theta * nu_j(xi).
fn newton_refine(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    c_arg: &[Complex64],
    site: &MeshSite,
    s: f64,
    tol: &Tolerance,
) -> Result<(CurvePoint, Vec<Complex64>), CurveError> {
    let g = curve.genus();
    let mut walker = SheetWalker::resume(curve, pd, site.xi, site.sign);
    let mut phi = site.phi.clone();
    let scale = curve.scale();
    let mut orders: Vec<Vec<u32>> = vec![vec![0; g]];
    for j in 0..g {
        let mut e = vec![0u32; g];
        e[j] = 1;
        orders.push(e);
    }

    for _ in 0..50 {
        let u: Vec<Complex64> = (0..g).map(|j| s * phi[j] - c_arg[j]).collect();
        let (vals, ln_scale) =
            theta_with_derivatives_scaled(&u, pd.riemann_matrix(), None, &orders, tol)?;
        let f = &vals[0];
        if (f.log_abs() - ln_scale).exp() <= 1e-11 {
            return Ok(finish_root(&walker, s, &phi));
        }
        // derivative d/dxi
        let w = walker.w_continued();
        if w.norm() < 1e-9 * scale {
            // Sitting on a branch point with theta not yet zero: bail.
            return Err(CurveError::NewtonDivergence);
        }
        let mut nu = vec![Complex64::new(0.0, 0.0); g];
        pd.normalized_diff(walker.position(), w, &mut nu);
        let mut fprime = crate::ScaledComplex::ZERO;
        for j in 0..g {
            fprime = fprime.add(&vals[j + 1].mul_complex(s * nu[j]));
        }
        if fprime.is_zero() {
            return Err(CurveError::NewtonDivergence);
        }
        let step = f.div(&fprime).to_complex();
        if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 0.5 * scale {
            return Err(CurveError::NewtonDivergence);
        }
        let target = walker.position() - step;
        let v = walker.walk_to(target, (tol.eps * 1e2).min(1e-9))?;
        for (a, b) in phi.iter_mut().zip(&v) {
            *a += b;
        }
        if step.norm() <= 1e-13 * scale {
            let u: Vec<Complex64> = (0..g).map(|j| s * phi[j] - c_arg[j]).collect();
            if theta_magnitude(&u, pd.riemann_matrix(), tol)? <= 1e-9 {
                return Ok(finish_root(&walker, s, &phi));
            }
            return Err(CurveError::NewtonDivergence);
        }
    }
    Err(CurveError::NewtonDivergence)
}

/// Package a converged Newton root: the divisor point lives on the
/// walker's lift for s = +1 and on the involuted lift for s = -1, with
/// Abel value s * phi_walker.
fn finish_root(walker: &SheetWalker, s: f64, phi: &[Complex64]) -> (CurvePoint, Vec<Complex64>) {
    let sheet = if s > 0.0 {
        walker.sheet()
    } else {
        walker.sheet().flip()
    };
    let phi_signed: Vec<Complex64> = phi.iter().map(|v| s * v).collect();
    (CurvePoint::new(walker.position(), sheet), phi_signed)
}

/// Residual |theta(C)| / scale for C = sum_{j<=g-1} phi(P_j) + Delta.
/// Membership in the theta divisor is asserted when the residual is
/// at or below 1e-7.
pub fn theta_divisor_membership(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    points: &[CurvePoint],
    tol: &Tolerance,
) -> Result<f64, CurveError> {
    let g = curve.genus();
    assert!(g >= 2, "membership characterization needs genus >= 2");
    assert_eq!(points.len(), g - 1);
    let delta = riemann_constants(curve, pd).delta;
    let p0 = CurvePoint::plus(curve.base_point());
    let mut c = delta;
    for p in points {
        let phi = abel_map(curve, pd, p, &p0, tol)?;
        for (a, b) in c.iter_mut().zip(&phi) {
            *a += b;
        }
    }
    theta_magnitude(&c, pd.riemann_matrix(), tol).map_err(CurveError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperelliptic::{build_curve, period_matrix};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn g2_curve() -> HyperellipticCurve {
        build_curve(&[
            c64(-2.3, 0.0),
            c64(-1.1, 0.4),
            c64(0.2, -0.3),
            c64(1.0, 0.2),
            c64(2.2, -0.1),
            c64(3.1, 0.3),
        ])
        .unwrap()
    }

    #[test]
    fn zero_count_equals_genus() {
        let tol = Tolerance::default();
        let curve = g2_curve();
        let pd = period_matrix(&curve, &tol).unwrap();
        let c = [c64(0.23, 0.11), c64(-0.31, 0.07)];
        let n = zero_count(&curve, &pd, &c, &tol).unwrap();
        assert_eq!(n, 2);

        let s = std::f64::consts::SQRT_2;
        let curve1 = build_curve(&[c64(-s, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0), c64(s, 0.0)])
            .unwrap();
        let pd1 = period_matrix(&curve1, &tol).unwrap();
        let n1 = zero_count(&curve1, &pd1, &[c64(0.17, 0.23)], &tol).unwrap();
        assert_eq!(n1, 1);
    }

    #[test]
    fn zero_count_stays_integer_on_the_divisor() {
        // C built from g-1 points lies on the theta divisor; the count
        // must still resolve to an integer.
        let tol = Tolerance::default();
        let curve = g2_curve();
        let pd = period_matrix(&curve, &tol).unwrap();
        let p0 = CurvePoint::plus(curve.base_point());
        let p = CurvePoint::plus(c64(0.7, 1.1));
        let phi = abel_map(&curve, &pd, &p, &p0, &tol).unwrap();
        let delta = riemann_constants(&curve, &pd).delta;
        let c: Vec<Complex64> = (0..2).map(|j| phi[j] + delta[j]).collect();
        let n = zero_count(&curve, &pd, &c, &tol).unwrap();
        assert!((0..=4).contains(&n), "count {n} out of plausible range");
    }

    #[test]
    fn inversion_round_trip_genus2() {
        let tol = Tolerance::default();
        let curve = g2_curve();
        let pd = period_matrix(&curve, &tol).unwrap();
        let p0 = CurvePoint::plus(curve.base_point());
        let targets = [
            CurvePoint::plus(c64(0.55, 0.9)),
            CurvePoint::minus(c64(-0.4, -0.8)),
        ];
        let mut z = vec![Complex64::new(0.0, 0.0); 2];
        for t in &targets {
            let phi = abel_map(&curve, &pd, t, &p0, &tol).unwrap();
            for (a, b) in z.iter_mut().zip(&phi) {
                *a += b;
            }
        }
        let div = jacobi_inversion(&curve, &pd, &z, &tol).unwrap();
        assert_eq!(div.degree(), 2);
        // Set-recovery within 1e-6 in xi.
        for t in &targets {
            let found = div.points.iter().any(|(p, _)| {
                (p.xi - t.xi).norm() <= 1e-6 * curve.scale() && p.sheet == t.sheet
            });
            assert!(found, "target {t:?} not recovered: {:?}", div.points);
        }
    }

    #[test]
    fn inversion_round_trip_genus1() {
        let tol = Tolerance::default();
        let s = std::f64::consts::SQRT_2;
        let curve = build_curve(&[c64(-s, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0), c64(s, 0.0)])
            .unwrap();
        let pd = period_matrix(&curve, &tol).unwrap();
        let p0 = CurvePoint::plus(curve.base_point());
        let target = CurvePoint::plus(c64(0.3, 0.55));
        let z = abel_map(&curve, &pd, &target, &p0, &tol).unwrap();
        let div = jacobi_inversion(&curve, &pd, &z, &tol).unwrap();
        let (p, _) = div.points[0];
        assert!((p.xi - target.xi).norm() <= 1e-6 * curve.scale());
        assert_eq!(p.sheet, target.sheet);
    }

    #[test]
    fn membership_residuals() {
        let tol = Tolerance::default();
        let curve = g2_curve();
        let pd = period_matrix(&curve, &tol).unwrap();
        let p = CurvePoint::plus(c64(0.7, 1.1));
        let r = theta_divisor_membership(&curve, &pd, &[p], &tol).unwrap();
        assert!(r <= 1e-7, "membership residual {r}");
        // Perturbed C leaves the divisor.
        let delta = riemann_constants(&curve, &pd).delta;
        let p0 = CurvePoint::plus(curve.base_point());
        let phi = abel_map(&curve, &pd, &p, &p0, &tol).unwrap();
        let mut c: Vec<Complex64> = (0..2).map(|j| phi[j] + delta[j]).collect();
        c[0] += 0.1;
        let v = theta_magnitude(&c, pd.riemann_matrix(), &tol).unwrap();
        assert!(v >= 1e-3, "perturbed residual {v}");
        // A branch point maps to a half-period and stays on the divisor.
        let bp = CurvePoint::plus(curve.branch_points()[3]);
        let r = theta_divisor_membership(&curve, &pd, &[bp], &tol).unwrap();
        assert!(r <= 1e-7, "branch-point membership residual {r}");
    }
}
