//! The Abel map and the incremental sheet-tracking walker used by
//! inversion, zero counting and the function builders.

use num_complex::Complex64;

use super::{integrate_legs, CurveError, CurvePoint, HyperellipticCurve, Leg, PeriodData, Sheet};

/// Integral of the normalized holomorphic differentials from P0 to P
/// along a straight segment (plus a sheet-fixing loop around the branch
/// point nearest to P when the continuation lands on the other sheet).
///
/// Errors with `PathThroughBranchPoint` when the open segment passes
/// through a branch point; endpoints may be branch points.
pub fn abel_map(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    p: &CurvePoint,
    p0: &CurvePoint,
    tol: &crate::theta::Tolerance,
) -> Result<Vec<Complex64>, CurveError> {
    let g = curve.genus();
    if (p.xi - p0.xi).norm() <= 1e-14 * curve.scale() && p.sheet == p0.sheet {
        return Ok(vec![Complex64::new(0.0, 0.0); g]);
    }
    check_open_segment(curve, p0.xi, p.xi)?;

    let mut walker = SheetWalker::start(curve, pd, *p0);
    let mut phi = walker.walk_to(p.xi, tol.eps)?;

    if !curve.is_branch_point(p.xi) && walker.sheet() != p.sheet {
        let loop_phi = walker.flip_sheet(tol.eps)?;
        for (a, b) in phi.iter_mut().zip(&loop_phi) {
            *a += b;
        }
        if walker.sheet() != p.sheet {
            return Err(CurveError::NewtonDivergence);
        }
    }
    Ok(phi)
}

fn check_open_segment(
    curve: &HyperellipticCurve,
    from: Complex64,
    to: Complex64,
) -> Result<(), CurveError> {
    for (i, &b) in curve.branch_points().iter().enumerate() {
        if (b - from).norm() <= 1e-12 * curve.scale() || (b - to).norm() <= 1e-12 * curve.scale()
        {
            continue;
        }
        if super::segment_distance(from, to, b) <= 1e-6 * curve.scale() {
            return Err(CurveError::PathThroughBranchPoint(i));
        }
    }
    Ok(())
}

/// Incremental path state on the curve: current plane position, sheet
/// sign relative to the principal branch, and the machinery to extend
/// the path and integrate the normalized differentials along it.
pub struct SheetWalker<'c> {
    curve: &'c HyperellipticCurve,
    pd: &'c PeriodData,
    xi: Complex64,
    sign: f64,
    at_branch: bool,
}

impl<'c> SheetWalker<'c> {
    pub fn start(curve: &'c HyperellipticCurve, pd: &'c PeriodData, p0: CurvePoint) -> Self {
        let at_branch = curve.is_branch_point(p0.xi);
        Self {
            curve,
            pd,
            xi: p0.xi,
            sign: if at_branch { 1.0 } else { p0.sheet.sign() },
            at_branch,
        }
    }

    /// Rebuild a walker from a stored (position, sign) pair.
    pub fn resume(
        curve: &'c HyperellipticCurve,
        pd: &'c PeriodData,
        xi: Complex64,
        sign: f64,
    ) -> Self {
        Self {
            curve,
            pd,
            xi,
            sign,
            at_branch: curve.is_branch_point(xi),
        }
    }

    /// Duplicate the walker state; used to branch a row scan off a
    /// column scan without re-walking the prefix path.
    pub fn fork(&self) -> SheetWalker<'c> {
        SheetWalker {
            curve: self.curve,
            pd: self.pd,
            xi: self.xi,
            sign: self.sign,
            at_branch: self.at_branch,
        }
    }

    pub fn sign_value(&self) -> f64 {
        self.sign
    }

    /// The continued w at the current position.
    pub fn w_continued(&self) -> Complex64 {
        self.sign * self.curve.w_principal(self.xi)
    }

    pub fn position(&self) -> Complex64 {
        self.xi
    }

    pub fn sheet(&self) -> Sheet {
        Sheet::from_sign(self.sign)
    }

    pub fn point(&self) -> CurvePoint {
        CurvePoint::new(self.xi, self.sheet())
    }

    /// Extend the path by the straight segment to `to`, returning the
    /// integral of the normalized differentials along it.
    pub fn walk_to(&mut self, to: Complex64, eps: f64) -> Result<Vec<Complex64>, CurveError> {
        let g = self.curve.genus();
        if (to - self.xi).norm() == 0.0 {
            return Ok(vec![Complex64::new(0.0, 0.0); g]);
        }
        let legs = [Leg::Segment { from: self.xi, to }];
        let pd = self.pd;
        let (vals, end_sign) = integrate_legs(
            self.curve,
            &legs,
            self.sign,
            g,
            eps,
            &mut |xi, w, out| pd.normalized_diff(xi, w, out),
        )?;
        self.xi = to;
        self.sign = end_sign;
        self.at_branch = self.curve.is_branch_point(to);
        Ok(vals)
    }

    /// Walk a small closed loop around the branch point nearest to the
    /// current position, flipping the sheet.  Returns the loop integral.
    pub fn flip_sheet(&mut self, eps: f64) -> Result<Vec<Complex64>, CurveError> {
        let g = self.curve.genus();
        let (bi, _) = self.curve.nearest_branch_point(self.xi);
        let b = self.curve.branch_points()[bi];
        let mut r = f64::INFINITY;
        for (j, &other) in self.curve.branch_points().iter().enumerate() {
            if j != bi {
                r = r.min((other - b).norm());
            }
        }
        let r = 0.4 * r;
        let dir = {
            let d = self.xi - b;
            if d.norm() < 1e-12 * self.curve.scale() {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        };
        let start_pt = b + dir * r;
        let home = self.xi;
        let mut total = vec![Complex64::new(0.0, 0.0); g];
        let add = |acc: &mut Vec<Complex64>, v: Vec<Complex64>| {
            for (a, b) in acc.iter_mut().zip(&v) {
                *a += b;
            }
        };
        add(&mut total, self.walk_to(start_pt, eps)?);
        let corners = 16;
        for k in 1..=corners {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / corners as f64;
            let rot = Complex64::new(ang.cos(), ang.sin());
            let target = b + dir * rot * r;
            add(&mut total, self.walk_to(target, eps)?);
        }
        add(&mut total, self.walk_to(home, eps)?);
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperelliptic::{build_curve, period_matrix};
    use crate::theta::Tolerance;

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
    fn abel_map_of_base_point_is_zero() {
        let curve = g2_curve();
        let pd = period_matrix(&curve, &Tolerance::default()).unwrap();
        let p0 = CurvePoint::plus(curve.base_point());
        let tol = Tolerance::default();
        let v = abel_map(&curve, &pd, &p0, &p0, &tol).unwrap();
        assert!(v.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn involution_negates_abel_map_mod_lattice() {
        let curve = g2_curve();
        let pd = period_matrix(&curve, &Tolerance::default()).unwrap();
        let tol = Tolerance::default();
        let p0 = CurvePoint::plus(curve.base_point());
        for &xi in &[c64(0.6, 0.8), c64(-0.5, -0.9), c64(1.4, 1.2)] {
            let p = CurvePoint::plus(xi);
            let phi = abel_map(&curve, &pd, &p, &p0, &tol).unwrap();
            let phi_sigma = abel_map(&curve, &pd, &p.involution(), &p0, &tol).unwrap();
            let sum: Vec<Complex64> = phi.iter().zip(&phi_sigma).map(|(a, b)| a + b).collect();
            let dist = pd.riemann_matrix().lattice_distance(&sum);
            assert!(dist <= 1e-7, "sigma symmetry defect {dist} at {xi}");
        }
    }

    #[test]
    fn a_cycle_appends_integer_columns() {
        // Two homotopic paths agree; a path augmented by the a_1 cycle
        // realization differs by the first identity column.
        let curve = g2_curve();
        let pd = period_matrix(&curve, &Tolerance::default()).unwrap();
        let tol = Tolerance::default();
        let p0 = CurvePoint::plus(curve.base_point());
        let target = c64(-0.2, 1.4);
        let p = CurvePoint::plus(target);
        let direct = abel_map(&curve, &pd, &p, &p0, &tol).unwrap();

        // Walk to the target, then traverse the loop around cut 1 and
        // compare: the added loop integrates the a_1 period = e_1 (up to
        // orientation).
        let mut walker = SheetWalker::start(&curve, &pd, p0);
        let mut phi = walker.walk_to(target, tol.eps).unwrap();
        let cut = curve.cuts()[1];
        let r = 1.2 * cut.half.norm();
        let center = cut.mid;
        let entry = center + r;
        let mut add = |acc: &mut Vec<Complex64>, v: Vec<Complex64>| {
            for (a, b) in acc.iter_mut().zip(&v) {
                *a += b;
            }
        };
        add(&mut phi, walker.walk_to(entry, tol.eps).unwrap());
        for k in 1..=24 {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / 24.0;
            let pt = center + r * c64(ang.cos(), ang.sin());
            add(&mut phi, walker.walk_to(pt, tol.eps).unwrap());
        }
        add(&mut phi, walker.walk_to(target, tol.eps).unwrap());
        assert_eq!(walker.sheet(), Sheet::Plus, "a-cycle must preserve the sheet");

        let diff: Vec<Complex64> = phi.iter().zip(&direct).map(|(a, b)| a - b).collect();
        // Expect +-e_1 exactly.
        assert!((diff[0].re.abs() - 1.0).abs() < 1e-8, "diff {diff:?}");
        assert!(diff[0].im.abs() < 1e-8);
        assert!(diff[1].norm() < 1e-8);
    }

    #[test]
    fn path_through_branch_point_rejected() {
        let curve = build_curve(&[
            c64(-2.0, 0.0),
            c64(-1.0, 0.0),
            c64(1.0, 0.0),
            c64(2.0, 0.0),
        ])
        .unwrap();
        let pd = period_matrix(&curve, &Tolerance::default()).unwrap();
        let tol = Tolerance::default();
        let p0 = CurvePoint::plus(c64(-3.0, 0.0));
        let p = CurvePoint::plus(c64(3.0, 0.0));
        let err = abel_map(&curve, &pd, &p, &p0, &tol).unwrap_err();
        assert!(matches!(err, CurveError::PathThroughBranchPoint(_)));
    }

    #[test]
    fn requested_sheet_is_honored() {
        let curve = g2_curve();
        let pd = period_matrix(&curve, &Tolerance::default()).unwrap();
        let tol = Tolerance::default();
        let p0 = CurvePoint::plus(curve.base_point());
        let xi = c64(0.6, 0.8);
        let plus = abel_map(&curve, &pd, &CurvePoint::plus(xi), &p0, &tol).unwrap();
        let minus = abel_map(&curve, &pd, &CurvePoint::minus(xi), &p0, &tol).unwrap();
        // Different sheets map to different Jacobian points (mod lattice).
        let diff: Vec<Complex64> = plus.iter().zip(&minus).map(|(a, b)| a - b).collect();
        let dist = pd.riemann_matrix().lattice_distance(&diff);
        assert!(dist > 1e-3, "sheets coincide: {dist}");
    }
}
