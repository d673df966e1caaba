//! Meromorphic and Baker-Akhiezer function evaluators: theta quotients
//! times the exponential of an abelian integral, sharing one cached
//! integration path per evaluator instance.

use std::cell::RefCell;

use num_complex::Complex64;

use super::{BuilderError, DiffForm, SecondKindDifferential, ThirdKindDifferential};
use crate::hyperelliptic::{
    abel_map, integrate_legs, riemann_constants, CurvePoint, Divisor, HyperellipticCurve, Leg,
    PeriodData, Sheet,
};
use crate::scaled::ScaledComplex;
use crate::theta::{theta, theta_magnitude, Tolerance};

/// Mutable path state: the cached endpoint with its sheet sign and the
/// integrals accumulated from the base point.
struct PathState {
    xi: Complex64,
    sign: f64,
    phi: Vec<Complex64>,
    eta_int: Complex64,
}

/// Shared engine: walks the path, extending phi (normalized holomorphic
/// differentials) and the eta integral along the same geometric legs.
struct PathEngine<'c> {
    curve: &'c HyperellipticCurve,
    pd: &'c PeriodData,
    eta: DiffForm,
    state: RefCell<PathState>,
    eps: f64,
}

impl<'c> PathEngine<'c> {
    fn new(
        curve: &'c HyperellipticCurve,
        pd: &'c PeriodData,
        eta: DiffForm,
        eps: f64,
    ) -> Self {
        let g = curve.genus();
        let eps = eps.max(eta.noise_floor());
        Self {
            curve,
            pd,
            eta,
            state: RefCell::new(PathState {
                xi: curve.base_point(),
                sign: 1.0,
                phi: vec![Complex64::new(0.0, 0.0); g],
                eta_int: Complex64::new(0.0, 0.0),
            }),
            eps,
        }
    }

    /// Waypoints bypassing obstacles that sit too close to the straight
    /// segment from -> to.
    fn route(&self, from: Complex64, to: Complex64) -> Result<Vec<Complex64>, BuilderError> {
        let scale = self.curve.scale();
        let clearance = 2e-3 * scale;
        let mut obstacles: Vec<Complex64> = self
            .curve
            .branch_points()
            .iter()
            .copied()
            .collect();
        obstacles.extend(self.eta.singular_points());
        let mut waypoints = vec![from];
        let d = to - from;
        if d.norm() == 0.0 {
            return Ok(vec![from, to]);
        }
        let dir = d / d.norm();
        let normal = Complex64::new(0.0, 1.0) * dir;
        // Collect offending obstacles ordered along the segment.
        let mut hits: Vec<(f64, Complex64)> = Vec::new();
        for &ob in &obstacles {
            if (ob - from).norm() < clearance || (ob - to).norm() < clearance {
                continue;
            }
            let t = ((ob - from).re * dir.re + (ob - from).im * dir.im) / d.norm();
            if t <= 0.0 || t >= 1.0 {
                continue;
            }
            let foot = from + d * t;
            if (ob - foot).norm() < clearance {
                hits.push((t, ob));
            }
        }
        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (_, ob) in hits {
            // Step around the obstacle on a fixed side.
            waypoints.push(ob + normal * (8.0 * clearance));
        }
        waypoints.push(to);
        Ok(waypoints)
    }

    /// Extend the cached path to (xi, sheet-matched target).  Walks the
    /// routed polyline and a sheet-fixing loop when needed.
    fn extend_to(&self, target: &CurvePoint) -> Result<(), BuilderError> {
        let mut st = self.state.borrow_mut();
        if (st.xi - target.xi).norm() <= 1e-14 * self.curve.scale() {
            let at_branch = self.curve.is_branch_point(st.xi);
            if at_branch || Sheet::from_sign(st.sign) == target.sheet {
                return Ok(());
            }
        }
        let waypoints = self.route(st.xi, target.xi)?;
        for pair in waypoints.windows(2) {
            self.walk_leg(&mut st, pair[0], pair[1])?;
        }
        if !self.curve.is_branch_point(target.xi) && Sheet::from_sign(st.sign) != target.sheet {
            self.flip_loop(&mut st)?;
            if Sheet::from_sign(st.sign) != target.sheet {
                return Err(BuilderError::PathError(
                    "sheet fix-up failed to converge".into(),
                ));
            }
        }
        Ok(())
    }

    fn walk_leg(
        &self,
        st: &mut PathState,
        from: Complex64,
        to: Complex64,
    ) -> Result<(), BuilderError> {
        if (from - to).norm() == 0.0 {
            return Ok(());
        }
        let g = self.curve.genus();
        let legs = [Leg::Segment { from, to }];
        let pd = self.pd;
        let eta = &self.eta;
        let (vals, end_sign) = integrate_legs(
            self.curve,
            &legs,
            st.sign,
            g + 1,
            self.eps,
            &mut |xi, w, out| {
                pd.normalized_diff(xi, w, &mut out[..g]);
                out[g] = eta.value_full(xi, w);
            },
        )?;
        for (a, b) in st.phi.iter_mut().zip(&vals[..g]) {
            *a += b;
        }
        st.eta_int += vals[g];
        st.xi = to;
        st.sign = end_sign;
        Ok(())
    }

    /// Closed polygon around the branch point nearest to the current
    /// position; flips the sheet.
    fn flip_loop(&self, st: &mut PathState) -> Result<(), BuilderError> {
        let (bi, _) = self.curve.nearest_branch_point(st.xi);
        let b = self.curve.branch_points()[bi];
        let mut r = f64::INFINITY;
        for (j, &other) in self.curve.branch_points().iter().enumerate() {
            if j != bi {
                r = r.min((other - b).norm());
            }
        }
        for &pole in &self.eta.singular_points() {
            r = r.min((pole - b).norm());
        }
        let r = 0.4 * r;
        let dir = {
            let d = st.xi - b;
            if d.norm() < 1e-12 * self.curve.scale() {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        };
        let home = st.xi;
        let entry = b + dir * r;
        self.walk_leg(st, home, entry)?;
        let corners = 16;
        let mut prev = entry;
        for k in 1..=corners {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / corners as f64;
            let rot = Complex64::new(ang.cos(), ang.sin());
            let target = b + dir * rot * r;
            self.walk_leg(st, prev, target)?;
            prev = target;
        }
        self.walk_leg(st, prev, home)?;
        Ok(())
    }

    /// Walk a detour polyline (from the current endpoint through the
    /// given waypoints and back), accumulating the integrals.  Used to
    /// append homology cycles to the path.
    fn walk_detour(&self, loop_points: &[Complex64]) -> Result<(), BuilderError> {
        let mut st = self.state.borrow_mut();
        let home = st.xi;
        let mut prev = home;
        for &wp in loop_points {
            self.walk_leg(&mut st, prev, wp)?;
            prev = wp;
        }
        self.walk_leg(&mut st, prev, home)?;
        Ok(())
    }

    fn snapshot(&self) -> (Vec<Complex64>, Complex64) {
        let st = self.state.borrow();
        (st.phi.clone(), st.eta_int)
    }
}

/// Single-valued meromorphic function with poles on the divisor (from
/// the denominator theta) and at the residue -1 pole of eta (through
/// the exponential):
/// psi(P) = A theta(phi(P) - phi(D) + U - Delta) /
///            theta(phi(P) - phi(D) - Delta) * exp(int eta).
pub struct FunctionWithPoles<'c> {
    engine: PathEngine<'c>,
    phi_d: Vec<Complex64>,
    delta: Vec<Complex64>,
    u: Vec<Complex64>,
    constant: Complex64,
    tol: Tolerance,
}

/// Build the evaluator from a non-special degree-g divisor and a
/// normalized third-kind differential.
pub fn function_with_poles<'c>(
    curve: &'c HyperellipticCurve,
    pd: &'c PeriodData,
    divisor: &Divisor,
    eta: &ThirdKindDifferential,
    constant: Complex64,
    tol: &Tolerance,
) -> Result<FunctionWithPoles<'c>, BuilderError> {
    let g = curve.genus();
    assert_eq!(divisor.degree(), g as i64, "divisor degree must equal genus");
    let delta = riemann_constants(curve, pd).delta;
    let p0 = CurvePoint::plus(curve.base_point());
    let mut phi_d = vec![Complex64::new(0.0, 0.0); g];
    for (p, mult) in &divisor.points {
        let phi = abel_map(curve, pd, p, &p0, tol)?;
        for (a, b) in phi_d.iter_mut().zip(&phi) {
            *a += *mult as f64 * b;
        }
    }
    // Non-special check: the denominator theta must not vanish for
    // generic arguments.
    let mut generic_ok = false;
    for probe in [0.123f64, 0.377, 0.721] {
        let u: Vec<Complex64> = (0..g)
            .map(|j| {
                Complex64::new(probe * (j as f64 + 0.7), 0.11 * probe) - phi_d[j] - delta[j]
            })
            .collect();
        if theta_magnitude(&u, pd.riemann_matrix(), tol)? > 1e-8 {
            generic_ok = true;
            break;
        }
    }
    if !generic_ok {
        return Err(BuilderError::SpecialDivisor);
    }
    // The theta-argument shift is the b-period vector scaled by
    // 1/(2 pi i); only then does exp(<m, U_raw>) cancel the
    // quasi-periodicity factor exp(-2 pi i <m, U_theta>) of the ratio.
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let u_theta: Vec<Complex64> = eta.u_periods.iter().map(|u| u / two_pi_i).collect();
    Ok(FunctionWithPoles {
        engine: PathEngine::new(curve, pd, eta.form.clone(), tol.eps),
        phi_d,
        delta,
        u: u_theta,
        constant,
        tol: *tol,
    })
}

impl FunctionWithPoles<'_> {
    fn value_from_state(&self) -> Result<ScaledComplex, BuilderError> {
        let g = self.phi_d.len();
        let (phi, eta_int) = self.engine.snapshot();
        let b = self.engine.pd.riemann_matrix();
        let num_arg: Vec<Complex64> = (0..g)
            .map(|j| phi[j] - self.phi_d[j] + self.u[j] - self.delta[j])
            .collect();
        let den_arg: Vec<Complex64> = (0..g)
            .map(|j| phi[j] - self.phi_d[j] - self.delta[j])
            .collect();
        let num = theta(&num_arg, b, &self.tol)?;
        let den = theta(&den_arg, b, &self.tol)?;
        let expo = ScaledComplex::from_exponent(eta_int);
        Ok(num
            .div(&den)
            .mul(&expo)
            .mul_complex(self.constant))
    }

    /// Evaluate at a point, extending the cached path.
    pub fn evaluate(&self, p: &CurvePoint) -> Result<ScaledComplex, BuilderError> {
        self.engine.extend_to(p)?;
        self.value_from_state()
    }

    /// Evaluate after appending a closed detour through `loop_points`
    /// to the path; for any homology cycle the value must not change.
    pub fn evaluate_with_detour(
        &self,
        p: &CurvePoint,
        loop_points: &[Complex64],
    ) -> Result<ScaledComplex, BuilderError> {
        self.engine.extend_to(p)?;
        self.engine.walk_detour(loop_points)?;
        self.value_from_state()
    }
}

/// Baker-Akhiezer data: non-special degree-g divisor, one marked point
/// and the principal polynomial (degree <= 2) of the essential
/// singularity in 1/t.
#[derive(Debug, Clone)]
pub struct BAData {
    pub divisor: Divisor,
    pub singular_point: CurvePoint,
    pub principal: Vec<Complex64>,
}

/// Baker-Akhiezer evaluator:
/// psi(P) = theta(phi(P) - phi(D) + V - Delta) /
///            theta(phi(P) - phi(D) - Delta) * exp(int eta),
/// with eta the normalized second-kind differential matching the
/// principal polynomial at the singular point.
pub struct BakerAkhiezer<'c> {
    inner: FunctionWithPoles<'c>,
    singular_point: CurvePoint,
    principal: Vec<Complex64>,
}

pub fn baker_akhiezer<'c>(
    curve: &'c HyperellipticCurve,
    pd: &'c PeriodData,
    data: &BAData,
    sk: &SecondKindDifferential,
    tol: &Tolerance,
) -> Result<BakerAkhiezer<'c>, BuilderError> {
    if (sk.pole.xi - data.singular_point.xi).norm() > 1e-12 * curve.scale()
        || sk.pole.sheet != data.singular_point.sheet
    {
        return Err(BuilderError::UnsupportedConfiguration(
            "second-kind differential pole must match the BA singular point".into(),
        ));
    }
    let third_like = ThirdKindDifferential {
        pole_plus: sk.pole,
        pole_minus: sk.pole,
        normalization_coeffs: sk.normalization_coeffs.clone(),
        u_periods: sk.v_periods.clone(),
        form: sk.form.clone(),
    };
    let inner = function_with_poles(
        curve,
        pd,
        &data.divisor,
        &third_like,
        Complex64::new(1.0, 0.0),
        tol,
    )?;
    Ok(BakerAkhiezer {
        inner,
        singular_point: data.singular_point,
        principal: data.principal.clone(),
    })
}

impl BakerAkhiezer<'_> {
    pub fn evaluate(&self, p: &CurvePoint) -> Result<ScaledComplex, BuilderError> {
        self.inner.evaluate(p)
    }

    pub fn evaluate_with_detour(
        &self,
        p: &CurvePoint,
        loop_points: &[Complex64],
    ) -> Result<ScaledComplex, BuilderError> {
        self.inner.evaluate_with_detour(p, loop_points)
    }

    /// q(t) = c1/t + c2/t^2 in the local parameter t = xi - xi_Q.
    pub fn essential_exponent(&self, xi: Complex64) -> Complex64 {
        let t = xi - self.singular_point.xi;
        let mut q = Complex64::new(0.0, 0.0);
        if !self.principal.is_empty() {
            q += self.principal[0] / t;
        }
        if self.principal.len() > 1 {
            q += self.principal[1] / (t * t);
        }
        q
    }

    /// psi(P) exp(-q(t(P))) evaluated stably near the singular point:
    /// the eta integral is regularized by subtracting dq analytically on
    /// the final approach from a reference point on the same sheet.
    pub fn evaluate_regularized(&self, p: &CurvePoint) -> Result<ScaledComplex, BuilderError> {
        let curve = self.inner.engine.curve;
        let q_pt = self.singular_point;
        let scale = curve.scale();
        if p.sheet != q_pt.sheet {
            // Away from the singular sheet the plain value works.
            let v = self.evaluate(p)?;
            return Ok(v.mul(&ScaledComplex::from_exponent(-self.essential_exponent(p.xi))));
        }
        // Reference point: moderate distance from Q along the approach direction.
        let dir = {
            let d = p.xi - q_pt.xi;
            if d.norm() < 1e-14 * scale {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        };
        let ref_xi = q_pt.xi + dir * (0.25 * scale);
        let ref_pt = CurvePoint::new(ref_xi, q_pt.sheet);
        self.inner.engine.extend_to(&ref_pt)?;
        let (phi_ref, eta_ref) = self.inner.engine.snapshot();
        let sign_ref = self.inner.engine.state.borrow().sign;

        // Final leg with the regularized integrand eta - dq.
        let g = curve.genus();
        let pd = self.inner.engine.pd;
        let eta = &self.inner.engine.eta;
        let c1 = self.principal.first().copied().unwrap_or_default();
        let c2 = self.principal.get(1).copied().unwrap_or_default();
        let xi_q = q_pt.xi;
        let legs = [Leg::Segment {
            from: ref_xi,
            to: p.xi,
        }];
        let (vals, _) = integrate_legs(
            curve,
            &legs,
            sign_ref,
            g + 1,
            self.inner.engine.eps,
            &mut |xi, w, out| {
                pd.normalized_diff(xi, w, &mut out[..g]);
                let t = xi - xi_q;
                let dq = -c1 / (t * t) - 2.0 * c2 / (t * t * t);
                out[g] = eta.value_full(xi, w) - dq;
            },
        )?;
        let phi: Vec<Complex64> = (0..g).map(|j| phi_ref[j] + vals[j]).collect();
        let reg_exp = eta_ref + vals[g] - self.essential_exponent(ref_xi);

        let b = pd.riemann_matrix();
        let num_arg: Vec<Complex64> = (0..g)
            .map(|j| phi[j] - self.inner.phi_d[j] + self.inner.u[j] - self.inner.delta[j])
            .collect();
        let den_arg: Vec<Complex64> = (0..g)
            .map(|j| phi[j] - self.inner.phi_d[j] - self.inner.delta[j])
            .collect();
        let num = theta(&num_arg, b, &self.inner.tol)?;
        let den = theta(&den_arg, b, &self.inner.tol)?;
        Ok(num
            .div(&den)
            .mul(&ScaledComplex::from_exponent(reg_exp)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{second_kind, third_kind};
    use crate::hyperelliptic::{build_curve, period_matrix};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn g1_setup() -> HyperellipticCurve {
        let s = std::f64::consts::SQRT_2;
        build_curve(&[c64(-s, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0), c64(s, 0.0)]).unwrap()
    }

    /// Loop realizations of homology cycles for the detour test: a
    /// circle around a cut, and a two-cut crossing rectangle.
    fn cycle_loops(curve: &HyperellipticCurve) -> Vec<Vec<Complex64>> {
        let mut loops = Vec::new();
        for cut in 1..curve.cuts().len() {
            let c = &curve.cuts()[cut];
            let r = 1.3 * c.half.norm();
            let n = 20;
            let poly: Vec<Complex64> = (0..n)
                .map(|k| {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    c.mid + r * c64(ang.cos(), ang.sin())
                })
                .collect();
            loops.push(poly);
        }
        // A loop crossing cut 0 and cut 1 once each: down through each
        // cut's midpoint, connected above and below.
        let c0 = &curve.cuts()[0];
        let c1 = &curve.cuts()[1];
        let y_hi = curve.top_altitude();
        let y_lo = curve
            .branch_points()
            .iter()
            .map(|z| z.im)
            .fold(f64::INFINITY, f64::min)
            - 0.75 * curve.scale();
        loops.push(vec![
            c64(c0.mid.re, y_hi),
            c64(c0.mid.re, y_lo),
            c64(c1.mid.re, y_lo),
            c64(c1.mid.re, y_hi),
        ]);
        loops
    }

    #[test]
    fn pole_function_single_valued_and_poled() {
        let tol = Tolerance::default();
        let curve = g1_setup();
        let pd = period_matrix(&curve, &tol).unwrap();
        let d_pt = CurvePoint::plus(c64(0.45, 0.65));
        let divisor = Divisor::of_points(&[d_pt]);
        let eta = third_kind(
            &curve,
            &pd,
            &CurvePoint::plus(c64(-0.3, 1.2)),
            &CurvePoint::minus(c64(0.6, -1.1)),
            &tol,
        )
        .unwrap();
        let psi = function_with_poles(&curve, &pd, &divisor, &eta, c64(1.0, 0.0), &tol).unwrap();

        let probe = CurvePoint::plus(c64(2.0, 1.5));
        let base_val = psi.evaluate(&probe).unwrap();
        for (i, lp) in cycle_loops(&curve).iter().enumerate() {
            let v = psi.evaluate_with_detour(&probe, lp).unwrap();
            let rel = v.rel_distance(&base_val);
            assert!(rel <= 1e-8, "cycle {i}: single-valuedness defect {rel}");
        }

        // Pole at the divisor point: |psi| grows approaching it.
        let near = CurvePoint::plus(d_pt.xi + c64(1e-4, 0.0));
        let v_near = psi.evaluate(&near).unwrap();
        assert!(
            v_near.log_abs() - base_val.log_abs() > (1e3f64).ln(),
            "no pole growth at the divisor"
        );
        // Pole at the third-kind minus point too (exp integral blows up).
        let near_q = CurvePoint::minus(c64(0.6, -1.1) + c64(1e-4, 0.0));
        let v_q = psi.evaluate(&near_q).unwrap();
        assert!(v_q.log_abs() - base_val.log_abs() > (1e3f64).ln());
    }

    #[test]
    fn theta_ratio_quasi_period_cancellation() {
        // The ratio identity: appending b_k multiplies the theta ratio
        // by exp(-2 pi i <m, U>) and the exponential by exp(U_k); their
        // product is what keeps psi single-valued.  Check the theta-ratio
        // factor directly for random integer m.
        let tol = Tolerance::default();
        let curve = g1_setup();
        let pd = period_matrix(&curve, &tol).unwrap();
        let b = pd.riemann_matrix();
        let eta = third_kind(
            &curve,
            &pd,
            &CurvePoint::plus(c64(-0.3, 1.2)),
            &CurvePoint::minus(c64(0.6, -1.1)),
            &tol,
        )
        .unwrap();
        let u = &eta.u_periods;
        for m in [-2i64, 1, 3] {
            let x = [c64(0.23, 0.41)];
            let shift = b.mul_int_vec(&[m]);
            let x_shift = [x[0] + shift[0]];
            let up = [x[0] + u[0]];
            let up_shift = [x_shift[0] + u[0]];
            let lhs = theta(&up_shift, b, &tol)
                .unwrap()
                .div(&theta(&x_shift, b, &tol).unwrap());
            let rhs = theta(&up, b, &tol)
                .unwrap()
                .div(&theta(&x, b, &tol).unwrap())
                .mul(&ScaledComplex::from_exponent(
                    -Complex64::new(0.0, 2.0 * std::f64::consts::PI) * m as f64 * u[0],
                ));
            assert!(lhs.rel_distance(&rhs) <= 1e-9);
        }
    }

    #[test]
    fn baker_akhiezer_properties() {
        let tol = Tolerance::default();
        let curve = g1_setup();
        let pd = period_matrix(&curve, &tol).unwrap();
        let d_pt = CurvePoint::plus(c64(0.45, 0.65));
        let q_pt = CurvePoint::plus(c64(-0.2, -1.0));
        let data = BAData {
            divisor: Divisor::of_points(&[d_pt]),
            singular_point: q_pt,
            principal: vec![c64(0.12, 0.05), c64(0.03, -0.02)],
        };
        let sk = second_kind(&curve, &pd, &q_pt, &data.principal, &tol).unwrap();
        let psi = baker_akhiezer(&curve, &pd, &data, &sk, &tol).unwrap();

        let probe = CurvePoint::plus(c64(2.0, 1.5));
        let base_val = psi.evaluate(&probe).unwrap();
        for (i, lp) in cycle_loops(&curve).iter().enumerate() {
            let v = psi.evaluate_with_detour(&probe, lp).unwrap();
            let rel = v.rel_distance(&base_val);
            assert!(rel <= 1e-8, "cycle {i}: single-valuedness defect {rel}");
        }

        // Essential-singularity normalization: psi e^{-q} stays bounded
        // on shrinking circles around Q.
        let mut maxima = Vec::new();
        for radius in [1e-2, 1e-3] {
            let mut m: f64 = 0.0;
            for k in 0..12 {
                let ang = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
                let xi = q_pt.xi + radius * c64(ang.cos(), ang.sin());
                let v = psi
                    .evaluate_regularized(&CurvePoint::new(xi, q_pt.sheet))
                    .unwrap();
                m = m.max(v.log_abs());
            }
            maxima.push(m);
        }
        assert!(
            (maxima[0] - maxima[1]).abs() < (10.0f64).ln(),
            "regularized growth between radii: {maxima:?}"
        );
    }

    #[test]
    fn trivial_principal_part_gives_constant_one() {
        // q = 0: V = 0 and numerator equals denominator, so psi = 1.
        let tol = Tolerance::default();
        let curve = g1_setup();
        let pd = period_matrix(&curve, &tol).unwrap();
        let d_pt = CurvePoint::plus(c64(0.45, 0.65));
        let q_pt = CurvePoint::plus(c64(-0.2, -1.0));
        let sk = SecondKindDifferential {
            pole: q_pt,
            principal: vec![],
            normalization_coeffs: vec![c64(0.0, 0.0)],
            v_periods: vec![c64(0.0, 0.0)],
            form: DiffForm::default(),
        };
        let data = BAData {
            divisor: Divisor::of_points(&[d_pt]),
            singular_point: q_pt,
            principal: vec![],
        };
        let psi = baker_akhiezer(&curve, &pd, &data, &sk, &tol).unwrap();
        for xi in [c64(1.9, 0.8), c64(-1.6, -0.9)] {
            let v = psi.evaluate(&CurvePoint::plus(xi)).unwrap().to_complex();
            assert!((v - 1.0).norm() <= 1e-8, "psi = {v}");
        }
    }

    #[test]
    fn two_constructions_agree_up_to_scale() {
        let tol = Tolerance::default();
        let curve = g1_setup();
        let pd = period_matrix(&curve, &tol).unwrap();
        let d_pt = CurvePoint::plus(c64(0.45, 0.65));
        let q_pt = CurvePoint::plus(c64(-0.2, -1.0));
        let data = BAData {
            divisor: Divisor::of_points(&[d_pt]),
            singular_point: q_pt,
            principal: vec![c64(0.12, 0.05)],
        };
        let sk = second_kind(&curve, &pd, &q_pt, &data.principal, &tol).unwrap();
        let psi1 = baker_akhiezer(&curve, &pd, &data, &sk, &tol).unwrap();
        // Second construction: tighter tolerance and a detour inserted
        // into its base path before any evaluation.
        let tol2 = Tolerance::with_eps(1e-12);
        let sk2 = second_kind(&curve, &pd, &q_pt, &data.principal, &tol2).unwrap();
        let psi2 = baker_akhiezer(&curve, &pd, &data, &sk2, &tol2).unwrap();
        let warmup = CurvePoint::plus(c64(2.4, 2.0));
        let lp = &cycle_loops(&curve)[0];
        psi2.evaluate_with_detour(&warmup, lp).unwrap();

        let mut ratios: Vec<Complex64> = Vec::new();
        for k in 0..20 {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / 20.0;
            let xi = c64(0.3, 0.2) + 2.2 * c64(ang.cos(), ang.sin());
            let p = CurvePoint::new(xi, if k % 2 == 0 { Sheet::Plus } else { Sheet::Minus });
            let v1 = psi1.evaluate(&p).unwrap();
            let v2 = psi2.evaluate(&p).unwrap();
            ratios.push(v1.div(&v2).to_complex());
        }
        let mean: Complex64 = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
        let spread = ratios
            .iter()
            .map(|r| (r - mean).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / (ratios.len() as f64).sqrt()
            / mean.norm();
        assert!(spread <= 1e-6, "relative spread {spread}");
    }
}
