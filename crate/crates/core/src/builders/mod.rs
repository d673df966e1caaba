//! Abelian differentials of the second and third kind on hyperelliptic
//! curves, and the meromorphic / Baker-Akhiezer function evaluators
//! built from them.
//!
//! A differential with poles off the branch locus is represented by a
//! rational form
//!
//! ```text
//! eta = [ sum_k c_k (w_k + w) / (2 w (xi - x_k))  -  poly(xi) / w ] dxi
//! ```
//!
//! whose (w_k + w) numerators put a simple pole of residue c_k at the
//! tagged point (x_k, w_k) and none at its involution image.  The even
//! (w-free) part drops out of every cycle period, so a- and b-periods
//! integrate only the odd part.

mod functions;

pub use functions::{baker_akhiezer, function_with_poles, BAData, BakerAkhiezer, FunctionWithPoles};

use num_complex::Complex64;

use crate::hyperelliptic::{
    b_path_legs, integrate_legs, CurveError, CurvePoint, HyperellipticCurve, Leg, PeriodData,
};
use crate::numeric::ComplexLu;
use crate::theta::{ThetaError, Tolerance};

#[derive(Debug, thiserror::Error)]
pub enum BuilderError {
    #[error("pole too close to a branch point or cut")]
    PoleAtBranchPoint,
    #[error("poles of the differential must be distinct")]
    CoincidentPoles,
    #[error("normalization system is singular")]
    SingularNormalization,
    #[error("divisor is special: denominator theta vanishes identically")]
    SpecialDivisor,
    #[error("path construction failed: {0}")]
    PathError(String),
    #[error("principal parts of degree at most 2 are supported, got {0}")]
    UnsupportedPrincipalPart(usize),
    #[error("second-kind differential leaks residue {0:.3e}")]
    ResidueLeak(f64),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

/// A finite-difference stencil cluster at a moving-pole center,
/// evaluated through exact pair identities so that the O(1/h^2)
/// weights never cancel catastrophically:
///
/// ```text
/// sum_i w_i / (t - e_i) = sum_pairs [ S s^2 / (t (t^2 - s^2)) + K / (t^2 - s^2) ]
/// ```
///
/// with S = w_+ + w_-, K = (w_+ - w_-) s, and the stencil's center
/// weight absorbed exactly (derivative stencils annihilate constants).
#[derive(Debug, Clone)]
pub struct FdCluster {
    /// Pole center xi_Q.
    pub x: Complex64,
    /// w at the center on the tagged sheet.
    pub wp0: Complex64,
    /// (S, K, s^2) per symmetric stencil pair.
    pairs: Vec<(Complex64, Complex64, f64)>,
    /// (w_i, eps_i, w_P(eps_i) - wp0) for the smooth residual sum.
    entries: Vec<(Complex64, f64, Complex64)>,
}

impl FdCluster {
    /// Exact-paired sum of w_i / (t - eps_i) including the center term.
    fn pole_sum(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(s_sum, skew, s2) in &self.pairs {
            let denom = t * t - s2;
            acc += s_sum * s2 / (t * denom) + skew / denom;
        }
        acc
    }

    /// sum of w_i (wp_i - wp0) / (t - eps_i); individual terms are
    /// O(1/h) and cancel benignly.
    fn delta_sum(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(w, e, d) in &self.entries {
            acc += w * d / (t - e);
        }
        acc
    }

    fn noise(&self) -> f64 {
        // Paths may pass within ~0.1 of the cluster, amplifying the
        // +-|w delta| cancellation noise of pointwise evaluations.
        let m = self
            .entries
            .iter()
            .map(|(w, _, d)| (w * d).norm())
            .fold(0.0f64, f64::max);
        512.0 * f64::EPSILON * m
    }
}

/// Rational differential data shared by the second- and third-kind
/// constructions.
#[derive(Debug, Clone, Default)]
pub struct DiffForm {
    /// (weight, x_k, w_k): weight * (w_k + w) / (2 w (xi - x_k)).
    pub simple_poles: Vec<(Complex64, Complex64, Complex64)>,
    /// Finite-difference clusters (second-kind construction).
    pub clusters: Vec<FdCluster>,
    /// Holomorphic correction sum_j poly[j] xi^j / w, subtracted.
    pub poly: Vec<Complex64>,
}

impl DiffForm {
    /// Evaluation noise floor of the cluster sums; quadrature targets
    /// tighter than this cannot converge.
    pub fn noise_floor(&self) -> f64 {
        self.clusters
            .iter()
            .map(|c| c.noise())
            .fold(1e-14, f64::max)
    }

    /// Full integrand value at (xi, w) with w continued on the path.
    pub fn value_full(&self, xi: Complex64, w: Complex64) -> Complex64 {
        let mut even = Complex64::new(0.0, 0.0);
        let mut odd_num = Complex64::new(0.0, 0.0);
        for &(c, x, wk) in &self.simple_poles {
            even += c / (xi - x);
            odd_num += c * wk / (xi - x);
        }
        for cl in &self.clusters {
            let t = xi - cl.x;
            let ps = cl.pole_sum(t);
            even += ps;
            odd_num += cl.wp0 * ps + cl.delta_sum(t);
        }
        let mut pow = Complex64::new(1.0, 0.0);
        let mut poly = Complex64::new(0.0, 0.0);
        for &p in &self.poly {
            poly += p * pow;
            pow *= xi;
        }
        0.5 * even + (0.5 * odd_num - poly) / w
    }

    /// Odd part only: everything proportional to 1/w.  This is the part
    /// seen by cycle periods.
    pub fn value_odd(&self, xi: Complex64, w: Complex64) -> Complex64 {
        let mut odd_num = Complex64::new(0.0, 0.0);
        for &(c, x, wk) in &self.simple_poles {
            odd_num += c * wk / (xi - x);
        }
        for cl in &self.clusters {
            let t = xi - cl.x;
            odd_num += cl.wp0 * cl.pole_sum(t) + cl.delta_sum(t);
        }
        let mut pow = Complex64::new(1.0, 0.0);
        let mut poly = Complex64::new(0.0, 0.0);
        for &p in &self.poly {
            poly += p * pow;
            pow *= xi;
        }
        (0.5 * odd_num - poly) / w
    }

    /// Positions where the integrand is singular, for path routing.
    pub fn singular_points(&self) -> Vec<Complex64> {
        let mut pts: Vec<Complex64> = self.simple_poles.iter().map(|&(_, x, _)| x).collect();
        pts.extend(self.clusters.iter().map(|c| c.x));
        pts
    }
}

/// Normalized differential of the third kind: simple poles with residue
/// +1 at `pole_plus` and -1 at `pole_minus`, all a-periods zero.
#[derive(Debug, Clone)]
pub struct ThirdKindDifferential {
    pub pole_plus: CurvePoint,
    pub pole_minus: CurvePoint,
    pub normalization_coeffs: Vec<Complex64>,
    /// U_k = b_k-period of the normalized differential.
    pub u_periods: Vec<Complex64>,
    pub form: DiffForm,
}

/// Normalized differential of the second kind: higher-order pole at
/// `pole` with zero residue, principal part d(c1/t + c2/t^2) in the
/// local parameter t = xi - xi_pole, all a-periods zero.
#[derive(Debug, Clone)]
pub struct SecondKindDifferential {
    pub pole: CurvePoint,
    pub principal: Vec<Complex64>,
    pub normalization_coeffs: Vec<Complex64>,
    /// V_k = b_k-period of the normalized differential.
    pub v_periods: Vec<Complex64>,
    pub form: DiffForm,
}

fn check_pole_position(
    curve: &HyperellipticCurve,
    xi: Complex64,
    clearance: f64,
) -> Result<(), BuilderError> {
    if curve.distance_to_cuts(xi) < clearance * curve.scale() {
        return Err(BuilderError::PoleAtBranchPoint);
    }
    Ok(())
}

/// ln(1 + z) by series for small |z|, full relative precision.
fn ln1p_small(z: Complex64) -> Complex64 {
    debug_assert!(z.norm() < 1e-2);
    let mut term = z;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..24 {
        acc += term / k as f64;
        term *= -z;
        if term.norm() < 1e-18 * acc.norm().max(1e-300) {
            break;
        }
    }
    acc
}

/// exp(z) - 1 by series for small |z|, full relative precision.
fn expm1_small(z: Complex64) -> Complex64 {
    debug_assert!(z.norm() < 1e-1);
    let mut term = z;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 2..26 {
        acc += term;
        term *= z / k as f64;
        if term.norm() < 1e-18 * acc.norm().max(1e-300) {
            break;
        }
    }
    acc
}

/// w(xi_Q + eps) - w(xi_Q) on a fixed sheet, evaluated with full
/// relative accuracy on the difference: the 1/h^2 stencil weights
/// amplify any absolute error of the naive subtraction into a residue
/// leak of the assembled differential.
fn w_increment(
    curve: &HyperellipticCurve,
    xi_q: Complex64,
    wp0: Complex64,
    eps: f64,
) -> Complex64 {
    let mut log_ratio = Complex64::new(0.0, 0.0);
    for &b in curve.branch_points() {
        log_ratio += ln1p_small(Complex64::new(eps, 0.0) / (xi_q - b));
    }
    wp0 * expm1_small(0.5 * log_ratio)
}

/// Zero out the a-periods of `form` by subtracting the holomorphic
/// combination sum_j c_j xi^j dxi / w, and return the b-periods of the
/// normalized form.
fn normalize_and_b_periods(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    form: &mut DiffForm,
    tol: &Tolerance,
) -> Result<(Vec<Complex64>, Vec<Complex64>), BuilderError> {
    let g = curve.genus();
    let eps = tol.eps.max(form.noise_floor());
    // a-periods of the raw pole part.
    let mut alpha = vec![Complex64::new(0.0, 0.0); g];
    for (k, a) in alpha.iter_mut().enumerate() {
        let legs = [Leg::OnCut { cut: k + 1 }];
        let (vals, _) = integrate_legs(curve, &legs, 1.0, 1, eps, &mut |xi, w, out| {
            out[0] = form.value_odd(xi, w);
        })?;
        *a = 2.0 * vals[0];
    }
    // Solve sum_j c_j A[j][k] = alpha_k  (A^T c = alpha).
    let mut at = vec![Complex64::new(0.0, 0.0); g * g];
    for j in 0..g {
        for k in 0..g {
            at[k * g + j] = pd.a_periods[j * g + k];
        }
    }
    let lu = ComplexLu::new(&at, g).map_err(|_| BuilderError::SingularNormalization)?;
    let coeffs = lu.solve(&alpha);
    form.poly = coeffs.clone();

    let mut b = vec![Complex64::new(0.0, 0.0); g];
    for (k, bp) in b.iter_mut().enumerate() {
        let legs = b_path_legs(curve, k);
        let (vals, _) = integrate_legs(curve, &legs, 1.0, 1, eps, &mut |xi, w, out| {
            out[0] = form.value_odd(xi, w);
        })?;
        *bp = 2.0 * vals[0];
    }
    Ok((coeffs, b))
}

/// Residue of `form` at a curve point by a small trapezoid contour.
pub fn contour_residue(
    curve: &HyperellipticCurve,
    form: &DiffForm,
    at: &CurvePoint,
    radius: f64,
    nodes: usize,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let ang = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
        let dz = radius * Complex64::new(ang.cos(), ang.sin());
        let xi = at.xi + dz;
        let w = at.sheet.sign() * curve.w_principal(xi);
        // d(xi)/d(ang) = i dz
        acc += form.value_full(xi, w) * Complex64::new(0.0, 1.0) * dz;
    }
    acc / Complex64::new(0.0, nodes as f64)
}

/// Construct the normalized third-kind differential with poles P, Q.
pub fn third_kind(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    p: &CurvePoint,
    q: &CurvePoint,
    tol: &Tolerance,
) -> Result<ThirdKindDifferential, BuilderError> {
    check_pole_position(curve, p.xi, 5e-3)?;
    check_pole_position(curve, q.xi, 5e-3)?;
    if (p.xi - q.xi).norm() < 1e-8 * curve.scale() && p.sheet == q.sheet {
        return Err(BuilderError::CoincidentPoles);
    }
    let wp = curve.w_at(p);
    let wq = curve.w_at(q);
    let mut form = DiffForm {
        simple_poles: vec![
            (Complex64::new(1.0, 0.0), p.xi, wp),
            (Complex64::new(-1.0, 0.0), q.xi, wq),
        ],
        ..DiffForm::default()
    };
    let (coeffs, u) = normalize_and_b_periods(curve, pd, &mut form, tol)?;
    Ok(ThirdKindDifferential {
        pole_plus: *p,
        pole_minus: *q,
        normalization_coeffs: coeffs,
        u_periods: u,
        form,
    })
}

/// Construct the normalized second-kind differential at Q whose
/// integral behaves like q(t) = c1/t + c2/t^2 near Q, by central
/// differencing of the third-kind pole against the moving-pole
/// position (step 1e-4 of the curve scale, one Richardson pass).
pub fn second_kind(
    curve: &HyperellipticCurve,
    pd: &PeriodData,
    q: &CurvePoint,
    principal: &[Complex64],
    tol: &Tolerance,
) -> Result<SecondKindDifferential, BuilderError> {
    if principal.is_empty() || principal.len() > 2 {
        return Err(BuilderError::UnsupportedPrincipalPart(principal.len()));
    }
    check_pole_position(curve, q.xi, 5e-3)?;
    // Absolute step: the essential-singularity normalization probes
    // circles down to radius 1e-3, and the finite-difference field must
    // already be accurate there.
    let h = 1e-4 * curve.scale().min(1.0);
    let wp0 = q.sheet.sign() * curve.w_principal(q.xi);

    let c1 = principal[0];
    let c2 = if principal.len() > 1 {
        principal[1]
    } else {
        Complex64::new(0.0, 0.0)
    };

    // Symmetric stencil: (weight at +s, weight at -s, s), center weight
    // implied by annihilation of constants.  eta_1 = -d/deps (Richardson
    // over h and h/2) gives int eta ~ c1/t; eta_2 = -d^2/deps^2 gives
    // c2/t^2.
    let mut stencil: Vec<(Complex64, Complex64, f64)> = Vec::new();
    if c1.norm() > 0.0 {
        stencil.push((c1 * (-4.0 / (3.0 * h)), c1 * (4.0 / (3.0 * h)), 0.5 * h));
        stencil.push((c1 * (1.0 / (6.0 * h)), c1 * (-1.0 / (6.0 * h)), h));
    }
    if c2.norm() > 0.0 {
        let s1 = 0.5 * h;
        stencil.push((
            c2 * (-4.0 / 3.0 / (s1 * s1)),
            c2 * (-4.0 / 3.0 / (s1 * s1)),
            s1,
        ));
        stencil.push((c2 * (1.0 / 3.0 / (h * h)), c2 * (1.0 / 3.0 / (h * h)), h));
    }

    let mut pairs = Vec::new();
    let mut entries = Vec::new();
    for &(w_plus, w_minus, s) in &stencil {
        pairs.push(((w_plus + w_minus), (w_plus - w_minus) * s, s * s));
        entries.push((w_plus, s, w_increment(curve, q.xi, wp0, s)));
        entries.push((w_minus, -s, w_increment(curve, q.xi, wp0, -s)));
        // Center share of the smooth residual vanishes: delta(0) = 0.
    }
    let cluster = FdCluster {
        x: q.xi,
        wp0,
        pairs,
        entries,
    };
    let mut form = DiffForm {
        clusters: vec![cluster],
        ..DiffForm::default()
    };
    let (coeffs, v) = normalize_and_b_periods(curve, pd, &mut form, tol)?;

    // Residue must vanish for a second-kind differential.
    let res = contour_residue(curve, &form, q, 0.02 * curve.scale(), 512);
    if res.norm() > 1e-6 * (1.0 + c1.norm() + c2.norm()) {
        return Err(BuilderError::ResidueLeak(res.norm()));
    }

    Ok(SecondKindDifferential {
        pole: *q,
        principal: principal.to_vec(),
        normalization_coeffs: coeffs,
        v_periods: v,
        form,
    })
}
