//! Hyperelliptic curves w^2 = prod_{j=1}^{2g+2} (xi - xi_j): homology,
//! period matrices, Abel maps, Riemann constants, Jacobi inversion and
//! theta-divisor membership.
//!
//! The branch points are sorted by real part (ties by imaginary part)
//! and paired consecutively into g+1 branch cuts.  Because of the sort,
//! every cut lives in its own vertical strip of the plane, which makes a
//! concrete symplectic homology basis constructible: the cycle a_k is a
//! loop around cut k+1, and b_k runs from the end of cut 1 to the start
//! of cut k+1 over a high-altitude detour that clears every cut, doubled
//! across the two sheets.
//!
//! The principal sheet of w is fixed by per-cut square roots
//! s_m(xi) = half_m sqrt(u-1) sqrt(u+1), u = (xi - mid_m)/half_m, each
//! analytic off its own cut; w = prod_m s_m.

mod abel;
mod inversion;
mod periods;
mod quad;

pub use abel::{abel_map, SheetWalker};
pub use inversion::{jacobi_inversion, theta_divisor_membership, zero_count};
pub use periods::{period_matrix, riemann_constants, PeriodData, RiemannConstants};
pub(crate) use periods::b_path_legs;
pub(crate) use quad::{integrate_legs, Leg};

/// Test-support entry point: integrate caller-supplied integrands along
/// a straight segment with sheet tracking.
#[doc(hidden)]
pub fn integrate_legs_pub(
    curve: &HyperellipticCurve,
    from: Complex64,
    to: Complex64,
    start_sign: f64,
    dims: usize,
    eps: f64,
    f: &mut dyn FnMut(Complex64, Complex64, &mut [Complex64]),
) -> Result<(Vec<Complex64>, f64), CurveError> {
    integrate_legs(curve, &[Leg::Segment { from, to }], start_sign, dims, eps, f)
}

use num_complex::Complex64;

use crate::theta::ThetaError;

#[derive(Debug, thiserror::Error)]
pub enum CurveError {
    #[error("branch points collide (min separation {0:.3e})")]
    CollidingBranchPoints(f64),
    #[error("need an even number of branch points, got {0}")]
    OddCount(usize),
    #[error("need at least 4 branch points, got {0}")]
    TooFewBranchPoints(usize),
    #[error("branch points must be finite")]
    NonFinite,
    #[error("quadrature failed to converge within the node budget")]
    QuadratureStall,
    #[error("period matrix rejected: {0}")]
    MatrixValidation(#[from] ThetaError),
    #[error("path passes through branch point {0}")]
    PathThroughBranchPoint(usize),
    #[error("theta function vanishes identically on the sampled mesh")]
    IdenticallyZero,
    #[error("divisor is special: inversion theta vanishes identically")]
    SpecialDivisor,
    #[error("Newton refinement diverged during inversion")]
    NewtonDivergence,
    #[error("zero count {0:.6} is not within tolerance of an integer")]
    NonIntegerCount(f64),
    #[error("numerical inversion supports genus 1 and 2, got {0}")]
    UnsupportedGenus(usize),
    #[error("inversion sum check failed with lattice defect {0:.3e}")]
    VerificationFailed(f64),
    #[error("linear solve failed: {0}")]
    Singular(#[from] crate::numeric::SingularMatrix),
}

/// Which of the two sheets of w a point lies on, relative to the
/// principal branch.  At branch points w = 0 and the tag is irrelevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s >= 0.0 {
            Sheet::Plus
        } else {
            Sheet::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sheet::Plus => Sheet::Minus,
            Sheet::Minus => Sheet::Plus,
        }
    }
}

/// A point of the curve: plane coordinate plus sheet tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub xi: Complex64,
    pub sheet: Sheet,
}

impl CurvePoint {
    pub fn new(xi: Complex64, sheet: Sheet) -> Self {
        Self { xi, sheet }
    }

    pub fn plus(xi: Complex64) -> Self {
        Self::new(xi, Sheet::Plus)
    }

    pub fn minus(xi: Complex64) -> Self {
        Self::new(xi, Sheet::Minus)
    }

    /// The hyperelliptic involution (w, xi) -> (-w, xi).
    pub fn involution(self) -> Self {
        Self::new(self.xi, self.sheet.flip())
    }
}

/// A finite formal sum of curve points with integer multiplicities.
#[derive(Debug, Clone, Default)]
pub struct Divisor {
    pub points: Vec<(CurvePoint, i64)>,
}

impl Divisor {
    pub fn of_points(points: &[CurvePoint]) -> Self {
        Self {
            points: points.iter().map(|&p| (p, 1)).collect(),
        }
    }

    pub fn degree(&self) -> i64 {
        self.points.iter().map(|(_, m)| m).sum()
    }
}

/// One branch cut, pairing two consecutive sorted branch points.
#[derive(Debug, Clone, Copy)]
pub struct Cut {
    pub start: Complex64,
    pub end: Complex64,
    pub mid: Complex64,
    pub half: Complex64,
}

/// The curve data: sorted branch points, cuts, and the geometric scale
/// used by proximity checks and routing.
#[derive(Debug, Clone)]
pub struct HyperellipticCurve {
    branch_points: Vec<Complex64>,
    cuts: Vec<Cut>,
    genus: usize,
    scale: f64,
    top_altitude: f64,
}

/// Sort, pair and validate 2g+2 distinct branch points.
pub fn build_curve(branch_points: &[Complex64]) -> Result<HyperellipticCurve, CurveError> {
    HyperellipticCurve::new(branch_points)
}

impl HyperellipticCurve {
    pub fn new(branch_points: &[Complex64]) -> Result<Self, CurveError> {
        let n = branch_points.len();
        if n % 2 != 0 {
            return Err(CurveError::OddCount(n));
        }
        if n < 4 {
            return Err(CurveError::TooFewBranchPoints(n));
        }
        if branch_points
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(CurveError::NonFinite);
        }
        let mut pts = branch_points.to_vec();
        pts.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        let mut scale: f64 = 0.0;
        for p in &pts {
            for q in &pts {
                scale = scale.max((p - q).norm());
            }
        }
        let mut min_sep = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                min_sep = min_sep.min((pts[i] - pts[j]).norm());
            }
        }
        if min_sep <= 1e-10 * scale {
            return Err(CurveError::CollidingBranchPoints(min_sep));
        }
        let cuts: Vec<Cut> = pts
            .chunks(2)
            .map(|pair| Cut {
                start: pair[0],
                end: pair[1],
                mid: 0.5 * (pair[0] + pair[1]),
                half: 0.5 * (pair[1] - pair[0]),
            })
            .collect();
        let top_altitude = pts.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max)
            + 0.75 * scale;
        Ok(Self {
            genus: n / 2 - 1,
            branch_points: pts,
            cuts,
            scale,
            top_altitude,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn branch_points(&self) -> &[Complex64] {
        &self.branch_points
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Altitude of the cut-clearing detour used by b-cycle paths.
    pub fn top_altitude(&self) -> f64 {
        self.top_altitude
    }

    /// The base point of Abel maps: the first sorted branch point.
    pub fn base_point(&self) -> Complex64 {
        self.branch_points[0]
    }

    pub fn is_branch_point(&self, xi: Complex64) -> bool {
        self.branch_points
            .iter()
            .any(|&b| (xi - b).norm() <= 1e-12 * self.scale)
    }

    pub fn nearest_branch_point(&self, xi: Complex64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, &b) in self.branch_points.iter().enumerate() {
            let d = (xi - b).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// The square-root factor attached to cut m, analytic off that cut.
    pub fn cut_sqrt(&self, m: usize, xi: Complex64) -> Complex64 {
        let cut = &self.cuts[m];
        let u = (xi - cut.mid) / cut.half;
        cut.half * (u - 1.0).sqrt() * (u + 1.0).sqrt()
    }

    /// Principal-sheet w(xi) = prod_m s_m(xi).
    pub fn w_principal(&self, xi: Complex64) -> Complex64 {
        let mut w = Complex64::new(1.0, 0.0);
        for m in 0..self.cuts.len() {
            w *= self.cut_sqrt(m, xi);
        }
        w
    }

    /// w on the tagged sheet.
    pub fn w_at(&self, p: &CurvePoint) -> Complex64 {
        p.sheet.sign() * self.w_principal(p.xi)
    }

    /// w_principal with one cut factor removed; used by on-cut quadrature.
    pub fn w_rest(&self, skip_cut: usize, xi: Complex64) -> Complex64 {
        let mut w = Complex64::new(1.0, 0.0);
        for m in 0..self.cuts.len() {
            if m != skip_cut {
                w *= self.cut_sqrt(m, xi);
            }
        }
        w
    }

    /// Distance from xi to the nearest point of any cut segment.
    pub fn distance_to_cuts(&self, xi: Complex64) -> f64 {
        self.cuts
            .iter()
            .map(|c| segment_distance(c.start, c.end, xi))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn genus_from_count() {
        let g1 = build_curve(&[
            c64(-std::f64::consts::SQRT_2, 0.0),
            c64(-1.0, 0.0),
            c64(1.0, 0.0),
            c64(std::f64::consts::SQRT_2, 0.0),
        ])
        .unwrap();
        assert_eq!(g1.genus(), 1);
        let g2 = build_curve(&[
            c64(0.0, 0.0),
            c64(1.0, 0.0),
            c64(2.0, 0.0),
            c64(3.0, 0.0),
            c64(4.0, 0.0),
            c64(5.0, 0.0),
        ])
        .unwrap();
        assert_eq!(g2.genus(), 2);
    }

    #[test]
    fn colliding_points_rejected() {
        let err = build_curve(&[c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)])
            .unwrap_err();
        assert!(matches!(err, CurveError::CollidingBranchPoints(_)));
    }

    #[test]
    fn odd_count_rejected() {
        let err = build_curve(&[c64(0.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)]).unwrap_err();
        assert!(matches!(err, CurveError::OddCount(3)));
    }

    #[test]
    fn w_squares_to_product() {
        let curve = build_curve(&[
            c64(-1.2, 0.3),
            c64(-0.1, -0.4),
            c64(0.8, 0.1),
            c64(1.7, -0.2),
            c64(2.4, 0.5),
            c64(3.3, 0.0),
        ])
        .unwrap();
        for xi in [c64(0.31, 0.9), c64(-2.0, -1.0), c64(1.9, 2.2)] {
            let w = curve.w_principal(xi);
            let mut prod = Complex64::new(1.0, 0.0);
            for &b in curve.branch_points() {
                prod *= xi - b;
            }
            assert!(
                (w * w - prod).norm() <= 1e-12 * prod.norm(),
                "w^2 mismatch at {xi}"
            );
        }
    }

    #[test]
    fn w_flips_across_a_cut_only() {
        let curve = build_curve(&[
            c64(-1.0, 0.0),
            c64(0.0, 0.0),
            c64(2.0, 0.0),
            c64(3.0, 0.0),
        ])
        .unwrap();
        // Crossing the first cut flips the value.
        let above = curve.w_principal(c64(-0.5, 1e-8));
        let below = curve.w_principal(c64(-0.5, -1e-8));
        assert!((above + below).norm() <= 1e-6 * above.norm());
        // Crossing the gap between cuts does not.
        let above = curve.w_principal(c64(1.0, 1e-8));
        let below = curve.w_principal(c64(1.0, -1e-8));
        assert!((above - below).norm() <= 1e-6 * above.norm());
    }

    #[test]
    fn segment_distance_basics() {
        let d = segment_distance(c64(0.0, 0.0), c64(2.0, 0.0), c64(1.0, 0.5));
        assert!((d - 0.5).abs() < 1e-14);
        let d = segment_distance(c64(0.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0));
        assert!((d - 1.0).abs() < 1e-14);
    }
}
