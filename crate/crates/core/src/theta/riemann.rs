//! Validated Riemann matrices with cached Cholesky factor and lattice data.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::ThetaError;
use crate::numeric::{cholesky_spd, solve_cholesky};

/// Relative symmetry tolerance; inputs from quadrature upstream are
/// near-symmetric and get exactly symmetrized after the check passes.
const SYMMETRY_TOL: f64 = 1e-12;

/// Default cache accuracy.  Radius is sized for this eps so that typical
/// evaluations never re-enumerate the lattice.
const CACHE_EPS: f64 = 1e-13;

/// A g x g complex symmetric matrix with positive-definite imaginary
/// part, together with the caches used by theta evaluation: the Cholesky
/// factor of Im B, and an enumeration of the integer points inside the
/// default truncation ellipsoid with their quadratic-form phases.
#[derive(Debug, Clone)]
pub struct RiemannMatrix {
    g: usize,
    entries: Vec<Complex64>,
    /// Lower-triangular Cholesky factor of Im B, row-major.
    cholesky_im: Vec<f64>,
    /// Flattened integer points (g per entry), sorted by ellipsoid norm.
    points: Vec<i64>,
    /// ||L^T m|| for each cached point.
    norms: Vec<f64>,
    /// pi i <Bm, m> for each cached point.
    phases: Vec<Complex64>,
    /// Radius the cache covers (including the shift margin).
    cache_radius: f64,
    /// Margin accounting for the fractional shift |c_j| <= 1/2.
    shift_margin: f64,
}

/// Spec-facing constructor name.
pub fn validate_riemann_matrix(entries: &[Vec<Complex64>]) -> Result<RiemannMatrix, ThetaError> {
    RiemannMatrix::new(entries)
}

impl RiemannMatrix {
    pub fn new(rows: &[Vec<Complex64>]) -> Result<Self, ThetaError> {
        let g = rows.len();
        if g == 0 || rows.iter().any(|r| r.len() != g) {
            return Err(ThetaError::BadShape);
        }
        let mut entries = Vec::with_capacity(g * g);
        for row in rows {
            entries.extend_from_slice(row);
        }
        Self::from_flat(g, entries)
    }

    pub fn from_flat(g: usize, entries: Vec<Complex64>) -> Result<Self, ThetaError> {
        if g == 0 || entries.len() != g * g {
            return Err(ThetaError::BadShape);
        }
        if entries.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
            return Err(ThetaError::NonFiniteEntries);
        }
        let mut max_abs: f64 = 0.0;
        let mut defect: f64 = 0.0;
        for j in 0..g {
            for k in 0..g {
                max_abs = max_abs.max(entries[j * g + k].norm());
                defect = defect.max((entries[j * g + k] - entries[k * g + j]).norm());
            }
        }
        if defect > SYMMETRY_TOL * (1.0 + max_abs) {
            return Err(ThetaError::NotSymmetric { defect });
        }
        // Enforce exact symmetry after validation.
        let mut sym = entries.clone();
        for j in 0..g {
            for k in 0..g {
                sym[j * g + k] = 0.5 * (entries[j * g + k] + entries[k * g + j]);
            }
        }
        let im: Vec<f64> = sym.iter().map(|e| e.im).collect();
        let cholesky_im = cholesky_spd(&im, g).ok_or(ThetaError::NotPositiveDefinite)?;

        let mut rm = Self {
            g,
            entries: sym,
            cholesky_im,
            points: Vec::new(),
            norms: Vec::new(),
            phases: Vec::new(),
            cache_radius: 0.0,
            shift_margin: 0.0,
        };
        rm.shift_margin = rm.shift_margin_bound();
        let r = (((1.0 / CACHE_EPS).ln() + 5.0) / PI).sqrt() + rm.shift_margin + 0.5;
        rm.rebuild_cache(r);
        Ok(rm)
    }

    fn shift_margin_bound(&self) -> f64 {
        // || L^T c || <= ||L||_F * sqrt(g) / 2 for |c_j| <= 1/2.
        let frob: f64 = self.cholesky_im.iter().map(|v| v * v).sum::<f64>().sqrt();
        frob * (self.g as f64).sqrt() * 0.5
    }

    fn rebuild_cache(&mut self, radius: f64) {
        let pts = self.enumerate_ellipsoid(radius, &vec![0.0; self.g]);
        let mut indexed: Vec<(f64, Vec<i64>)> = pts;
        indexed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        self.points.clear();
        self.norms.clear();
        self.phases.clear();
        for (norm, m) in indexed {
            self.norms.push(norm);
            self.phases.push(self.quadratic_phase(&m));
            self.points.extend_from_slice(&m);
        }
        self.cache_radius = radius;
    }

    /// pi i <Bm, m>.
    pub fn quadratic_phase(&self, m: &[i64]) -> Complex64 {
        let g = self.g;
        let mut q = Complex64::new(0.0, 0.0);
        for j in 0..g {
            if m[j] == 0 {
                continue;
            }
            for k in 0..g {
                if m[k] == 0 {
                    continue;
                }
                q += self.entries[j * g + k] * ((m[j] * m[k]) as f64);
            }
        }
        Complex64::new(0.0, PI) * q
    }

    /// Integer points m with ||L^T (m + c)|| <= radius, with their norms.
    pub fn enumerate_ellipsoid(&self, radius: f64, c: &[f64]) -> Vec<(f64, Vec<i64>)> {
        let g = self.g;
        let u = &self.cholesky_im; // use as upper-triangular via transpose access
        let mut out = Vec::new();
        let mut m = vec![0i64; g];
        // Recurse from the last coordinate down; U = L^T so U[j][k] = l[k*g + j] (k >= j).
        fn recurse(
            level: usize,
            g: usize,
            l: &[f64],
            c: &[f64],
            radius2: f64,
            acc: f64,
            partial: &mut Vec<f64>,
            m: &mut Vec<i64>,
            out: &mut Vec<(f64, Vec<i64>)>,
        ) {
            let j = level;
            // x_j = U[j][j] (m_j + c_j) + t_j, with t_j from already-chosen coords.
            let mut t = 0.0;
            for k in j + 1..g {
                t += l[k * g + j] * (m[k] as f64 + c[k]);
            }
            let ujj = l[j * g + j];
            let rem = radius2 - acc;
            if rem < 0.0 {
                return;
            }
            let r = rem.sqrt();
            let lo = ((-r - t) / ujj - c[j]).ceil() as i64;
            let hi = ((r - t) / ujj - c[j]).floor() as i64;
            for mj in lo..=hi {
                m[j] = mj;
                let x = ujj * (mj as f64 + c[j]) + t;
                let acc2 = acc + x * x;
                if acc2 > radius2 {
                    continue;
                }
                if j == 0 {
                    out.push((acc2.sqrt(), m.clone()));
                } else {
                    recurse(j - 1, g, l, c, radius2, acc2, partial, m, out);
                }
            }
            m[j] = 0;
        }
        let mut partial = vec![0.0; g];
        recurse(
            g - 1,
            g,
            u,
            c,
            radius * radius,
            0.0,
            &mut partial,
            &mut m,
            &mut out,
        );
        out
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.g + k]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Column f_j = B e_j.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.g).map(|k| self.entries[k * self.g + j]).collect()
    }

    pub fn cholesky_im(&self) -> &[f64] {
        &self.cholesky_im
    }

    /// B v for a complex vector v.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let g = self.g;
        (0..g)
            .map(|j| (0..g).map(|k| self.entries[j * g + k] * v[k]).sum())
            .collect()
    }

    /// B m for an integer vector m.
    pub fn mul_int_vec(&self, m: &[i64]) -> Vec<Complex64> {
        let v: Vec<Complex64> = m.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect();
        self.mul_vec(&v)
    }

    /// Solve (Im B) x = y.
    pub fn solve_im(&self, y: &[f64]) -> Vec<f64> {
        solve_cholesky(&self.cholesky_im, self.g, y)
    }

    /// Closest lattice vector: integers (n, m) with v ~ n + B m, plus the
    /// residual v - n - B m.
    pub fn lattice_reduce(&self, v: &[Complex64]) -> (Vec<i64>, Vec<i64>, Vec<Complex64>) {
        let g = self.g;
        let im: Vec<f64> = v.iter().map(|z| z.im).collect();
        let mf = self.solve_im(&im);
        let m: Vec<i64> = mf.iter().map(|&x| x.round() as i64).collect();
        let bm = self.mul_int_vec(&m);
        let n: Vec<i64> = (0..g).map(|j| (v[j] - bm[j]).re.round() as i64).collect();
        let res: Vec<Complex64> = (0..g)
            .map(|j| v[j] - bm[j] - Complex64::new(n[j] as f64, 0.0))
            .collect();
        (n, m, res)
    }

    /// Distance of v to the period lattice Z^g + B Z^g.
    pub fn lattice_distance(&self, v: &[Complex64]) -> f64 {
        let (_, _, res) = self.lattice_reduce(v);
        res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn cached_points(&self) -> (&[i64], &[f64], &[Complex64], f64) {
        (&self.points, &self.norms, &self.phases, self.cache_radius)
    }

    pub(crate) fn shift_margin(&self) -> f64 {
        self.shift_margin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_case_g1() {
        let b = RiemannMatrix::new(&[vec![c(0.0, 1.0)]]).unwrap();
        assert_eq!(b.genus(), 1);
        assert!((b.cholesky_im()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_case_g2() {
        let b = RiemannMatrix::new(&[
            vec![c(0.0, 1.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 2.0)],
        ])
        .unwrap();
        assert_eq!(b.genus(), 2);
    }

    #[test]
    fn sign_flip_rejected() {
        let err = RiemannMatrix::new(&[vec![c(0.0, -1.0)]]).unwrap_err();
        assert!(matches!(err, ThetaError::NotPositiveDefinite));
    }

    #[test]
    fn asymmetric_rejected() {
        let err = RiemannMatrix::new(&[
            vec![c(0.0, 1.0), c(0.5, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0)],
        ])
        .unwrap_err();
        assert!(matches!(err, ThetaError::NotSymmetric { .. }));
    }

    #[test]
    fn lattice_reduce_roundtrip() {
        let b = RiemannMatrix::new(&[
            vec![c(0.3, 1.0), c(0.1, 0.2)],
            vec![c(0.1, 0.2), c(-0.2, 1.5)],
        ])
        .unwrap();
        let n = [2i64, -1];
        let m = [1i64, 3];
        let bm = b.mul_int_vec(&m);
        let v: Vec<Complex64> = (0..2)
            .map(|j| bm[j] + c(n[j] as f64 + 0.1, 0.0) + c(0.0, 0.05))
            .collect();
        let (n2, m2, res) = b.lattice_reduce(&v);
        assert_eq!(m2, m.to_vec());
        assert_eq!(n2, n.to_vec());
        let norm: f64 = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm < 0.2);
    }

    #[test]
    fn ellipsoid_enumeration_counts_points() {
        let b = RiemannMatrix::new(&[vec![c(0.0, 1.0)]]).unwrap();
        let pts = b.enumerate_ellipsoid(3.2, &[0.0]);
        // m in [-3, 3]
        assert_eq!(pts.len(), 7);
    }
}
