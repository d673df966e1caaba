//! Small dense linear algebra and quadrature helpers shared by the
//! higher modules.  Everything here works on genus-sized problems
//! (g <= 8), so simple row-major Vec storage is enough.

use num_complex::Complex64;

/// Kahan-compensated complex accumulator.
#[derive(Default, Clone, Copy)]
pub struct KahanSum {
    sum: Complex64,
    comp: Complex64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: Complex64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum
    }
}

/// Cholesky factor L (lower triangular, row-major) of a symmetric
/// positive-definite matrix, or None if a pivot fails.
pub fn cholesky_spd(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        l[j * n + j] = d.sqrt();
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / l[j * n + j];
        }
    }
    Some(l)
}

/// Solve (L L^T) x = b given the Cholesky factor L.
pub fn solve_cholesky(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// LU decomposition with partial pivoting for complex matrices.
pub struct ComplexLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

#[derive(Debug, thiserror::Error)]
#[error("singular matrix in complex LU solve")]
pub struct SingularMatrix;

impl ComplexLu {
    pub fn new(a: &[Complex64], n: usize) -> Result<Self, SingularMatrix> {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut piv = col;
            let mut best = lu[perm[col] * n + col].norm();
            for row in col + 1..n {
                let v = lu[perm[row] * n + col].norm();
                if v > best {
                    best = v;
                    piv = row;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(SingularMatrix);
            }
            perm.swap(col, piv);
            let p = perm[col];
            for row in col + 1..n {
                let r = perm[row];
                let f = lu[r * n + col] / lu[p * n + col];
                lu[r * n + col] = f;
                for k in col + 1..n {
                    let sub = f * lu[p * n + k];
                    lu[r * n + k] -= sub;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for k in 0..i {
                s -= self.lu[self.perm[i] * n + k] * y[k];
            }
            y[i] = s;
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.lu[self.perm[i] * n + k] * x[k];
            }
            x[i] = s / self.lu[self.perm[i] * n + i];
        }
        x
    }

    /// Solve A X = B column by column; `b` is row-major n x m.
    pub fn solve_matrix(&self, b: &[Complex64], m: usize) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * m];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..m {
            for i in 0..n {
                col[i] = b[i * m + j];
            }
            let x = self.solve(&col);
            for i in 0..n {
                out[i * m + j] = x[i];
            }
        }
        out
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on
/// the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Arithmetic-geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 1e-16 * an.abs() {
            return an;
        }
        a = an;
        b = bn;
    }
    a
}

/// Complete elliptic integral K(k) via the AGM, with modulus k (not m = k^2).
pub fn elliptic_k_agm(k: f64) -> f64 {
    let kp = (1.0 - k * k).sqrt();
    std::f64::consts::PI / (2.0 * agm(1.0, kp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_recovers_identity() {
        let a = vec![4.0, 2.0, 2.0, 3.0];
        let l = cholesky_spd(&a, 2).unwrap();
        // L L^T == A
        let a00 = l[0] * l[0];
        let a10 = l[2] * l[0];
        let a11 = l[2] * l[2] + l[3] * l[3];
        assert!((a00 - 4.0).abs() < 1e-14);
        assert!((a10 - 2.0).abs() < 1e-14);
        assert!((a11 - 3.0).abs() < 1e-14);
        let x = solve_cholesky(&l, 2, &[8.0, 7.0]);
        assert!((4.0 * x[0] + 2.0 * x[1] - 8.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(cholesky_spd(&[-1.0], 1).is_none());
        assert!(cholesky_spd(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn complex_lu_solves() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let a = vec![one, i, -i, one + one];
        let lu = ComplexLu::new(&a, 2).unwrap();
        let b = vec![one, i];
        let x = lu.solve(&b);
        let r0 = a[0] * x[0] + a[1] * x[1] - b[0];
        let r1 = a[2] * x[0] + a[3] * x[1] - b[1];
        assert!(r0.norm() < 1e-14 && r1.norm() < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        // degree-15 polynomial integrated exactly
        let integral: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| wi * (xi.powi(15) + 3.0 * xi.powi(6)))
            .sum();
        let exact = 0.0 + 3.0 * 2.0 / 7.0;
        assert!((integral - exact).abs() < 1e-13);
    }

    #[test]
    fn agm_matches_known_k() {
        // K(1/sqrt(2)) = 1.85407467730137...
        let k = elliptic_k_agm(std::f64::consts::FRAC_1_SQRT_2);
        assert!((k - 1.854074677301372).abs() < 1e-12);
    }
}
