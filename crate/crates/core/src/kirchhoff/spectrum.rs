//! Spectral reduction of the Clebsch case: roots of the radical
//! equation, the nu ratios, and the degree-5 polynomial of the
//! hyperelliptic (s1, s2) flow.

use num_complex::Complex64;

use super::KirchhoffError;

/// z-roots, nu ratios and the coefficients of
/// P5(s) = s (s - nu1^2)(s - nu2^2)(s - nu3^2)(s - nu1^2 nu2^2 nu3^2).
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub z_roots: [Complex64; 4],
    pub nu: [Complex64; 3],
    /// Coefficients of P5, ascending powers, degree 5 (length 6).
    pub p5_coeffs: [Complex64; 6],
}

impl SpectralData {
    pub fn p5_eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.p5_coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    /// The five finite branch points of w^2 = P5(s).
    pub fn p5_roots(&self) -> [Complex64; 5] {
        let zero = Complex64::new(0.0, 0.0);
        let n1 = self.nu[0] * self.nu[0];
        let n2 = self.nu[1] * self.nu[1];
        let n3 = self.nu[2] * self.nu[2];
        [zero, n1, n2, n3, n1 * n2 * n3]
    }
}

/// Durand-Kerner iteration for a monic polynomial given by ascending
/// coefficients (the leading 1 excluded).
fn durand_kerner(coeffs: &[Complex64], degree: usize) -> Vec<Complex64> {
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for k in (0..degree).rev() {
            acc = acc * z + coeffs[k];
        }
        acc
    };
    let radius = 1.0
        + coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            radius * 0.7 * Complex64::new(ang.cos(), ang.sin())
        })
        .collect();
    for _ in 0..200 {
        let mut max_step: f64 = 0.0;
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 * radius {
            break;
        }
    }
    roots
}

/// Solve A^2 (z^2 - z sum b) + B z - C + 2 D sqrt(prod(z - b_k)) = 0:
/// square to a quartic, take its roots, and keep those satisfying the
/// original equation for one square-root branch.
pub fn clebsch_spectrum(
    constants: (f64, f64, f64, f64),
    b: [f64; 3],
) -> Result<SpectralData, KirchhoffError> {
    let (big_a, big_b, big_c, big_d) = constants;
    let scale = [big_a, big_b, big_c, big_d]
        .iter()
        .fold(1.0f64, |m, v| m.max(v.abs()));
    if big_d.abs() <= 1e-12 * scale {
        return Err(KirchhoffError::DegenerateSpectrum(
            "D = 0 drops the radical term and doubles a quadratic".into(),
        ));
    }
    let sum_b = b[0] + b[1] + b[2];
    let sum_bb = b[0] * b[1] + b[0] * b[2] + b[1] * b[2];
    let prod_b = b[0] * b[1] * b[2];

    // G(z) = A^2 z^2 + (B - A^2 sum_b) z - C; quartic G^2 - 4 D^2 prod(z - b_k).
    let g2 = big_a * big_a;
    let g1 = big_b - big_a * big_a * sum_b;
    let g0 = -big_c;
    let d2 = 4.0 * big_d * big_d;
    // G^2 coefficients (degree 4), then subtract d2 (z^3 - sum_b z^2 + sum_bb z - prod_b).
    let mut quartic = [
        g0 * g0 + d2 * prod_b,
        2.0 * g0 * g1 - d2 * sum_bb,
        g1 * g1 + 2.0 * g0 * g2 + d2 * sum_b,
        2.0 * g1 * g2 - d2,
        g2 * g2,
    ];
    let lead = quartic[4];
    if lead.abs() < 1e-14 * scale {
        return Err(KirchhoffError::DegenerateSpectrum("A = 0".into()));
    }
    for c in quartic.iter_mut() {
        *c /= lead;
    }
    let monic: Vec<Complex64> = quartic[..4]
        .iter()
        .map(|&c| Complex64::new(c, 0.0))
        .collect();
    let mut roots = durand_kerner(&monic, 4);

    // Filter: each root must satisfy the unsquared equation for one
    // branch of the square root.
    let residual = |z: Complex64| -> f64 {
        let g = g2 * z * z + g1 * z + g0;
        let root = ((z - b[0]) * (z - b[1]) * (z - b[2])).sqrt();
        let term = 2.0 * big_d * root;
        let zscale = g.norm().max(term.norm()).max(1.0);
        ((g + term).norm()).min((g - term).norm()) / zscale
    };
    let accepted: Vec<Complex64> = roots
        .iter()
        .copied()
        .filter(|&z| residual(z) <= 1e-8)
        .collect();
    if accepted.len() != 4 {
        return Err(KirchhoffError::SpuriousRootFilterFailure(accepted.len()));
    }
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let mut min_sep = f64::INFINITY;
    let root_scale = roots.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    for i in 0..4 {
        for j in i + 1..4 {
            min_sep = min_sep.min((roots[i] - roots[j]).norm());
        }
    }
    if min_sep < 1e-5 * root_scale {
        return Err(KirchhoffError::DegenerateSpectrum(format!(
            "clustered z-roots, separation {min_sep:.3e}"
        )));
    }

    // nu_k from the displayed ratio with dR/dz at the roots.
    let dr = |i: usize| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for j in 0..4 {
            if j != i {
                acc *= roots[i] - roots[j];
            }
        }
        acc
    };
    let mut nu = [Complex64::new(0.0, 0.0); 3];
    for (k, nu_k) in nu.iter_mut().enumerate() {
        let term = |i: usize| (roots[i] - b[k]).sqrt() / dr(i).sqrt();
        let upper = term(2) + Complex64::new(0.0, 1.0) * term(3);
        let lower = term(0) + Complex64::new(0.0, 1.0) * term(1);
        *nu_k = upper / lower;
    }

    // P5(s) = s (s - nu1^2)(s - nu2^2)(s - nu3^2)(s - (nu1 nu2 nu3)^2).
    let n = [nu[0] * nu[0], nu[1] * nu[1], nu[2] * nu[2]];
    let last = n[0] * n[1] * n[2];
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for root in [n[0], n[1], n[2], last] {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * root;
        }
        coeffs = next;
    }
    // Multiply by s.
    let mut p5 = [Complex64::new(0.0, 0.0); 6];
    for (i, &c) in coeffs.iter().enumerate() {
        p5[i + 1] = c;
    }

    Ok(SpectralData {
        z_roots: [roots[0], roots[1], roots[2], roots[3]],
        nu,
        p5_coeffs: p5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generic_spectrum_roots_satisfy_radical_equation() {
        let spec = clebsch_spectrum((1.0, 2.0, 3.0, 0.1), [1.0, 2.0, 3.0]).unwrap();
        for z in spec.z_roots {
            let g = z * z - z * 6.0 + 2.0 * z - 3.0;
            let root = ((z - 1.0) * (z - 2.0) * (z - 3.0)).sqrt();
            let term = 2.0 * 0.1 * root;
            let r = (g + term).norm().min((g - term).norm());
            assert!(r <= 1e-8 * g.norm().max(1.0), "root {z}: residual {r}");
        }
    }

    #[test]
    fn p5_reconstruction_identity() {
        let spec = clebsch_spectrum((1.0, 2.0, 3.0, 0.1), [1.0, 2.0, 3.0]).unwrap();
        let n1 = spec.nu[0] * spec.nu[0];
        let n2 = spec.nu[1] * spec.nu[1];
        let n3 = spec.nu[2] * spec.nu[2];
        for s in [
            Complex64::new(0.3, 0.1),
            Complex64::new(-1.2, 0.7),
            Complex64::new(2.4, -0.6),
        ] {
            let direct = s * (s - n1) * (s - n2) * (s - n3) * (s - n1 * n2 * n3);
            let horner = spec.p5_eval(s);
            assert!(
                (direct - horner).norm() <= 1e-10 * direct.norm().max(1.0),
                "P5 mismatch at {s}"
            );
        }
    }

    #[test]
    fn degenerate_d_rejected() {
        let err = clebsch_spectrum((1.0, 2.0, 3.0, 0.0), [1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, KirchhoffError::DegenerateSpectrum(_)));
    }
}
