//! Shared fixtures for the kernel benchmarks.

use num_complex::Complex64;
use thetakit::hyperelliptic::HyperellipticCurve;
use thetakit::theta::RiemannMatrix;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A moderately off-diagonal Riemann matrix of the given genus.
pub fn bench_matrix(g: usize) -> RiemannMatrix {
    let mut entries = Vec::with_capacity(g * g);
    for j in 0..g {
        for k in 0..g {
            let re = 0.1 / (1.0 + (j as f64 - k as f64).abs());
            let im = if j == k {
                1.0 + 0.2 * j as f64
            } else {
                0.25 / (1.0 + (j as f64 - k as f64).abs())
            };
            entries.push(c64(re, im));
        }
    }
    RiemannMatrix::from_flat(g, entries).expect("bench matrix is valid")
}

/// The genus-2 curve used by the inversion tests.
pub fn bench_curve_g2() -> HyperellipticCurve {
    thetakit::hyperelliptic::build_curve(&[
        c64(-2.3, 0.0),
        c64(-1.1, 0.4),
        c64(0.2, -0.3),
        c64(1.0, 0.2),
        c64(2.2, -0.1),
        c64(3.1, 0.3),
    ])
    .expect("bench curve is valid")
}
