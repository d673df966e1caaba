//! Theta characteristics and half-period combinatorics.

use super::ThetaError;

/// A pair of real g-vectors (alpha, beta) shifting the theta series:
///
/// ```text
/// theta[alpha; beta](z|B)
///   = sum_m exp(pi i <B(m+alpha), m+alpha> + 2 pi i <z+beta, m+alpha>)
///   = exp(pi i <B alpha, alpha> + 2 pi i <z+beta, alpha>) theta(z + beta + B alpha)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Characteristic {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Characteristic {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        assert_eq!(alpha.len(), beta.len());
        assert!(
            alpha.iter().chain(beta.iter()).all(|x| x.is_finite()),
            "characteristic entries must be finite"
        );
        Self { alpha, beta }
    }

    pub fn zero(g: usize) -> Self {
        Self::new(vec![0.0; g], vec![0.0; g])
    }

    pub fn genus(&self) -> usize {
        self.alpha.len()
    }

    /// Reduce alpha and beta to [0, 1).  Removing integers from alpha is
    /// phase-free; removing integers q from beta multiplies the value by
    /// exp(2 pi i <q, alpha>).  Returns the reduced characteristic and the
    /// phase exponent (a real multiple of 2 pi, kept as <q, alpha_reduced>).
    pub fn reduced(&self) -> (Characteristic, f64) {
        let alpha: Vec<f64> = self.alpha.iter().map(|&a| a - a.floor()).collect();
        let mut q_dot_alpha = 0.0;
        let beta: Vec<f64> = self
            .beta
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                let f = b.floor();
                q_dot_alpha += f * alpha[j];
                b - f
            })
            .collect();
        (Characteristic { alpha, beta }, q_dot_alpha)
    }

    /// True when every entry is (numerically) 0 or 1/2.
    pub fn is_half_period(&self) -> bool {
        self.alpha
            .iter()
            .chain(self.beta.iter())
            .all(|&x| x.abs() < 1e-12 || (x - 0.5).abs() < 1e-12)
    }
}

/// Parity of a half-period characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Parity of a half-period: even iff 4 <alpha, beta> is an even integer.
pub fn half_period_parity(chr: &Characteristic) -> Result<Parity, ThetaError> {
    if !chr.is_half_period() {
        return Err(ThetaError::NotHalfPeriod);
    }
    let four_dot: f64 = 4.0
        * chr
            .alpha
            .iter()
            .zip(&chr.beta)
            .map(|(a, b)| a * b)
            .sum::<f64>();
    let n = four_dot.round() as i64;
    Ok(if n % 2 == 0 { Parity::Even } else { Parity::Odd })
}

/// All 4^g half-periods with their parities.  The even count is
/// 2^(g-1) (2^g + 1) and the odd count 2^(g-1) (2^g - 1).
pub fn enumerate_half_periods(g: usize) -> Result<Vec<(Characteristic, Parity)>, ThetaError> {
    if g == 0 || g > 8 {
        return Err(ThetaError::GenusTooLarge { g });
    }
    let mut out = Vec::with_capacity(1 << (2 * g));
    for bits in 0u32..(1 << (2 * g)) {
        let alpha: Vec<f64> = (0..g)
            .map(|j| if bits >> j & 1 == 1 { 0.5 } else { 0.0 })
            .collect();
        let beta: Vec<f64> = (0..g)
            .map(|j| if bits >> (g + j) & 1 == 1 { 0.5 } else { 0.0 })
            .collect();
        let chr = Characteristic::new(alpha, beta);
        let parity = half_period_parity(&chr)?;
        out.push((chr, parity));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_basics() {
        let g1_zero = Characteristic::zero(1);
        assert_eq!(half_period_parity(&g1_zero).unwrap(), Parity::Even);
        let theta1 = Characteristic::new(vec![0.5], vec![0.5]);
        assert_eq!(half_period_parity(&theta1).unwrap(), Parity::Odd);
        // g=2, alpha=beta=(1/2,1/2): 4<a,b> = 2, even.
        let g2 = Characteristic::new(vec![0.5, 0.5], vec![0.5, 0.5]);
        assert_eq!(half_period_parity(&g2).unwrap(), Parity::Even);
    }

    #[test]
    fn non_half_period_rejected() {
        let chr = Characteristic::new(vec![0.25], vec![0.0]);
        assert!(matches!(
            half_period_parity(&chr),
            Err(ThetaError::NotHalfPeriod)
        ));
    }

    #[test]
    fn census_matches_closed_form() {
        for g in 1..=4 {
            let all = enumerate_half_periods(g).unwrap();
            assert_eq!(all.len(), 1 << (2 * g));
            let even = all.iter().filter(|(_, p)| *p == Parity::Even).count();
            let odd = all.len() - even;
            let expect_even = (1 << (g - 1)) * ((1 << g) + 1);
            let expect_odd = (1 << (g - 1)) * ((1 << g) - 1);
            assert_eq!(even, expect_even);
            assert_eq!(odd, expect_odd);
        }
        assert!(enumerate_half_periods(9).is_err());
    }

    #[test]
    fn reduction_tracks_beta_phase() {
        let chr = Characteristic::new(vec![1.5, 0.25], vec![-0.5, 2.0]);
        let (red, q_dot_alpha) = chr.reduced();
        assert_eq!(red.alpha, vec![0.5, 0.25]);
        assert_eq!(red.beta, vec![0.5, 0.0]);
        // q = (-1, 2), alpha_red = (0.5, 0.25) => q.alpha = -0.5 + 0.5 = 0
        assert!((q_dot_alpha - 0.0).abs() < 1e-15);
    }
}
