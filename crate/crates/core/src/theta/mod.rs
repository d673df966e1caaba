//! Riemann theta functions in arbitrary genus.
//!
//! The series
//!
//! ```text
//! theta(z|B) = sum_{m in Z^g} exp(pi i <Bm,m> + 2 pi i <z,m>)
//! ```
//!
//! converges for any symmetric B with positive-definite imaginary part.
//! Evaluation reduces the argument modulo the period lattice Z^g + B Z^g,
//! sums the reduced series over the integer points of a truncation
//! ellipsoid, and reattaches the exponential reduction factor into the
//! log-scale of a [`ScaledComplex`].

mod characteristic;
mod eval;
mod identities;
mod riemann;

pub use characteristic::{
    enumerate_half_periods, half_period_parity, Characteristic, Parity,
};
pub use eval::{
    theta, theta_char, theta_derivative, theta_gradient, theta_magnitude,
    theta_with_derivatives, theta_with_derivatives_scaled,
};
pub use identities::{addition_identity_check, four_term_partner_characteristics, IdentityCheck};
pub use riemann::{validate_riemann_matrix, RiemannMatrix};

/// Evaluation tolerances for the theta series.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Target relative error of the truncated series.
    pub eps: f64,
    /// Cap on the truncation radius in the ellipsoid metric.
    pub max_radius: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            max_radius: 32.0,
        }
    }
}

impl Tolerance {
    pub fn with_eps(eps: f64) -> Self {
        assert!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
        Self {
            eps,
            ..Self::default()
        }
    }
}

/// Errors in theta evaluation and the surrounding combinatorics.
#[derive(Debug, thiserror::Error)]
pub enum ThetaError {
    #[error("matrix is not symmetric (defect {defect:.3e})")]
    NotSymmetric { defect: f64 },
    #[error("imaginary part is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix entries must be finite")]
    NonFiniteEntries,
    #[error("matrix must be square and non-empty")]
    BadShape,
    #[error("truncation radius {needed:.2} exceeds the cap {cap:.2}")]
    RadiusExceeded { needed: f64, cap: f64 },
    #[error("derivative order {order} exceeds the supported maximum 3")]
    OrderTooHigh { order: u32 },
    #[error("characteristic entries must be 0 or 1/2 for half-period operations")]
    NotHalfPeriod,
    #[error("genus {g} too large for half-period enumeration (max 8)")]
    GenusTooLarge { g: usize },
    #[error("bad identity configuration: {0}")]
    BadConfiguration(String),
}
