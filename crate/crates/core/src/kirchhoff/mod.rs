//! The Kirchhoff equations for a rigid body in an ideal fluid,
//!
//! ```text
//! p' = p x dH/dl,    l' = p x dH/dp + l x dH/dl,
//! ```
//!
//! with the two integrable parameter families (Clebsch and
//! Lyapunov-Steklov), conservation diagnostics, and the spectral
//! reduction of the Clebsch case to a genus-2 hyperelliptic flow.

mod integrate;
mod spectrum;
mod sflow;

pub use integrate::{integrate, Method, Trajectory};
pub use sflow::{linearization_rates, s_flow, STrajectory};
pub use spectrum::{clebsch_spectrum, SpectralData};

#[derive(Debug, thiserror::Error)]
pub enum KirchhoffError {
    #[error("Clebsch condition violated: residual {0:.3e}")]
    ClebschConditionViolated(f64),
    #[error("the rho quotients disagree: spread {0:.3e}")]
    RhoInconsistent(f64),
    #[error("all rho quotients are degenerate (equal a pairs)")]
    RhoDegenerate,
    #[error("adaptive step rejected below the minimum step size at t = {0}")]
    StepRejection(f64),
    #[error("spurious-root filter kept {0} of 4 roots")]
    SpuriousRootFilterFailure(usize),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("s1 and s2 collided at t = {0}")]
    CollisionDetected(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Impulse and angular impulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidState {
    pub p: [f64; 3],
    pub l: [f64; 3],
}

impl RigidState {
    pub fn new(p: [f64; 3], l: [f64; 3]) -> Self {
        Self { p, l }
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Time derivative of the state for given Hamiltonian gradients
/// (dH/dp, dH/dl); the bracket itself is Hamiltonian-agnostic.
pub fn kirchhoff_rhs(state: &RigidState, grad_p: [f64; 3], grad_l: [f64; 3]) -> RigidState {
    RigidState {
        p: cross(state.p, grad_l),
        l: {
            let a = cross(state.p, grad_p);
            let b = cross(state.l, grad_l);
            [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
        },
    }
}

/// A Hamiltonian for the Kirchhoff bracket, with its fourth integral.
pub trait KirchhoffSystem: Sync {
    fn gradients(&self, state: &RigidState) -> ([f64; 3], [f64; 3]);
    fn hamiltonian(&self, state: &RigidState) -> f64;
    fn fourth_integral(&self, state: &RigidState) -> f64;

    fn rhs(&self, state: &RigidState) -> RigidState {
        let (gp, gl) = self.gradients(state);
        kirchhoff_rhs(state, gp, gl)
    }

    /// (H1, H2, H3, H4) at a state: the Hamiltonian, the two Casimirs
    /// |p|^2 and p.l, and the case-specific fourth integral.
    fn integrals(&self, state: &RigidState) -> [f64; 4] {
        [
            self.hamiltonian(state),
            dot(state.p, state.p),
            dot(state.p, state.l),
            self.fourth_integral(state),
        ]
    }
}

/// Clebsch case: H = (1/2) sum(a_k p_k^2 + b_k l_k^2) under
/// (a2-a3)/b1 + (a3-a1)/b2 + (a1-a2)/b3 = 0, with the fourth integral
/// H4 = (1/2) sum(b_k p_k^2 + rho l_k^2).
#[derive(Debug, Clone)]
pub struct ClebschParams {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub rho: f64,
}

impl ClebschParams {
    pub fn new(a: [f64; 3], b: [f64; 3]) -> Result<Self, KirchhoffError> {
        let scale = a.iter().chain(b.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        let condition =
            (a[1] - a[2]) / b[0] + (a[2] - a[0]) / b[1] + (a[0] - a[1]) / b[2];
        if condition.abs() > 1e-12 * scale.max(1.0) {
            return Err(KirchhoffError::ClebschConditionViolated(condition.abs()));
        }
        let rho = Self::rho_from(a, b, true)?;
        Ok(Self { a, b, rho })
    }

    /// Construct without the condition check; used for perturbation
    /// controls.  rho comes from the first non-degenerate quotient.
    pub fn new_unchecked(a: [f64; 3], b: [f64; 3]) -> Result<Self, KirchhoffError> {
        let rho = Self::rho_from(a, b, false)?;
        Ok(Self { a, b, rho })
    }

    fn rho_from(a: [f64; 3], b: [f64; 3], strict: bool) -> Result<f64, KirchhoffError> {
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let quotients: Vec<f64> = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
            .iter()
            .filter_map(|&(i, j, k)| {
                let da = a[j] - a[k];
                if da.abs() <= 1e-12 * scale.max(1.0) {
                    None
                } else {
                    Some(b[i] * (b[j] - b[k]) / da)
                }
            })
            .collect();
        if quotients.is_empty() {
            return Err(KirchhoffError::RhoDegenerate);
        }
        let spread = quotients
            .iter()
            .fold(0.0f64, |m, q| m.max((q - quotients[0]).abs()));
        if strict && spread > 1e-12 * quotients[0].abs().max(1.0) {
            return Err(KirchhoffError::RhoInconsistent(spread));
        }
        Ok(quotients[0])
    }
}

impl KirchhoffSystem for ClebschParams {
    fn gradients(&self, s: &RigidState) -> ([f64; 3], [f64; 3]) {
        (
            [self.a[0] * s.p[0], self.a[1] * s.p[1], self.a[2] * s.p[2]],
            [self.b[0] * s.l[0], self.b[1] * s.l[1], self.b[2] * s.l[2]],
        )
    }

    fn hamiltonian(&self, s: &RigidState) -> f64 {
        0.5 * (0..3)
            .map(|k| self.a[k] * s.p[k] * s.p[k] + self.b[k] * s.l[k] * s.l[k])
            .sum::<f64>()
    }

    fn fourth_integral(&self, s: &RigidState) -> f64 {
        0.5 * (0..3)
            .map(|k| self.b[k] * s.p[k] * s.p[k] + self.rho * s.l[k] * s.l[k])
            .sum::<f64>()
    }
}

/// Lyapunov-Steklov case: a_k, c_k, d_k derived from (A, B, C, b).
#[derive(Debug, Clone)]
pub struct SteklovParams {
    pub big_a: f64,
    pub big_b: f64,
    pub big_c: f64,
    pub b: [f64; 3],
    pub a: [f64; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
}

impl SteklovParams {
    pub fn new(big_a: f64, big_b: f64, big_c: f64, b: [f64; 3]) -> Self {
        let diffs = [b[1] - b[2], b[2] - b[0], b[0] - b[1]];
        let a = [
            big_a * big_a * b[0] * diffs[0] * diffs[0] + big_b,
            big_a * big_a * b[1] * diffs[1] * diffs[1] + big_b,
            big_a * big_a * b[2] * diffs[2] * diffs[2] + big_b,
        ];
        let c = [
            big_a * b[1] * b[2] + big_c,
            big_a * b[0] * b[2] + big_c,
            big_a * b[0] * b[1] + big_c,
        ];
        let d = [
            big_a * big_a * diffs[0] * diffs[0],
            big_a * big_a * diffs[1] * diffs[1],
            big_a * big_a * diffs[2] * diffs[2],
        ];
        Self {
            big_a,
            big_b,
            big_c,
            b,
            a,
            c,
            d,
        }
    }
}

impl KirchhoffSystem for SteklovParams {
    fn gradients(&self, s: &RigidState) -> ([f64; 3], [f64; 3]) {
        (
            [
                self.a[0] * s.p[0] + self.c[0] * s.l[0],
                self.a[1] * s.p[1] + self.c[1] * s.l[1],
                self.a[2] * s.p[2] + self.c[2] * s.l[2],
            ],
            [
                self.b[0] * s.l[0] + self.c[0] * s.p[0],
                self.b[1] * s.l[1] + self.c[1] * s.p[1],
                self.b[2] * s.l[2] + self.c[2] * s.p[2],
            ],
        )
    }

    fn hamiltonian(&self, s: &RigidState) -> f64 {
        (0..3)
            .map(|k| {
                0.5 * (self.a[k] * s.p[k] * s.p[k] + self.b[k] * s.l[k] * s.l[k])
                    + self.c[k] * s.p[k] * s.l[k]
            })
            .sum()
    }

    fn fourth_integral(&self, s: &RigidState) -> f64 {
        (0..3)
            .map(|k| {
                0.5 * (self.d[k] * s.p[k] * s.p[k] + s.l[k] * s.l[k])
                    - self.big_a * self.b[k] * s.p[k] * s.l[k]
            })
            .sum()
    }
}
