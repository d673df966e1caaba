//! Numerical Riemann theta functions and their applications.
//!
//! The crate is organized around a genus-g theta evaluator with
//! overflow-safe scaled arithmetic, and builds outward from it:
//!
//! - [`theta`]: theta series with characteristics, derivatives,
//!   half-period combinatorics and the classical addition identities.
//! - [`elliptic`]: the genus-1 layer (Jacobi theta functions,
//!   Weierstrass p, elliptic function builders).
//! - [`hyperelliptic`]: curves w^2 = prod (xi - xi_j), period matrices,
//!   Abel maps, Riemann constants and numerical Jacobi inversion.
//! - [`builders`]: abelian differentials of the second and third kind
//!   and meromorphic / Baker-Akhiezer function evaluators.
//! - [`finite_gap`]: sine-Gordon and Landau-Lifshitz solution formulas
//!   plus a residual-minimizing wave-vector fitter.
//! - [`kirchhoff`]: the rigid-body-in-a-fluid equations in the Clebsch
//!   and Lyapunov-Steklov integrable cases, with the genus-2 spectral
//!   reduction of the Clebsch flow.
//!
//! `selftest` drives the full property suite end to end and is what the
//! CLI `selftest` subcommand runs.

pub mod builders;
pub mod elliptic;
pub mod finite_gap;
pub mod hyperelliptic;
pub mod kirchhoff;
pub mod numeric;
pub mod scaled;
pub mod selftest;
pub mod theta;

pub use num_complex::Complex64;
pub use scaled::ScaledComplex;
pub use theta::{Characteristic, RiemannMatrix, Tolerance};
