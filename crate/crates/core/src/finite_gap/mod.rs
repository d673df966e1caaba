//! Finite-gap solution evaluators: the sine-Gordon theta-quotient
//! formula with a residual-minimizing wave-vector fitter, and the
//! Landau-Lifshitz spin-component ratios.

mod fit;
mod landau;
mod sine_gordon;

pub use fit::{fit_wave_vectors, FitOutcome};
pub use landau::{landau_lifshitz_eval, LLData};
pub use sine_gordon::{sine_gordon_eval, sine_gordon_eval_grid, sine_gordon_residual};

use num_complex::Complex64;

use crate::theta::{Characteristic, RiemannMatrix, ThetaError};

#[derive(Debug, thiserror::Error)]
pub enum FiniteGapError {
    #[error("theta zero crossing: log branch is ambiguous at ({x}, {t})")]
    ThetaZeroCrossing { x: f64, t: f64 },
    #[error("denominator theta combination vanishes")]
    DenominatorVanishes,
    #[error("invalid wave data: {0}")]
    InvalidData(String),
    #[error("evaluation budget exhausted")]
    BudgetExhausted,
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

/// Data of the sine-Gordon solution formula
/// phi(x,t) = 2i ln theta[chr](Ux+Vt+W|B)/theta(Ux+Vt+W|B) + C + 2 pi m.
#[derive(Debug, Clone)]
pub struct WaveData {
    pub b: RiemannMatrix,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub characteristic: Characteristic,
    pub c_offset: f64,
    pub branch_integer: i64,
}

impl WaveData {
    pub fn new(
        b: RiemannMatrix,
        u: Vec<Complex64>,
        v: Vec<Complex64>,
        w: Vec<Complex64>,
        characteristic: Characteristic,
        c_offset: f64,
        branch_integer: i64,
    ) -> Result<Self, FiniteGapError> {
        let g = b.genus();
        if u.len() != g || v.len() != g || w.len() != g || characteristic.genus() != g {
            return Err(FiniteGapError::InvalidData(
                "vector lengths must match the genus".into(),
            ));
        }
        let finite = u
            .iter()
            .chain(v.iter())
            .chain(w.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite || !c_offset.is_finite() {
            return Err(FiniteGapError::InvalidData("non-finite entries".into()));
        }
        Ok(Self {
            b,
            u,
            v,
            w,
            characteristic,
            c_offset,
            branch_integer,
        })
    }

    /// Theta argument U x + V t + W.
    pub fn argument(&self, x: f64, t: f64) -> Vec<Complex64> {
        self.u
            .iter()
            .zip(&self.v)
            .zip(&self.w)
            .map(|((u, v), w)| u * x + v * t + w)
            .collect()
    }
}

/// Rectangular evaluation grid.
#[derive(Debug, Clone)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

impl Grid {
    pub fn linspace(x0: f64, x1: f64, nx: usize, t0: f64, t1: f64, nt: usize) -> Self {
        let xs = (0..nx)
            .map(|i| x0 + (x1 - x0) * i as f64 / (nx - 1).max(1) as f64)
            .collect();
        let ts = (0..nt)
            .map(|j| t0 + (t1 - t0) * j as f64 / (nt - 1).max(1) as f64)
            .collect();
        Self { xs, ts }
    }

    /// Every k-th node in each direction (at least the corners).
    pub fn decimate(&self, k: usize) -> Grid {
        let take = |v: &[f64]| -> Vec<f64> {
            let mut out: Vec<f64> = v.iter().step_by(k.max(1)).copied().collect();
            if out.len() < 2 && v.len() >= 2 {
                out = vec![v[0], *v.last().unwrap()];
            }
            out
        };
        Grid {
            xs: take(&self.xs),
            ts: take(&self.ts),
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty() || self.ts.is_empty()
    }
}
