//! The reduced (s1, s2) flow
//!
//! ```text
//! s1' = (a s1 + b) sqrt(P5(s1)) / (s2 - s1),
//! s2' = (a s2 + b) sqrt(P5(s2)) / (s1 - s2),
//! ```
//!
//! integrated with RK4 and continuous square-root branch tracking: the
//! sign of each sqrt is continued from the previous evaluation, and the
//! step halves near branch points of P5.

use num_complex::Complex64;

use super::{KirchhoffError, SpectralData};

#[derive(Debug, Clone)]
pub struct STrajectory {
    pub times: Vec<f64>,
    pub s1: Vec<Complex64>,
    pub s2: Vec<Complex64>,
    /// The continued sqrt(P5(s_i)) at each sample, for downstream
    /// linearization checks.
    pub sqrt1: Vec<Complex64>,
    pub sqrt2: Vec<Complex64>,
}

struct BranchTracker {
    prev: Complex64,
}

impl BranchTracker {
    fn new(start: Complex64) -> Self {
        Self { prev: start }
    }

    fn continued(&mut self, principal: Complex64) -> Complex64 {
        let v = if (principal - self.prev).norm() <= (principal + self.prev).norm() {
            principal
        } else {
            -principal
        };
        self.prev = v;
        v
    }
}

struct Flow<'a> {
    spec: &'a SpectralData,
    a: f64,
    b: f64,
}

impl Flow<'_> {
    fn rhs(
        &self,
        s1: Complex64,
        s2: Complex64,
        t1: &mut BranchTracker,
        t2: &mut BranchTracker,
    ) -> (Complex64, Complex64, Complex64, Complex64) {
        let w1 = t1.continued(self.spec.p5_eval(s1).sqrt());
        let w2 = t2.continued(self.spec.p5_eval(s2).sqrt());
        let d1 = (self.a * s1 + self.b) * w1 / (s2 - s1);
        let d2 = (self.a * s2 + self.b) * w2 / (s1 - s2);
        (d1, d2, w1, w2)
    }
}

/// Integrate the reduced flow from (s1, s2) over [0, t_end].  Halts
/// cleanly with `CollisionDetected` when the two variables meet.
pub fn s_flow(
    spec: &SpectralData,
    a_const: f64,
    b_const: f64,
    initial: (Complex64, Complex64),
    t_end: f64,
    step: f64,
) -> Result<STrajectory, KirchhoffError> {
    if !(step.abs() > 0.0) || t_end == 0.0 {
        return Err(KirchhoffError::InvalidInput(
            "step and t_end must be nonzero".into(),
        ));
    }
    let flow = Flow {
        spec,
        a: a_const,
        b: b_const,
    };
    let scale = initial.0.norm().max(initial.1.norm()).max(1.0);
    let w_scale = spec
        .p5_roots()
        .iter()
        .map(|r| r.norm())
        .fold(1.0f64, f64::max)
        .powf(2.5);

    let (mut s1, mut s2) = initial;
    if (s1 - s2).norm() < 1e-8 * scale {
        return Err(KirchhoffError::CollisionDetected(0.0));
    }
    let mut t1 = BranchTracker::new(spec.p5_eval(s1).sqrt());
    let mut t2 = BranchTracker::new(spec.p5_eval(s2).sqrt());

    let direction = if t_end > 0.0 { 1.0 } else { -1.0 };
    let h_base = step.abs() * direction;
    let n = (t_end / h_base).round().max(1.0) as usize;
    let h_nominal = t_end / n as f64;

    let mut times = vec![0.0];
    let mut out1 = vec![s1];
    let mut out2 = vec![s2];
    let (d1, d2, w1, w2) = flow.rhs(s1, s2, &mut t1, &mut t2);
    let _ = (d1, d2);
    let mut sq1 = vec![w1];
    let mut sq2 = vec![w2];

    let mut t = 0.0;
    for _ in 0..n {
        // Near a root of P5 the branches collide; halve the step there.
        let near_branch = t1.prev.norm().min(t2.prev.norm()) < 1e-6 * w_scale;
        let substeps = if near_branch { 8 } else { 1 };
        let h = h_nominal / substeps as f64;
        for _ in 0..substeps {
            let (k1a, k1b, _, _) = flow.rhs(s1, s2, &mut t1, &mut t2);
            let (k2a, k2b, _, _) = flow.rhs(
                s1 + 0.5 * h * k1a,
                s2 + 0.5 * h * k1b,
                &mut t1,
                &mut t2,
            );
            let (k3a, k3b, _, _) = flow.rhs(
                s1 + 0.5 * h * k2a,
                s2 + 0.5 * h * k2b,
                &mut t1,
                &mut t2,
            );
            let (k4a, k4b, _, _) = flow.rhs(s1 + h * k3a, s2 + h * k3b, &mut t1, &mut t2);
            s1 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            s2 += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
            t += h;
            if (s1 - s2).norm() < 1e-8 * scale {
                return Err(KirchhoffError::CollisionDetected(t));
            }
        }
        let (_, _, w1, w2) = flow.rhs(s1, s2, &mut t1, &mut t2);
        times.push(t);
        out1.push(s1);
        out2.push(s2);
        sq1.push(w1);
        sq2.push(w2);
    }

    Ok(STrajectory {
        times,
        s1: out1,
        s2: out2,
        sqrt1: sq1,
        sqrt2: sq2,
    })
}

/// Fourth-order central finite-difference derivatives of the sampled
/// trajectory, for the linearization diagnostics u1' = 0, u2' = -1:
/// returns per-interior-sample (u1_dot, u2_dot).
pub fn linearization_rates(
    traj: &STrajectory,
    spec: &SpectralData,
    a_const: f64,
    b_const: f64,
) -> Vec<(Complex64, Complex64)> {
    let n = traj.times.len();
    let mut out = Vec::new();
    if n < 5 {
        return out;
    }
    let h = traj.times[1] - traj.times[0];
    let _ = spec;
    for i in 2..n - 2 {
        let d = |v: &Vec<Complex64>| -> Complex64 {
            (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h)
        };
        let ds1 = d(&traj.s1);
        let ds2 = d(&traj.s2);
        let f1 = (a_const * traj.s1[i] + b_const) * traj.sqrt1[i];
        let f2 = (a_const * traj.s2[i] + b_const) * traj.sqrt2[i];
        let u1_dot = ds1 / f1 + ds2 / f2;
        let u2_dot = traj.s1[i] * ds1 / f1 + traj.s2[i] * ds2 / f2;
        out.push((u1_dot, u2_dot));
    }
    out
}
