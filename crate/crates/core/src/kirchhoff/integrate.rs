//! Fixed-step RK4 and adaptive RKF45 integration of the Kirchhoff
//! equations with per-sample conservation diagnostics.

use super::{KirchhoffError, KirchhoffSystem, RigidState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Rkf45,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<RigidState>,
    pub integrals: Vec<[f64; 4]>,
    /// max_t |H_i(t) - H_i(0)| for i = 1..4.
    pub drifts: [f64; 4],
}

fn axpy(s: &RigidState, k: &RigidState, h: f64) -> RigidState {
    RigidState {
        p: [s.p[0] + h * k.p[0], s.p[1] + h * k.p[1], s.p[2] + h * k.p[2]],
        l: [s.l[0] + h * k.l[0], s.l[1] + h * k.l[1], s.l[2] + h * k.l[2]],
    }
}

fn rk4_step(system: &dyn KirchhoffSystem, s: &RigidState, h: f64) -> RigidState {
    let k1 = system.rhs(s);
    let k2 = system.rhs(&axpy(s, &k1, 0.5 * h));
    let k3 = system.rhs(&axpy(s, &k2, 0.5 * h));
    let k4 = system.rhs(&axpy(s, &k3, h));
    let mut out = *s;
    for i in 0..3 {
        out.p[i] += h / 6.0 * (k1.p[i] + 2.0 * k2.p[i] + 2.0 * k3.p[i] + k4.p[i]);
        out.l[i] += h / 6.0 * (k1.l[i] + 2.0 * k2.l[i] + 2.0 * k3.l[i] + k4.l[i]);
    }
    out
}

/// One RKF45 attempt: returns (5th-order state, error estimate).
fn rkf45_step(system: &dyn KirchhoffSystem, s: &RigidState, h: f64) -> (RigidState, f64) {
    // Fehlberg coefficients.
    let k1 = system.rhs(s);
    let k2 = system.rhs(&axpy(s, &k1, 0.25 * h));
    let mut t = *s;
    for i in 0..3 {
        t.p[i] = s.p[i] + h * (3.0 / 32.0 * k1.p[i] + 9.0 / 32.0 * k2.p[i]);
        t.l[i] = s.l[i] + h * (3.0 / 32.0 * k1.l[i] + 9.0 / 32.0 * k2.l[i]);
    }
    let k3 = system.rhs(&t);
    for i in 0..3 {
        t.p[i] = s.p[i]
            + h * (1932.0 / 2197.0 * k1.p[i] - 7200.0 / 2197.0 * k2.p[i]
                + 7296.0 / 2197.0 * k3.p[i]);
        t.l[i] = s.l[i]
            + h * (1932.0 / 2197.0 * k1.l[i] - 7200.0 / 2197.0 * k2.l[i]
                + 7296.0 / 2197.0 * k3.l[i]);
    }
    let k4 = system.rhs(&t);
    for i in 0..3 {
        t.p[i] = s.p[i]
            + h * (439.0 / 216.0 * k1.p[i] - 8.0 * k2.p[i] + 3680.0 / 513.0 * k3.p[i]
                - 845.0 / 4104.0 * k4.p[i]);
        t.l[i] = s.l[i]
            + h * (439.0 / 216.0 * k1.l[i] - 8.0 * k2.l[i] + 3680.0 / 513.0 * k3.l[i]
                - 845.0 / 4104.0 * k4.l[i]);
    }
    let k5 = system.rhs(&t);
    for i in 0..3 {
        t.p[i] = s.p[i]
            + h * (-8.0 / 27.0 * k1.p[i] + 2.0 * k2.p[i] - 3544.0 / 2565.0 * k3.p[i]
                + 1859.0 / 4104.0 * k4.p[i]
                - 11.0 / 40.0 * k5.p[i]);
        t.l[i] = s.l[i]
            + h * (-8.0 / 27.0 * k1.l[i] + 2.0 * k2.l[i] - 3544.0 / 2565.0 * k3.l[i]
                + 1859.0 / 4104.0 * k4.l[i]
                - 11.0 / 40.0 * k5.l[i]);
    }
    let k6 = system.rhs(&t);

    let mut out = *s;
    let mut err: f64 = 0.0;
    for i in 0..3 {
        let p5 = h
            * (16.0 / 135.0 * k1.p[i] + 6656.0 / 12825.0 * k3.p[i]
                + 28561.0 / 56430.0 * k4.p[i]
                - 9.0 / 50.0 * k5.p[i]
                + 2.0 / 55.0 * k6.p[i]);
        let l5 = h
            * (16.0 / 135.0 * k1.l[i] + 6656.0 / 12825.0 * k3.l[i]
                + 28561.0 / 56430.0 * k4.l[i]
                - 9.0 / 50.0 * k5.l[i]
                + 2.0 / 55.0 * k6.l[i]);
        let p4 = h
            * (25.0 / 216.0 * k1.p[i] + 1408.0 / 2565.0 * k3.p[i]
                + 2197.0 / 4104.0 * k4.p[i]
                - 0.2 * k5.p[i]);
        let l4 = h
            * (25.0 / 216.0 * k1.l[i] + 1408.0 / 2565.0 * k3.l[i]
                + 2197.0 / 4104.0 * k4.l[i]
                - 0.2 * k5.l[i]);
        out.p[i] += p5;
        out.l[i] += l5;
        err = err.max((p5 - p4).abs()).max((l5 - l4).abs());
    }
    (out, err)
}

/// Integrate over [0, t_end] and record the integrals H1..H4 per sample.
pub fn integrate(
    initial: &RigidState,
    system: &dyn KirchhoffSystem,
    t_end: f64,
    step: f64,
    method: Method,
) -> Result<Trajectory, KirchhoffError> {
    if !(step > 0.0) || !(t_end > 0.0) {
        return Err(KirchhoffError::InvalidInput(
            "step and t_end must be positive".into(),
        ));
    }
    let h0 = system.integrals(initial);
    let mut times = vec![0.0];
    let mut states = vec![*initial];
    let mut integrals = vec![h0];
    let mut drifts = [0.0f64; 4];

    let mut push = |t: f64, s: RigidState, drifts: &mut [f64; 4]| {
        let h = system.integrals(&s);
        for i in 0..4 {
            drifts[i] = drifts[i].max((h[i] - h0[i]).abs());
        }
        times.push(t);
        states.push(s);
        integrals.push(h);
    };

    match method {
        Method::Rk4 => {
            let n = (t_end / step).round().max(1.0) as usize;
            let h = t_end / n as f64;
            let mut s = *initial;
            for k in 1..=n {
                s = rk4_step(system, &s, h);
                push(k as f64 * h, s, &mut drifts);
            }
        }
        Method::Rkf45 => {
            let tol = 1e-9;
            let mut t = 0.0;
            let mut h = step;
            let mut s = *initial;
            let h_min = 1e-10 * t_end;
            while t < t_end {
                let h_try = h.min(t_end - t);
                let (next, err) = rkf45_step(system, &s, h_try);
                if err <= tol || h_try <= h_min {
                    if err > tol {
                        return Err(KirchhoffError::StepRejection(t));
                    }
                    t += h_try;
                    s = next;
                    push(t, s, &mut drifts);
                    let grow = (tol / err.max(1e-300)).powf(0.2).min(2.0);
                    h = (h_try * 0.9 * grow).min(t_end);
                } else {
                    h = h_try * 0.5;
                }
            }
        }
    }

    Ok(Trajectory {
        times,
        states,
        integrals,
        drifts,
    })
}
