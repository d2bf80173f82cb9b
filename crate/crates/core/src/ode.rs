//! Adaptive explicit Runge-Kutta integration with the Dormand-Prince 8(5,3)
//! embedded pair.
//!
//! The integrator works on fixed-size states, clips steps so that every
//! requested output abscissa is hit exactly, and calls a projection hook after
//! each accepted step (used to keep unit vectors on the sphere).

use crate::dop853_tableau::{A, B, C, E3, E5, N_STAGES};
use crate::error::{Error, Result};

/// Step-size controller settings.
#[derive(Debug, Clone, Copy)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|.
    pub h_max: f64,
    /// Abort after this many attempted steps.
    pub max_steps: usize,
}

impl Default for Dop853 {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-13,
            h_max: 0.5,
            max_steps: 5_000_000,
        }
    }
}

/// Counters returned with each integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

impl Dop853 {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// One trial step; returns the candidate state and the scaled error norm.
    fn trial<const N: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64; N],
        f0: &[f64; N],
        h: f64,
    ) -> ([f64; N], f64)
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut k = [[0.0; N]; N_STAGES + 1];
        k[0] = *f0;
        for s in 1..N_STAGES {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y_new = *y;
        for (s, ks) in k.iter().enumerate().take(N_STAGES) {
            if B[s] != 0.0 {
                for i in 0..N {
                    y_new[i] += h * B[s] * ks[i];
                }
            }
        }
        k[N_STAGES] = f(t + h, &y_new);
        let mut e5 = 0.0;
        let mut e3 = 0.0;
        for i in 0..N {
            let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            let mut a5 = 0.0;
            let mut a3 = 0.0;
            for s in 0..=N_STAGES {
                a5 += E5[s] * k[s][i];
                a3 += E3[s] * k[s][i];
            }
            e5 += (a5 / scale).powi(2);
            e3 += (a3 / scale).powi(2);
        }
        let err = if e5 == 0.0 && e3 == 0.0 {
            0.0
        } else {
            h.abs() * e5 / ((e5 + 0.01 * e3) * N as f64).sqrt()
        };
        (y_new, err)
    }

    /// Integrate `y' = f(t, y)` from `(t0, y0)` and return the state at each
    /// abscissa of `outputs`, which must be monotone and lie on one side of
    /// `t0` (an output equal to `t0` returns `y0`).
    ///
    /// `project` is called on the state after every accepted step.
    pub fn integrate<const N: usize, F, P>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        outputs: &[f64],
        h_init: f64,
        mut project: P,
    ) -> Result<(Vec<[f64; N]>, StepStats)>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        P: FnMut(&mut [f64; N]),
    {
        let mut out = Vec::with_capacity(outputs.len());
        let mut stats = StepStats::default();
        if outputs.is_empty() {
            return Ok((out, stats));
        }
        let dir = if outputs.iter().any(|&x| x < t0) {
            -1.0
        } else {
            1.0
        };
        if outputs.iter().any(|&x| (x - t0) * dir < 0.0) {
            return Err(Error::Invalid("outputs on both sides of t0".into()));
        }
        if outputs.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) {
            return Err(Error::Invalid("outputs not monotone".into()));
        }
        let mut t = t0;
        let mut y = y0;
        let mut fy = f(t, &y);
        let mut h = h_init.abs().min(self.h_max).max(1e-12);
        for &target in outputs {
            while (target - t) * dir > 0.0 {
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(Error::Tolerance(format!(
                        "step budget exhausted at t = {t}"
                    )));
                }
                let remaining = (target - t).abs();
                let clipped = h >= remaining;
                let step = if clipped { remaining } else { h };
                let (y_new, err) = self.trial(&mut f, t, &y, &fy, dir * step);
                if !err.is_finite() {
                    return Err(Error::Tolerance(format!(
                        "non-finite error estimate at t = {t}"
                    )));
                }
                if err <= 1.0 {
                    t = if clipped { target } else { t + dir * step };
                    y = y_new;
                    project(&mut y);
                    fy = f(t, &y);
                    stats.accepted += 1;
                    let factor = if err == 0.0 {
                        MAX_FACTOR
                    } else {
                        (SAFETY * err.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, MAX_FACTOR)
                    };
                    if !clipped {
                        h = (step * factor).min(self.h_max);
                    } else {
                        h = h.max(step * factor).min(self.h_max);
                    }
                } else {
                    stats.rejected += 1;
                    h = step * (SAFETY * err.powf(-1.0 / 8.0)).max(MIN_FACTOR);
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::Tolerance(format!("step size underflow at t = {t}")));
                    }
                }
            }
            out.push(y);
        }
        Ok((out, stats))
    }
}
