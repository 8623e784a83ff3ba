//! Adaptive Dormand-Prince 5(4) integration of small autonomous systems.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-3,
            h_max: 1.0,
            max_steps: 2_000_000,
        }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri5 {
    /// Integrates `y' = f(y)` from `t0` until `observe` breaks or `t_cap` is reached.
    ///
    /// `observe` sees every accepted step. Returns the final time and state, and
    /// whether `observe` asked to stop.
    pub fn integrate<const N: usize, F, O>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t_cap: f64,
        mut observe: O,
    ) -> Result<(f64, [f64; N], bool)>
    where
        F: Fn(&[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N]) -> ControlFlow<()>,
    {
        let (mut t, mut y) = (t0, y0);
        let mut h = self.h_init.min(self.h_max);
        let mut k = [[0.0; N]; 7];
        k[0] = f(&y);
        for _ in 0..self.max_steps {
            if t >= t_cap {
                return Ok((t, y, false));
            }
            h = h.min(t_cap - t);
            for stage in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += h * a * kj[i];
                        }
                    }
                }
                k[stage] = f(&ys);
            }
            // The last stage is evaluated at the fifth-order solution, so it is reused next step.
            let mut y_new = y;
            for i in 0..N {
                y_new[i] += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
            }
            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                h *= 0.25;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::NoConvergence(format!("step size underflow at t = {t}")));
                }
                continue;
            }
            if err <= 1.0 {
                t += h;
                y = y_new;
                k[0] = k[6];
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * factor).min(self.h_max);
                if observe(t, &y).is_break() {
                    return Ok((t, y, true));
                }
            } else {
                h *= (0.9 * err.powf(-0.2)).max(0.2);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::NoConvergence(format!("step size underflow at t = {t}")));
                }
            }
        }
        Err(Error::NoConvergence(format!(
            "step budget of {} exhausted at t = {t}",
            self.max_steps
        )))
    }
}
