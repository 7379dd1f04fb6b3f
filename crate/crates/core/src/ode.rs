//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use alloc::string::ToString;

use crate::math;
use crate::{Error, Result};

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Fifth- minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Error control for [`DormandPrince`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-10, abs: 1e-12 }
    }
}

/// Embedded 5(4) explicit Runge–Kutta pair with PI-free step control.
#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    pub tol: Tolerance,
    /// Smallest admissible step; going below it is reported as a failure.
    pub min_step: f64,
    /// Cap on accepted plus rejected steps per call to [`advance`](Self::advance).
    pub max_steps: usize,
}

impl Default for DormandPrince {
    fn default() -> Self {
        DormandPrince { tol: Tolerance::default(), min_step: 1e-14, max_steps: 1_000_000 }
    }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, w) in terms {
            acc += w * k[i];
        }
        *o += h * acc;
    }
    out
}

impl DormandPrince {
    pub fn with_tolerance(tol: Tolerance) -> Self {
        DormandPrince { tol, ..Default::default() }
    }

    /// Advances `y` from `t0` to exactly `t1`.
    ///
    /// `step` carries the step size between calls; pass a non-positive value
    /// to let the integrator choose its first step.
    pub fn advance<const N: usize, F>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        step: &mut f64,
    ) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(y0);
        }
        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        let mut h = if *step > 0.0 { *step } else { self.initial_step(&y, &k1, span) };
        let mut count = 0usize;
        loop {
            let remaining = t1 - t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            count += 1;
            if count > self.max_steps {
                return Err(Error::Solver { at: t, reason: "step budget exhausted".to_string() });
            }

            let k2 = rhs(t + C[0] * h_try, &axpy(&y, h_try, &[(&k1, A21)]));
            let k3 = rhs(t + C[1] * h_try, &axpy(&y, h_try, &[(&k1, A3[0]), (&k2, A3[1])]));
            let k4 = rhs(
                t + C[2] * h_try,
                &axpy(&y, h_try, &[(&k1, A4[0]), (&k2, A4[1]), (&k3, A4[2])]),
            );
            let k5 = rhs(
                t + C[3] * h_try,
                &axpy(&y, h_try, &[(&k1, A5[0]), (&k2, A5[1]), (&k3, A5[2]), (&k4, A5[3])]),
            );
            let k6 = rhs(
                t + h_try,
                &axpy(
                    &y,
                    h_try,
                    &[(&k1, A6[0]), (&k2, A6[1]), (&k3, A6[2]), (&k4, A6[3]), (&k5, A6[4])],
                ),
            );
            let y_new = axpy(
                &y,
                h_try,
                &[(&k1, B[0]), (&k3, B[2]), (&k4, B[3]), (&k5, B[4]), (&k6, B[5])],
            );
            let t_new = if last { t1 } else { t + h_try };
            let k7 = rhs(t_new, &y_new);

            let mut err_sq = 0.0;
            let mut finite = true;
            for i in 0..N {
                let e = h_try
                    * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i]
                        + E[6] * k7[i]);
                let scale = self.tol.abs + self.tol.rel * y[i].abs().max(y_new[i].abs());
                err_sq += (e / scale) * (e / scale);
                finite &= y_new[i].is_finite();
            }
            let err = math::sqrt(err_sq / N as f64);

            if finite && err <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k7;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * math::powf(err, -0.2)).clamp(0.2, 5.0) };
                // Keep the natural step when the final one was clipped to land on t1.
                h = if last && h_try < h { h } else { h_try * grow };
                if last {
                    *step = h;
                    return Ok(y);
                }
            } else {
                let shrink = if finite { (0.9 * math::powf(err, -0.2)).clamp(0.1, 0.9) } else { 0.25 };
                h = h_try * shrink;
                if h < self.min_step {
                    return Err(Error::Solver {
                        at: t,
                        reason: if finite { "step size underflow" } else { "non-finite state" }
                            .to_string(),
                    });
                }
            }
        }
    }

    fn initial_step<const N: usize>(&self, y: &[f64; N], f: &[f64; N], span: f64) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.tol.abs + self.tol.rel * y[i].abs();
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (f[i] / sc) * (f[i] / sc);
        }
        let h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * math::sqrt(d0 / d1) };
        h.min(span).max(self.min_step)
    }
}
