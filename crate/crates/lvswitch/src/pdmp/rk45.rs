//! Embedded Dormand-Prince 5(4) stepper for the two-component
//! log-abundance system.
//!
//! The state may contain `-inf` components (an extinct species in log
//! coordinates); those are propagated untouched and excluded from the error
//! norm, which keeps the extinction faces exactly invariant.

/// Step-size underflow: the controller pushed `h` below the resolvable
/// spacing at the current time.
#[derive(Debug, Clone, Copy)]
pub struct StepUnderflow {
    pub t: f64,
}

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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
/// Fifth-order solution weights (same as the last `A` row; FSAL layout).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the 5th-order and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub struct Dopri5 {
    rtol: f64,
    atol: f64,
    max_step: f64,
    h: f64,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64, max_step: f64) -> Self {
        Self {
            rtol,
            atol,
            max_step,
            h: 1e-4,
        }
    }

    /// Advances `y` from `*t` to exactly `t_end` (autonomous right-hand side).
    pub fn integrate_to<F>(
        &mut self,
        f: &F,
        y: &mut [f64; 2],
        t: &mut f64,
        t_end: f64,
    ) -> Result<(), StepUnderflow>
    where
        F: Fn([f64; 2]) -> [f64; 2],
    {
        while *t < t_end {
            let h_left = t_end - *t;
            let h = self.h.min(self.max_step).min(h_left).max(f64::MIN_POSITIVE);
            let (y_new, err_vec) = dp_step(f, *y, h);
            let err = self.error_norm(y, &y_new, &err_vec);
            if err <= 1.0 {
                *t = if h >= h_left { t_end } else { *t + h };
                *y = y_new;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                self.h = (h * factor).min(self.max_step);
            } else {
                self.h = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if self.h < 1e-14 * t.abs().max(1.0) {
                    return Err(StepUnderflow { t: *t });
                }
            }
        }
        Ok(())
    }

    fn error_norm(&self, y: &[f64; 2], y_new: &[f64; 2], e: &[f64; 2]) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for i in 0..2 {
            if !e[i].is_finite() {
                // Frozen -inf component: no error contribution.
                continue;
            }
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            sum += (e[i] / sc) * (e[i] / sc);
            n += 1;
        }
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).sqrt()
        }
    }
}

fn dp_step<F>(f: &F, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2])
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let mut k = [[0.0f64; 2]; 7];
    k[0] = f(y);
    for stage in 1..7 {
        let mut yi = y;
        for i in 0..2 {
            if !y[i].is_finite() {
                continue;
            }
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(stage) {
                acc += A[stage][j] * kj[i];
            }
            yi[i] = y[i] + h * acc;
        }
        k[stage] = f(yi);
    }
    let mut y_new = y;
    let mut err_vec = [f64::NAN; 2];
    for i in 0..2 {
        if !y[i].is_finite() {
            continue;
        }
        let mut acc5 = 0.0;
        let mut acc_e = 0.0;
        for j in 0..7 {
            acc5 += B5[j] * k[j][i];
            acc_e += E[j] * k[j][i];
        }
        y_new[i] = y[i] + h * acc5;
        err_vec[i] = h * acc_e;
    }
    (y_new, err_vec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_linear_decay_exactly_enough() {
        // y' = -y from 1: y(t) = e^-t.
        let f = |y: [f64; 2]| [-y[0], -2.0 * y[1]];
        let mut stepper = Dopri5::new(1e-10, 1e-12, f64::INFINITY);
        let mut y = [1.0, 1.0];
        let mut t = 0.0;
        stepper.integrate_to(&f, &mut y, &mut t, 3.0).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-9);
        assert!((y[1] - (-6.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn frozen_component_stays_frozen() {
        let f = |y: [f64; 2]| [1.0 - y[0].exp(), 0.5 * (1.0 - y[0].exp())];
        let mut stepper = Dopri5::new(1e-8, 1e-10, f64::INFINITY);
        let mut y = [0.5, f64::NEG_INFINITY];
        let mut t = 0.0;
        stepper.integrate_to(&f, &mut y, &mut t, 10.0).unwrap();
        assert!(y[0].is_finite());
        assert_eq!(y[1], f64::NEG_INFINITY);
    }

    #[test]
    fn lands_exactly_on_target_times() {
        let f = |y: [f64; 2]| [y[1], -y[0]];
        let mut stepper = Dopri5::new(1e-9, 1e-11, f64::INFINITY);
        let mut y = [1.0, 0.0];
        let mut t = 0.0;
        for k in 1..=20 {
            let target = 0.31 * f64::from(k);
            stepper.integrate_to(&f, &mut y, &mut t, target).unwrap();
            assert_eq!(t, target);
        }
        // Circular motion: y0 = cos t.
        assert!((y[0] - (0.31f64 * 20.0).cos()).abs() < 1e-7);
    }
}
