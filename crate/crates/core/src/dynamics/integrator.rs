//! Dormand–Prince 5(4) with the fourth-order continuous extension, PI step
//! control and Hairer's initial step heuristic.

use super::IntegratorConfig;
use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Adaptive stepper that owns the current point and the interpolant of the
/// last accepted step.
#[derive(Debug, Clone)]
pub struct DenseStepper {
    t: f64,
    y: Vec<f64>,
    h: f64,
    rtol: f64,
    atol: f64,
    max_step: f64,
    max_steps: usize,
    facold: f64,
    stats: StepStats,
    // k1 holds f(t, y) for the current point (FSAL).
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    t_old: f64,
    h_old: f64,
    cont: [Vec<f64>; 5],
}

impl DenseStepper {
    pub fn new<F>(t0: f64, y0: Vec<f64>, config: &IntegratorConfig, mut f: F) -> Self
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let dim = y0.len();
        let zeros = || vec![0.0; dim];
        let mut k = [zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros()];
        f(&y0, &mut k[0]);
        let mut s = Self {
            t: t0,
            y: y0,
            h: 0.0,
            rtol: config.rel_tol,
            atol: config.abs_tol,
            max_step: config.max_step,
            max_steps: config.max_steps,
            facold: 1e-4,
            stats: StepStats {
                evaluations: 1,
                ..Default::default()
            },
            k,
            y_stage: zeros(),
            y_new: zeros(),
            t_old: t0,
            h_old: 0.0,
            cont: [zeros(), zeros(), zeros(), zeros(), zeros()],
        };
        s.h = s.initial_step(&mut f);
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `f(t, y)` at the current point.
    pub fn derivative(&self) -> &[f64] {
        &self.k[0]
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.atol + self.rtol * a.abs().max(b.abs())
    }

    fn initial_step<F: FnMut(&[f64], &mut [f64])>(&mut self, f: &mut F) -> f64 {
        let dim = self.y.len() as f64;
        let (mut dnf, mut dny) = (0.0, 0.0);
        for (yi, fi) in self.y.iter().zip(&self.k[0]) {
            let sk = self.scale(*yi, *yi);
            dnf += (fi / sk).powi(2);
            dny += (yi / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(self.max_step);
        for ((ys, yi), fi) in self.y_stage.iter_mut().zip(&self.y).zip(&self.k[0]) {
            *ys = yi + h * fi;
        }
        f(&self.y_stage, &mut self.k[1]);
        self.stats.evaluations += 1;
        let mut der2 = 0.0;
        for ((yi, f1), f0) in self.y.iter().zip(&self.k[1]).zip(&self.k[0]) {
            der2 += ((f1 - f0) / self.scale(*yi, *yi)).powi(2);
        }
        let der2 = (der2 / dim).sqrt() / h;
        let der12 = der2.max((dnf / dim).sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        h1.min(100.0 * h).min(self.max_step)
    }

    /// Take one accepted step, never stepping past `t_stop` when given.
    pub fn step<F>(&mut self, t_stop: Option<f64>, mut f: F) -> Result<()>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let dim = self.y.len();
        loop {
            if self.stats.accepted + self.stats.rejected >= self.max_steps {
                return Err(Error::TooManySteps {
                    t: self.t,
                    max_steps: self.max_steps,
                });
            }
            let mut h = self.h.min(self.max_step);
            let mut last = false;
            if let Some(ts) = t_stop {
                if self.t + h >= ts {
                    h = ts - self.t;
                    last = true;
                }
            }
            if h.abs() <= 10.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }

            let y = &self.y;
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let ys = &mut self.y_stage;
            for i in 0..dim {
                ys[i] = y[i] + h * A21 * k1[i];
            }
            f(ys, k2);
            for i in 0..dim {
                ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            f(ys, k3);
            for i in 0..dim {
                ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(ys, k4);
            for i in 0..dim {
                ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(ys, k5);
            for i in 0..dim {
                ys[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(ys, k6);
            let yn = &mut self.y_new;
            for i in 0..dim {
                yn[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            f(yn, k7);
            self.stats.evaluations += 6;

            let mut err = 0.0;
            for i in 0..dim {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sk = self.atol + self.rtol * y[i].abs().max(yn[i].abs());
                err += (e / sk).powi(2);
            }
            let err = (err / dim as f64).sqrt();
            if !err.is_finite() {
                self.stats.rejected += 1;
                self.h = h * FAC_MIN;
                if self.y_new.iter().any(|v| !v.is_finite()) && self.h < 1e-12 {
                    return Err(Error::NonFinite(self.t));
                }
                continue;
            }

            let fac11 = err.powf(0.2 - BETA * 0.75);
            if err <= 1.0 {
                let fac = (fac11 / self.facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.facold = err.max(1e-4);

                let cont = &mut self.cont;
                for i in 0..dim {
                    let ydiff = yn[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - h * k7[i] - bspl;
                    cont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                std::mem::swap(k1, k7);
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.t_old = self.t;
                self.h_old = h;
                self.t = if last { t_stop.unwrap() } else { self.t + h };
                self.stats.accepted += 1;
                // After a clamped final step keep the unclamped proposal.
                let proposal = h / fac;
                self.h = if last { proposal.max(self.h) } else { proposal };
                return Ok(());
            }
            self.stats.rejected += 1;
            self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }

    /// Evaluate the interpolant of the last accepted step at `t`.
    pub fn dense(&self, t: f64, out: &mut [f64]) {
        let theta = if self.h_old == 0.0 {
            0.0
        } else {
            (t - self.t_old) / self.h_old
        };
        let theta1 = 1.0 - theta;
        let c = &self.cont;
        for (i, o) in out.iter_mut().enumerate() {
            *o = c[0][i]
                + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(rtol: f64) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: rtol,
            abs_tol: rtol * 1e-2,
            max_step: 10.0,
            ..Default::default()
        }
    }

    fn run_oscillator(rtol: f64, t_end: f64) -> (Vec<f64>, StepStats) {
        let f = |y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let mut s = DenseStepper::new(0.0, vec![1.0, 0.0], &config(rtol), f);
        while s.t() < t_end {
            s.step(Some(t_end), f).unwrap();
        }
        assert_eq!(s.t(), t_end);
        (s.y().to_vec(), s.stats())
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let (y, _) = run_oscillator(1e-10, 10.0);
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[1] + 10f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn tighter_tolerance_costs_fifth_root_more_steps() {
        let (_, loose) = run_oscillator(1e-6, 20.0);
        let (_, tight) = run_oscillator(1e-11, 20.0);
        // Fifth-order control: 10^5 in tolerance is about 10x in steps.
        let ratio = tight.accepted as f64 / loose.accepted as f64;
        assert!((5.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn dense_output_is_accurate_inside_steps() {
        let f = |y: &[f64], dy: &mut [f64]| {
            dy[0] = -0.5 * y[0];
        };
        let mut s = DenseStepper::new(0.0, vec![1.0], &config(1e-9), f);
        let mut out = [0.0];
        while s.t() < 5.0 {
            let t0 = s.t();
            s.step(Some(5.0), f).unwrap();
            let mid = 0.5 * (t0 + s.t());
            s.dense(mid, &mut out);
            assert!((out[0] - (-0.5 * mid).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn global_error_converges_at_nominal_order() {
        // Fixed-step runs: halving h must shrink the error by about 2^5.
        let f = |y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let run = |h: f64| {
            let mut cfg = config(1.0);
            cfg.abs_tol = 1e3;
            cfg.max_step = h;
            let mut s = DenseStepper::new(0.0, vec![1.0, 0.0], &cfg, f);
            while s.t() < 2.0 {
                s.step(Some(2.0), f).unwrap();
            }
            (s.y()[0] - 2f64.cos()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!((20.0..50.0).contains(&ratio), "ratio {ratio}");
    }
}
