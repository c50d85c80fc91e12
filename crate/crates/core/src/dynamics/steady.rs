use num_complex::Complex64;

use super::model::Site;
use super::{DenseStepper, DriveParams, IntegratorConfig, Model, RunDiagnostics, StateVector};
use crate::coupling::{CouplingTables, Topology};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyStatus {
    /// Every derivative component fell below `steady_eps`.
    Converged,
    /// `t_max` elapsed first; the state may be oscillating or slowly drifting.
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub state: StateVector,
    pub t_elapsed: f64,
    /// `max |dy/dt|` at the returned state.
    pub residual: f64,
    pub status: SteadyStatus,
    pub diagnostics: RunDiagnostics,
}

impl SteadyState {
    pub fn converged(&self) -> bool {
        self.status == SteadyStatus::Converged
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Integrate until the state stops changing or `t_max` is reached.
pub fn relax_to_steady(
    model: &Model,
    state: &StateVector,
    config: &IntegratorConfig,
) -> Result<SteadyState> {
    config.validate()?;
    model.check_state(state)?;
    let mut ws = model.workspace();
    let mut stepper = DenseStepper::new(0.0, state.to_flat(), config, |y, dy| {
        model.rhs_flat(y, dy, &mut ws)
    });
    let mut diagnostics = RunDiagnostics::default();
    diagnostics.observe(0.0, stepper.y(), config.validity_threshold);

    let mut residual = max_abs(stepper.derivative());
    while residual >= config.steady_eps && stepper.t() < config.t_max {
        stepper.step(Some(config.t_max), |y, dy| model.rhs_flat(y, dy, &mut ws))?;
        diagnostics.observe(stepper.t(), stepper.y(), config.validity_threshold);
        residual = max_abs(stepper.derivative());
    }
    diagnostics.steps = stepper.stats();
    Ok(SteadyState {
        state: StateVector::from_flat(stepper.y()),
        t_elapsed: stepper.t(),
        residual,
        status: if residual < config.steady_eps {
            SteadyStatus::Converged
        } else {
            SteadyStatus::TimeLimit
        },
        diagnostics,
    })
}

/// Steady coherence of the uniform ring mode at vanishing excitation,
/// `R = iΩ / [(Γ⊥ + S_re) + i(Δ0 + S_im)]` with `S` the kernel row sum.
pub fn uniform_linear_response(model: &Model) -> Complex64 {
    let p = model.drive();
    let s = model.row_sum(0);
    let denom = Complex64::new(p.gamma_perp + s.re, model.detuning()[0] + s.im);
    Complex64::i() * p.omega / denom
}

/// Populations and coherence shared by every molecule of a uniform ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformState {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub r: Complex64,
}

impl UniformState {
    pub fn expand(&self, n: usize) -> StateVector {
        StateVector {
            rho11: vec![self.rho11; n],
            rho22: vec![self.rho22; n],
            rho33: vec![self.rho33; n],
            r: vec![self.r; n],
        }
    }

    fn from_array(u: [f64; 5]) -> Self {
        Self {
            rho11: u[0],
            rho22: u[1],
            rho33: u[2],
            r: Complex64::new(u[3], u[4]),
        }
    }
}

/// Uniform-mode equations: the full ones with `Σ_l K_lk R_l = S·R` and
/// both neighbors equal.
fn uniform_rhs(u: &[f64], drive: &DriveParams, row_sum: Complex64) -> [f64; 5] {
    let r = Complex64::new(u[3], u[4]);
    let site = Site {
        rho11: u[0],
        rho22: u[1],
        rho33: u[2],
        r,
        coupled: row_sum * r,
        neighbors: 2.0 * u[1],
        detuning: drive.delta0,
    };
    let (dp, dr) = site.derivative(drive);
    [dp[0], dp[1], dp[2], dr.re, dr.im]
}

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 100;

/// Steady uniform state of a ring reached from `guess = (ρ11, ρ22)`.
///
/// The reduced five-variable system is first relaxed in time from the guess
/// (which selects the attracting branch), then polished with damped Newton
/// iterations on the stationarity conditions with the trace constraint
/// replacing the redundant ground-state equation.
pub fn uniform_fixed_point(
    drive: &DriveParams,
    tables: &CouplingTables,
    guess: (f64, f64),
) -> Result<UniformState> {
    drive.validate()?;
    if tables.geometry.topology != Topology::Ring {
        return Err(invalid("topology", "uniform states exist only on rings"));
    }
    let (g, d) = tables.row_sums(0);
    let row_sum = Complex64::new(g, d);
    let (rho11, rho22) = guess;

    let z = rho22 - rho11;
    let seed_r = Complex64::i() * drive.omega * z
        / (drive.gamma_perp + Complex64::i() * drive.delta0 + 2.0 * drive.alpha * rho22 - row_sum * z);
    let start = [rho11, rho22, 1.0 - rho11 - rho22, seed_r.re, seed_r.im];

    let config = IntegratorConfig {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        max_step: 1.0,
        ..Default::default()
    };
    let f = |y: &[f64], dy: &mut [f64]| dy.copy_from_slice(&uniform_rhs(y, drive, row_sum));
    let mut stepper = DenseStepper::new(0.0, start.to_vec(), &config, f);
    let t_relax = 5e3;
    while max_abs(stepper.derivative()) > 1e-7 && stepper.t() < t_relax {
        stepper.step(Some(t_relax), f)?;
    }
    let mut u: [f64; 5] = stepper.y().try_into().expect("five components");
    newton_polish(&mut u, drive, row_sum)?;
    Ok(UniformState::from_array(u))
}

fn residual_vector(u: &[f64; 5], drive: &DriveParams, row_sum: Complex64) -> [f64; 5] {
    let mut f = uniform_rhs(u, drive, row_sum);
    f[0] = u[0] + u[1] + u[2] - 1.0;
    f
}

fn norm(v: &[f64; 5]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn newton_polish(u: &mut [f64; 5], drive: &DriveParams, row_sum: Complex64) -> Result<()> {
    let mut f = residual_vector(u, drive, row_sum);
    for _ in 0..NEWTON_MAX_ITER {
        if norm(&f) < NEWTON_TOL {
            return Ok(());
        }
        // Central-difference Jacobian.
        let mut jac = [[0.0; 5]; 5];
        for j in 0..5 {
            let h = 1e-7 * u[j].abs().max(1e-3);
            let mut up = *u;
            let mut um = *u;
            up[j] += h;
            um[j] -= h;
            let fp = residual_vector(&up, drive, row_sum);
            let fm = residual_vector(&um, drive, row_sum);
            for i in 0..5 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let neg_f = f.map(|x| -x);
        let Some(step) = solve5(jac, neg_f) else {
            break;
        };
        let mut lambda = 1.0;
        loop {
            let trial: [f64; 5] = std::array::from_fn(|i| u[i] + lambda * step[i]);
            let ft = residual_vector(&trial, drive, row_sum);
            if norm(&ft) < norm(&f) || lambda < 1e-6 {
                *u = trial;
                f = ft;
                break;
            }
            lambda *= 0.5;
        }
    }
    if norm(&f) < 1e-10 {
        Ok(())
    } else {
        Err(Error::Divergence {
            iterations: NEWTON_MAX_ITER,
            residual: norm(&f),
        })
    }
}

/// Gaussian elimination with partial pivoting.
fn solve5(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> Option<[f64; 5]> {
    for col in 0..5 {
        let pivot = (col..5).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..5 {
            let factor = a[row][col] / a[col][col];
            for c in col..5 {
                a[row][c] -= factor * a[col][c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 5];
    for row in (0..5).rev() {
        let s: f64 = (row + 1..5).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
