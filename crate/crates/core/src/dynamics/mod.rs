//! One-particle density-matrix dynamics of a driven aggregate of
//! three-level molecules.
//!
//! Per molecule `k` the state holds the populations `ρ11, ρ22, ρ33` and the
//! slowly varying coherence amplitude `R_k` of the 1↔2 transition. With the
//! normalized kernel `K_lk = (γ_lk + iΔ_lk)/γ_R`, `Z_k = ρ22 − ρ11` and
//! `n_k = ρ22^(k−1) + ρ22^(k+1)`:
//!
//! ```text
//! c_k    = 2 Re[ ¼ Σ_l K_lk R_l R_k* − i¼ Ω R_k* ]
//! ρ11'   =  c_k +  α ρ22 n_k + Γ31 ρ33 + Γ21 ρ22
//! ρ22'   = −c_k − 2α ρ22 n_k + Γ32 ρ33 − Γ21 ρ22
//! ρ33'   =         α ρ22 n_k − (Γ31 + Γ32) ρ33
//! R_k'   = −(Γ⊥ + iΔ_k) R_k + Σ_l K_lk R_l Z_k − iΩ Z_k − α R_k n_k
//! ```
//!
//! All quantities are in units of `γ_R`. Missing chain neighbors contribute
//! zero population to `n_k`; ring indices wrap.

mod integrator;
mod model;
mod steady;
mod validity;

pub use integrator::{DenseStepper, StepStats};
pub use model::{CouplingMethod, Model, Workspace};
pub use steady::{
    relax_to_steady, uniform_fixed_point, uniform_linear_response, SteadyState, SteadyStatus,
    UniformState,
};
pub use validity::{validity_check, ValidityReport};

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingTables;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub rho11: Vec<f64>,
    pub rho22: Vec<f64>,
    pub rho33: Vec<f64>,
    /// Coherence amplitude in model units.
    pub r: Vec<Complex64>,
}

/// Time derivative of a [`StateVector`], same layout.
pub type StateDerivative = StateVector;

impl StateVector {
    pub fn ground(n: usize) -> Self {
        Self::uniform(n, 1.0, 0.0, Complex64::new(0.0, 0.0))
    }

    /// Uniform populations with `ρ33 = 1 − ρ11 − ρ22`.
    pub fn uniform(n: usize, rho11: f64, rho22: f64, r: Complex64) -> Self {
        Self {
            rho11: vec![rho11; n],
            rho22: vec![rho22; n],
            rho33: vec![1.0 - rho11 - rho22; n],
            r: vec![r; n],
        }
    }

    pub fn len(&self) -> usize {
        self.rho11.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho11.is_empty()
    }

    pub fn check_consistent(&self) -> Result<()> {
        let n = self.len();
        for (what, len) in [
            ("rho22", self.rho22.len()),
            ("rho33", self.rho33.len()),
            ("R", self.r.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(())
    }

    /// `[ρ11; ρ22; ρ33; Re R; Im R]`, each block of length `N`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(5 * self.len());
        y.extend_from_slice(&self.rho11);
        y.extend_from_slice(&self.rho22);
        y.extend_from_slice(&self.rho33);
        y.extend(self.r.iter().map(|r| r.re));
        y.extend(self.r.iter().map(|r| r.im));
        y
    }

    pub fn from_flat(y: &[f64]) -> Self {
        let n = y.len() / 5;
        Self {
            rho11: y[..n].to_vec(),
            rho22: y[n..2 * n].to_vec(),
            rho33: y[2 * n..3 * n].to_vec(),
            r: y[3 * n..4 * n]
                .iter()
                .zip(&y[4 * n..5 * n])
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        }
    }

    /// `max_k |ρ11 + ρ22 + ρ33 − 1|`.
    pub fn trace_error(&self) -> f64 {
        trace_error_flat(&self.to_flat())
    }

    /// Largest absolute component, treating `R` as two real components.
    pub fn max_abs(&self) -> f64 {
        self.to_flat().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Shift every field by `s` sites: entry `k` moves to `(k + s) mod N`.
    pub fn rotate(&self, s: usize) -> Self {
        fn rot<T: Clone>(v: &[T], s: usize) -> Vec<T> {
            let mut out = v.to_vec();
            out.rotate_right(s % v.len().max(1));
            out
        }
        Self {
            rho11: rot(&self.rho11, s),
            rho22: rot(&self.rho22, s),
            rho33: rot(&self.rho33, s),
            r: rot(&self.r, s),
        }
    }
}

pub(crate) fn trace_error_flat(y: &[f64]) -> f64 {
    let n = y.len() / 5;
    (0..n).fold(0.0f64, |m, k| {
        m.max((y[k] + y[n + k] + y[2 * n + k] - 1.0).abs())
    })
}

/// Drive and relaxation constants, all in `γ_R` units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega: Complex64,
    pub delta0: f64,
    pub gamma21: f64,
    pub gamma_perp: f64,
    pub gamma31: f64,
    pub gamma32: f64,
    pub alpha: f64,
}

impl DriveParams {
    /// `Γ21 = 1, Γ⊥ = 1.1, Γ31 = 0.01, Γ32 = 0.99, α = 41.1` with a real
    /// Rabi frequency.
    pub fn standard(omega: f64, delta0: f64) -> Self {
        Self {
            omega: Complex64::new(omega, 0.0),
            delta0,
            gamma21: 1.0,
            gamma_perp: 1.1,
            gamma31: 0.01,
            gamma32: 0.99,
            alpha: 41.1,
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = Complex64::new(omega, 0.0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("gamma21", self.gamma21),
            ("gamma_perp", self.gamma_perp),
            ("gamma31", self.gamma31),
            ("gamma32", self.gamma32),
            ("alpha", self.alpha),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("{v} must be a finite non-negative rate")));
            }
        }
        if !(self.delta0.is_finite() && self.omega.re.is_finite() && self.omega.im.is_finite()) {
            return Err(invalid("omega/delta0", "must be finite"));
        }
        Ok(())
    }

    /// Soft checks that do not prevent a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.gamma_perp < self.gamma21 / 2.0 {
            w.push(format!(
                "gamma_perp = {} is below gamma21/2 = {}",
                self.gamma_perp,
                self.gamma21 / 2.0
            ));
        }
        w
    }
}

/// How the configured detuning value maps onto the mean detuning `Δ0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DetuningConvention {
    /// The value is the collective detuning `δ_eff = Δ0 + Δ_L` seen by the
    /// uniform mode.
    #[default]
    Effective,
    /// The value is `Δ0 − Δ_L`, taken verbatim.
    Literal,
    /// The value is `Δ0` itself.
    Absolute,
}

impl DetuningConvention {
    pub fn resolve_delta0(self, value: f64, delta_l: f64) -> f64 {
        match self {
            DetuningConvention::Effective => value - delta_l,
            DetuningConvention::Literal => value + delta_l,
            DetuningConvention::Absolute => value,
        }
    }
}

/// Per-molecule detunings `Δ_k = Δ0 + δΔ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningProfile {
    pub delta_k: Vec<f64>,
}

impl DetuningProfile {
    pub fn uniform(n: usize, delta0: f64) -> Self {
        Self {
            delta_k: vec![delta0; n],
        }
    }

    pub fn with_offsets(delta0: f64, offsets: &[f64]) -> Self {
        Self {
            delta_k: offsets.iter().map(|d| delta0 + d).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Steady state is declared once every component of the time derivative
    /// is below this.
    pub steady_eps: f64,
    pub t_max: f64,
    /// Bound on `1 − ρ11` for the weak-excitation regime.
    pub validity_threshold: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_step: 1.0,
            steady_eps: 1e-8,
            t_max: 1e4,
            validity_threshold: 0.2,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("steady_eps", self.steady_eps),
            ("t_max", self.t_max),
            ("validity_threshold", self.validity_threshold),
        ] {
            if !(v > 0.0) {
                return Err(invalid(field, format!("{v} must be positive")));
            }
        }
        if self.max_steps == 0 {
            return Err(invalid("max_steps", "must be positive"));
        }
        Ok(())
    }
}

/// Sampled states plus run diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub diagnostics: RunDiagnostics,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDiagnostics {
    pub steps: StepStats,
    /// Largest `|ρ11 + ρ22 + ρ33 − 1|` seen at any accepted step.
    pub max_trace_error: f64,
    /// Largest `1 − ρ11` seen at any accepted step.
    pub max_excitation: f64,
    /// First time the weak-excitation bound was exceeded.
    pub validity_violation_at: Option<f64>,
    /// Most negative population seen (0 if none was negative).
    pub min_population: f64,
}

impl RunDiagnostics {
    pub(crate) fn observe(&mut self, t: f64, y: &[f64], threshold: f64) {
        let n = y.len() / 5;
        self.max_trace_error = self.max_trace_error.max(trace_error_flat(y));
        let exc = y[..n].iter().fold(0.0f64, |m, r| m.max(1.0 - r));
        self.max_excitation = self.max_excitation.max(exc);
        if exc > threshold && self.validity_violation_at.is_none() {
            self.validity_violation_at = Some(t);
        }
        self.min_population = y[..3 * n].iter().fold(self.min_population, |m, &v| m.min(v));
    }
}

/// Integrate from `state` at `t0`, sampling at each requested time. Sample
/// times must be ascending and not earlier than `t0`.
pub fn integrate(
    model: &Model,
    state: &StateVector,
    t0: f64,
    sample_times: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    state.check_consistent()?;
    model.check_state(state)?;
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.first().is_some_and(|&t| t < t0)
    {
        return Err(invalid("sample_times", "must be ascending and not before t0"));
    }

    let mut ws = model.workspace();
    let mut stepper = DenseStepper::new(t0, state.to_flat(), config, |y, dy| {
        model.rhs_flat(y, dy, &mut ws)
    });
    let mut diagnostics = RunDiagnostics::default();
    diagnostics.observe(t0, stepper.y(), config.validity_threshold);

    let mut times = Vec::with_capacity(sample_times.len());
    let mut states = Vec::with_capacity(sample_times.len());
    let mut buf = vec![0.0; stepper.y().len()];
    for &ts in sample_times {
        while stepper.t() < ts {
            stepper.step(Some(ts), |y, dy| model.rhs_flat(y, dy, &mut ws))?;
            diagnostics.observe(stepper.t(), stepper.y(), config.validity_threshold);
        }
        if ts == stepper.t() {
            buf.copy_from_slice(stepper.y());
        } else {
            stepper.dense(ts, &mut buf);
        }
        times.push(ts);
        states.push(StateVector::from_flat(&buf));
    }
    diagnostics.steps = stepper.stats();
    Ok(Trajectory {
        times,
        states,
        diagnostics,
    })
}

/// Right-hand side for a single evaluation; builds a throwaway [`Model`].
pub fn rhs(
    state: &StateVector,
    tables: &CouplingTables,
    drive: &DriveParams,
    detunings: &DetuningProfile,
) -> Result<StateDerivative> {
    let model = Model::new(tables, *drive, detunings.clone())?;
    model.rhs(state)
}

const STATE_COLUMNS: &str = "k,rho11,rho22,rho33,re_R,im_R,abs_R,arg_R";

fn write_state_rows<W: Write>(out: &mut W, prefix: Option<f64>, s: &StateVector) -> io::Result<()> {
    for k in 0..s.len() {
        if let Some(t) = prefix {
            write!(out, "{t:.16e},")?;
        }
        let r = s.r[k];
        writeln!(
            out,
            "{k},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.rho11[k],
            s.rho22[k],
            s.rho33[k],
            r.re,
            r.im,
            r.norm(),
            r.arg()
        )?;
    }
    Ok(())
}

/// One row per sample time and molecule.
pub fn write_trajectory_csv<W: Write>(mut out: W, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(out, "t,{STATE_COLUMNS}")?;
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        write_state_rows(&mut out, Some(*t), s)?;
    }
    Ok(())
}

pub fn write_state_csv<W: Write>(mut out: W, state: &StateVector) -> io::Result<()> {
    writeln!(out, "{STATE_COLUMNS}")?;
    write_state_rows(&mut out, None, state)
}

#[cfg(test)]
mod tests;
