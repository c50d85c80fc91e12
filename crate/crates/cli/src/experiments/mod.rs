//! One function per experiment kind. Each writes its CSV tables through
//! [`Output`] and returns the physical constants it used plus a JSON
//! summary of derived results.

mod bistability;
mod coherence;
mod solitons;
mod spectra;
mod steady;
mod waves;

use jagg_core::coupling::{CouplingTables, GeometryParams, Topology};
use jagg_core::dynamics::{
    uniform_fixed_point, DetuningProfile, DriveParams, Model, StateVector, UniformState,
};
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig, Seed};
use crate::error::CliResult;
use crate::output::Output;

pub use coherence::half_coherence_sigma;
pub use solitons::{existence_interval, ExistencePoint};

pub struct ExperimentResult {
    pub constants: Value,
    pub summary: Value,
}

pub fn execute(config: &ExperimentConfig, out: &mut Output, progress: bool) -> CliResult<ExperimentResult> {
    match config.experiment {
        Experiment::Spectra => spectra::run(config, out),
        Experiment::Steady => steady::run(&Setup::new(config)?, out, progress),
        Experiment::Bistability => bistability::run(&Setup::new(config)?, out, progress),
        Experiment::Waves => waves::run(&Setup::new(config)?, out),
        Experiment::Solitons => solitons::run(&Setup::new(config)?, out, progress),
        Experiment::Coherence => coherence::run(&Setup::new(config)?, out, progress),
    }
}

/// Coupling tables and resolved detuning shared by every simulation of a
/// run.
pub struct Setup<'a> {
    pub config: &'a ExperimentConfig,
    pub tables: CouplingTables,
    pub delta0: f64,
}

impl<'a> Setup<'a> {
    pub fn new(config: &'a ExperimentConfig) -> CliResult<Self> {
        let tables = CouplingTables::build(&config.geometry.params()?)?;
        let delta0 = config.drive.resolve_delta0(tables.delta_l);
        Ok(Self {
            config,
            tables,
            delta0,
        })
    }

    pub fn n(&self) -> usize {
        self.tables.n()
    }

    pub fn topology(&self) -> Topology {
        self.tables.geometry.topology
    }

    pub fn drive(&self, omega: f64) -> DriveParams {
        self.config.drive.params(omega, self.delta0)
    }

    pub fn model(&self, omega: f64, offsets: Option<&[f64]>) -> CliResult<Model> {
        let detuning = match offsets {
            Some(o) => DetuningProfile::with_offsets(self.delta0, o),
            None => DetuningProfile::uniform(self.n(), self.delta0),
        };
        Ok(Model::new(&self.tables, self.drive(omega), detuning)?)
    }

    /// Uniform steady state of a ring with this run's geometry, reached
    /// from `seed`. Used for branch levels on chains as well.
    pub fn uniform_branch(&self, omega: f64, seed: Seed) -> CliResult<UniformState> {
        let ring_tables;
        let tables = if self.topology() == Topology::Ring {
            &self.tables
        } else {
            let g = &self.tables.geometry;
            let ring = GeometryParams::new(g.n_molecules, Topology::Ring, g.k0a, g.orientation_factor)?
                .with_prefactor(g.dipole_prefactor);
            ring_tables = CouplingTables::build(&ring)?;
            &ring_tables
        };
        Ok(uniform_fixed_point(&self.drive(omega), tables, (seed[0], seed[1]))?)
    }

    pub fn constants(&self) -> Value {
        json!({
            "gamma_r": self.tables.gamma_r,
            "delta_l": self.tables.delta_l,
            "delta0": self.delta0,
            "detuning_convention": self.config.drive.detuning_convention,
            "detuning_value": self.config.drive.detuning_value(),
            "effective_detuning": self.delta0 + self.tables.delta_l,
            "rel_tol": self.config.integrator.rel_tol,
            "abs_tol": self.config.integrator.abs_tol,
            "steady_eps": self.config.integrator.steady_eps,
            "t_max": self.config.integrator.t_max,
        })
    }
}

/// Uniform seed populations with `seed_b` written over the given runs of
/// molecules; indices wrap on rings and are clipped on chains.
pub fn patched_populations(
    n: usize,
    topology: Topology,
    base: Seed,
    patch: Seed,
    runs: &[(usize, usize)],
) -> (Vec<f64>, Vec<f64>) {
    let mut rho11 = vec![base[0]; n];
    let mut rho22 = vec![base[1]; n];
    for &(start, width) in runs {
        for j in start..start + width {
            let k = match topology {
                Topology::Ring => j % n,
                Topology::Chain if j < n => j,
                Topology::Chain => break,
            };
            rho11[k] = patch[0];
            rho22[k] = patch[1];
        }
    }
    (rho11, rho22)
}

pub(crate) fn error_value(e: &dyn std::fmt::Display) -> Value {
    json!({ "error": e.to_string() })
}

pub(crate) fn state_extent(s: &StateVector) -> Value {
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({
        "rho11": [min(&s.rho11), max(&s.rho11)],
        "rho22": [min(&s.rho22), max(&s.rho22)],
    })
}
