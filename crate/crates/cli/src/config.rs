use std::fmt;
use std::path::{Path, PathBuf};

use jagg_core::analysis::PhaseReference;
use jagg_core::coupling::{GeometryParams, Topology};
use jagg_core::disorder::{DisorderSpec, SigmaUnit, DEFAULT_REALIZATIONS};
use jagg_core::dynamics::{DetuningConvention, DriveParams, IntegratorConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Spectra,
    Steady,
    Bistability,
    Waves,
    Solitons,
    Coherence,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::Spectra => "spectra",
            Experiment::Steady => "steady",
            Experiment::Bistability => "bistability",
            Experiment::Waves => "waves",
            Experiment::Solitons => "solitons",
            Experiment::Coherence => "coherence",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n_molecules: usize,
    pub topology: Topology,
    #[serde(default = "default_k0a")]
    pub k0a: f64,
    #[serde(default = "default_orientation")]
    pub orientation_factor: f64,
    #[serde(default = "one")]
    pub dipole_prefactor: f64,
}

fn default_k0a() -> f64 {
    0.1
}
fn default_orientation() -> f64 {
    -1.0
}
fn one() -> f64 {
    1.0
}

impl GeometryConfig {
    pub fn params(&self) -> jagg_core::Result<GeometryParams> {
        Ok(GeometryParams::new(self.n_molecules, self.topology, self.k0a, self.orientation_factor)?
            .with_prefactor(self.dipole_prefactor))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default = "one")]
    pub omega: f64,
    /// Phase of the complex Rabi frequency, radians.
    #[serde(default)]
    pub omega_phase: f64,
    #[serde(default)]
    pub detuning_convention: DetuningConvention,
    /// Collective detuning, used with the `effective` convention.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_eff: Option<f64>,
    /// `Δ0 − Δ_L`, used with the `literal` convention.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0_minus_delta_l: Option<f64>,
    /// `Δ0`, used with the `absolute` convention.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default = "one")]
    pub gamma21: f64,
    #[serde(default = "default_gamma_perp")]
    pub gamma_perp: f64,
    #[serde(default = "default_gamma31")]
    pub gamma31: f64,
    #[serde(default = "default_gamma32")]
    pub gamma32: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_gamma_perp() -> f64 {
    1.1
}
fn default_gamma31() -> f64 {
    0.01
}
fn default_gamma32() -> f64 {
    0.99
}
fn default_alpha() -> f64 {
    41.1
}

impl Default for DriveConfig {
    fn default() -> Self {
        toml::from_str("").expect("all drive fields have defaults")
    }
}

impl DriveConfig {
    /// The configured detuning value for the active convention.
    pub fn detuning_value(&self) -> Option<f64> {
        match self.detuning_convention {
            DetuningConvention::Effective => Some(self.delta_eff.unwrap_or(-10.0)),
            DetuningConvention::Literal => Some(self.delta0_minus_delta_l.unwrap_or(-10.0)),
            DetuningConvention::Absolute => self.delta0,
        }
    }

    pub fn resolve_delta0(&self, delta_l: f64) -> f64 {
        let v = self.detuning_value().expect("validated");
        self.detuning_convention.resolve_delta0(v, delta_l)
    }

    pub fn params(&self, omega: f64, delta0: f64) -> DriveParams {
        DriveParams {
            omega: Complex64::from_polar(omega, self.omega_phase),
            delta0,
            gamma21: self.gamma21,
            gamma_perp: self.gamma_perp,
            gamma31: self.gamma31,
            gamma32: self.gamma32,
            alpha: self.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub sigma_unit: SigmaUnit,
    #[serde(default = "default_realizations")]
    pub realization_count: usize,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_realizations() -> usize {
    DEFAULT_REALIZATIONS
}

impl Default for DisorderConfig {
    fn default() -> Self {
        toml::from_str("").expect("all disorder fields have defaults")
    }
}

impl DisorderConfig {
    pub fn spec(&self, sigma: f64) -> DisorderSpec {
        DisorderSpec {
            sigma,
            sigma_unit: self.sigma_unit,
            realization_count: self.realization_count,
        }
    }
}

/// An explicit list or an inclusive evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                c => (0..*c)
                    .map(|i| start + (stop - start) * i as f64 / (c - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraOptions {
    #[serde(default = "default_f0")]
    pub f0: f64,
    #[serde(default = "default_spectra_n")]
    pub n_values: Vec<usize>,
    /// Attach the shipped quantum-chemical strengths to the `N = 50` table.
    #[serde(default = "yes")]
    pub include_reference: bool,
}

fn default_f0() -> f64 {
    1.37
}
fn default_spectra_n() -> Vec<usize> {
    vec![50]
}
fn yes() -> bool {
    true
}

impl Default for SpectraOptions {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

/// `(ρ11, ρ22)` seed states of the low- and high-excitation branches.
pub type Seed = [f64; 2];

pub const LOW_SEED: Seed = [0.99, 0.004];
pub const HIGH_SEED: Seed = [0.9, 0.04];

fn default_seeds() -> Vec<Seed> {
    vec![LOW_SEED, HIGH_SEED]
}
fn default_pair() -> [Seed; 2] {
    [LOW_SEED, HIGH_SEED]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyOptions {
    #[serde(default = "default_seeds")]
    pub seeds: Vec<Seed>,
    /// Relative tolerance of the edge-zone measurement on chains.
    #[serde(default = "default_edge_tol")]
    pub edge_tolerance: f64,
}

fn default_edge_tol() -> f64 {
    0.05
}

impl Default for SteadyOptions {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BistabilityOptions {
    #[serde(default = "default_pair")]
    pub seeds: [Seed; 2],
    #[serde(default = "default_merge")]
    pub merge_tol: f64,
    /// 0 disables edge refinement.
    #[serde(default = "default_resolution")]
    pub edge_resolution: f64,
}

fn default_merge() -> f64 {
    1e-3
}
fn default_resolution() -> f64 {
    1e-3
}

impl Default for BistabilityOptions {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavesOptions {
    #[serde(default = "default_pair")]
    pub seeds: [Seed; 2],
    /// Molecules `[0, high_count)` start on the high-excitation seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high_count: Option<usize>,
    #[serde(default = "default_wave_end")]
    pub t_end: f64,
    #[serde(default = "default_wave_dt")]
    pub sample_interval: f64,
}

fn default_wave_end() -> f64 {
    600.0
}
fn default_wave_dt() -> f64 {
    2.0
}

impl Default for WavesOptions {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonOptions {
    #[serde(default = "default_pair")]
    pub seeds: [Seed; 2],
    /// Index of the seed used as background; the other fills the bumps.
    #[serde(default)]
    pub background: usize,
    /// First molecule of each seeded bump.
    #[serde(default = "default_bump_starts")]
    pub bump_starts: Vec<usize>,
    #[serde(default = "default_bump_width")]
    pub bump_width: usize,
    /// Extra integration time after convergence over which the structure
    /// must persist.
    #[serde(default = "default_persist")]
    pub persist_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_margin: Option<usize>,
    #[serde(default = "default_relative")]
    pub relative_threshold: f64,
    #[serde(default = "default_floor")]
    pub absolute_floor: f64,
}

fn default_bump_starts() -> Vec<usize> {
    vec![0]
}
fn default_bump_width() -> usize {
    24
}
fn default_persist() -> f64 {
    1000.0
}
fn default_relative() -> f64 {
    0.3
}
fn default_floor() -> f64 {
    1e-3
}

impl Default for SolitonOptions {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseReferenceKind {
    #[default]
    UniformState,
    Field,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceOptions {
    #[serde(default)]
    pub phase_reference: PhaseReferenceKind,
    /// Seed selecting the disorder-free uniform state every realization
    /// starts from.
    #[serde(default = "default_initial")]
    pub initial_seed: Seed,
}

fn default_initial() -> Seed {
    LOW_SEED
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

impl CoherenceOptions {
    pub fn reference(&self, uniform_phase: f64) -> PhaseReference {
        match self.phase_reference {
            PhaseReferenceKind::UniformState => PhaseReference::UniformStatePhase(uniform_phase),
            PhaseReferenceKind::Field => PhaseReference::FieldPhase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub parallelism: usize,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default)]
    pub disorder: DisorderConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub spectra: SpectraOptions,
    #[serde(default)]
    pub steady: SteadyOptions,
    #[serde(default)]
    pub bistability: BistabilityOptions,
    #[serde(default)]
    pub waves: WavesOptions,
    #[serde(default)]
    pub solitons: SolitonOptions,
    #[serde(default)]
    pub coherence: CoherenceOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

struct Checker(Vec<Violation>);

impl Checker {
    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    fn check(&mut self, ok: bool, field: &str, message: impl Into<String>) {
        if !ok {
            self.fail(field, message);
        }
    }

    fn non_negative(&mut self, v: f64, field: &str) {
        self.check(v >= 0.0 && v.is_finite(), field, format!("{v} must be finite and >= 0"));
    }

    fn positive(&mut self, v: f64, field: &str) {
        self.check(v > 0.0 && v.is_finite(), field, format!("{v} must be finite and > 0"));
    }

    fn seed(&mut self, s: &Seed, field: &str) {
        let ok = s.iter().all(|v| (0.0..=1.0).contains(v)) && s[0] + s[1] <= 1.0;
        self.check(ok, field, format!("{s:?} must be populations in [0, 1] with rho11 + rho22 <= 1"));
    }

    fn grid(&mut self, grid: Option<&Grid>, field: &str, required: bool, min_len: usize) {
        match grid {
            None if required => self.fail(field, "required for this experiment"),
            None => {}
            Some(g) => {
                let v = g.values();
                if v.len() < min_len {
                    self.fail(field, format!("needs at least {min_len} point(s), got {}", v.len()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    self.fail(field, "values must be finite");
                }
                if v.windows(2).any(|w| w[1] <= w[0]) {
                    self.fail(field, "values must be strictly ascending");
                }
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Every violation found, in field order; empty when the config is
    /// runnable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut c = Checker(Vec::new());
        let g = &self.geometry;
        let needs_aggregate = self.experiment != Experiment::Spectra;
        if needs_aggregate {
            c.check(g.n_molecules >= 2, "geometry.n_molecules", format!("{} must be >= 2", g.n_molecules));
        }
        c.positive(g.k0a, "geometry.k0a");
        c.check(
            (-2.0..=1.0).contains(&g.orientation_factor),
            "geometry.orientation_factor",
            format!("{} must lie in [-2, 1]", g.orientation_factor),
        );
        c.positive(g.dipole_prefactor, "geometry.dipole_prefactor");

        let d = &self.drive;
        c.non_negative(d.omega, "drive.omega");
        c.check(d.omega_phase.is_finite(), "drive.omega_phase", "must be finite");
        for (v, f) in [
            (d.gamma21, "drive.gamma21"),
            (d.gamma_perp, "drive.gamma_perp"),
            (d.gamma31, "drive.gamma31"),
            (d.gamma32, "drive.gamma32"),
            (d.alpha, "drive.alpha"),
        ] {
            c.non_negative(v, f);
        }
        let conv = d.detuning_convention;
        for (set, key, wanted) in [
            (d.delta_eff.is_some(), "drive.delta_eff", DetuningConvention::Effective),
            (d.delta0_minus_delta_l.is_some(), "drive.delta0_minus_delta_l", DetuningConvention::Literal),
            (d.delta0.is_some(), "drive.delta0", DetuningConvention::Absolute),
        ] {
            if set && conv != wanted {
                c.fail(key, format!("not used with detuning_convention = {conv:?}"));
            }
        }
        if conv == DetuningConvention::Absolute && d.delta0.is_none() {
            c.fail("drive.delta0", "required with detuning_convention = absolute");
        }
        if let Some(v) = d.detuning_value() {
            c.check(v.is_finite(), "drive.detuning", "must be finite");
        }

        let dis = &self.disorder;
        c.non_negative(dis.sigma, "disorder.sigma");
        c.check(dis.realization_count >= 1, "disorder.realization_count", "must be >= 1");

        let i = &self.integrator;
        for (v, f) in [
            (i.rel_tol, "integrator.rel_tol"),
            (i.abs_tol, "integrator.abs_tol"),
            (i.max_step, "integrator.max_step"),
            (i.steady_eps, "integrator.steady_eps"),
            (i.t_max, "integrator.t_max"),
            (i.validity_threshold, "integrator.validity_threshold"),
        ] {
            c.positive(v, f);
        }
        c.check(i.max_steps > 0, "integrator.max_steps", "must be > 0");

        let sw = &self.sweep;
        match self.experiment {
            Experiment::Spectra => {
                let s = &self.spectra;
                c.positive(s.f0, "spectra.f0");
                c.check(!s.n_values.is_empty(), "spectra.n_values", "must not be empty");
                c.check(s.n_values.iter().all(|&n| n >= 1), "spectra.n_values", "every N must be >= 1");
            }
            Experiment::Steady => {
                let s = &self.steady;
                c.check(!s.seeds.is_empty(), "steady.seeds", "must not be empty");
                for seed in &s.seeds {
                    c.seed(seed, "steady.seeds");
                }
                c.positive(s.edge_tolerance, "steady.edge_tolerance");
                c.grid(sw.omega.as_ref(), "sweep.omega", false, 1);
            }
            Experiment::Bistability => {
                let b = &self.bistability;
                c.grid(sw.omega.as_ref(), "sweep.omega", true, 3);
                for seed in &b.seeds {
                    c.seed(seed, "bistability.seeds");
                }
                c.positive(b.merge_tol, "bistability.merge_tol");
                c.non_negative(b.edge_resolution, "bistability.edge_resolution");
            }
            Experiment::Waves => {
                let w = &self.waves;
                for seed in &w.seeds {
                    c.seed(seed, "waves.seeds");
                }
                if let Some(h) = w.high_count {
                    c.check(h <= g.n_molecules, "waves.high_count", format!("{h} exceeds n_molecules"));
                }
                c.positive(w.t_end, "waves.t_end");
                c.positive(w.sample_interval, "waves.sample_interval");
            }
            Experiment::Solitons => {
                let s = &self.solitons;
                for seed in &s.seeds {
                    c.seed(seed, "solitons.seeds");
                }
                c.check(s.background <= 1, "solitons.background", "must be 0 or 1");
                c.check(s.bump_width >= 1, "solitons.bump_width", "must be >= 1");
                c.check(
                    s.bump_starts.iter().all(|&b| b < g.n_molecules),
                    "solitons.bump_starts",
                    "every start must be < n_molecules",
                );
                c.non_negative(s.persist_time, "solitons.persist_time");
                c.non_negative(s.relative_threshold, "solitons.relative_threshold");
                c.non_negative(s.absolute_floor, "solitons.absolute_floor");
                if let Some(m) = s.edge_margin {
                    c.check(
                        2 * m < g.n_molecules,
                        "solitons.edge_margin",
                        format!("{m} leaves no interior"),
                    );
                }
                c.grid(sw.omega.as_ref(), "sweep.omega", false, 1);
            }
            Experiment::Coherence => {
                c.check(g.topology == Topology::Ring, "geometry.topology", "coherence runs start from a uniform ring state");
                c.grid(sw.omega.as_ref(), "sweep.omega", true, 1);
                c.grid(sw.sigma.as_ref(), "sweep.sigma", false, 1);
                if let Some(s) = &sw.sigma {
                    if s.values().iter().any(|v| *v < 0.0) {
                        c.fail("sweep.sigma", "values must be >= 0");
                    }
                }
                c.seed(&self.coherence.initial_seed, "coherence.initial_seed");
            }
        }
        c.0
    }

    /// Drive strengths to run: the Ω sweep if present, else `drive.omega`.
    pub fn omegas(&self) -> Vec<f64> {
        self.sweep.omega.as_ref().map_or_else(|| vec![self.drive.omega], Grid::values)
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.sweep.sigma.as_ref().map_or_else(|| vec![self.disorder.sigma], Grid::values)
    }
}
