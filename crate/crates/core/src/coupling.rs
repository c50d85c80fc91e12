//! Delayed dipole–dipole interaction kernels and the collective rate/shift
//! used to make every other quantity dimensionless.
//!
//! For two molecules `m` lattice sites apart, with `x = k0a·m` and
//! `s = 1 − 3cos²θ`:
//!
//! ```text
//! γ_m = P · { [k0a·cos x / m² − sin x / m³]·s + k0a²·sin x / m · sin²θ }
//! Δ_m = P · { [cos x / m³ + k0a·sin x / m²]·s − k0a²·cos x / m · sin²θ }
//! ```
//!
//! where `P = μ²/(ħa³)` is the dipole prefactor. The collective radiative
//! rate is `γ_R = 2 Σ_{m=1}^{⌊N/2⌋} γ_m` and the collective shift is
//! `Δ_L = 2 Σ_{m=1}^{⌊N/2⌋} Δ_m / γ_R`.

use serde::{Deserialize, Serialize};

use crate::dynamics::DriveParams;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Chain,
    Ring,
}

impl Topology {
    /// Lattice distance between sites `l` and `k` of an `n`-site aggregate.
    pub fn separation(self, l: usize, k: usize, n: usize) -> usize {
        let d = l.abs_diff(k);
        match self {
            Topology::Chain => d,
            Topology::Ring => d.min(n - d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub n_molecules: usize,
    pub topology: Topology,
    pub k0a: f64,
    /// The factor `1 − 3cos²θ`.
    pub orientation_factor: f64,
    /// `sin²θ`, derived from `orientation_factor`.
    pub sin2_theta: f64,
    /// `μ²/(ħa³)` in raw rate units.
    pub dipole_prefactor: f64,
}

impl GeometryParams {
    pub fn new(
        n_molecules: usize,
        topology: Topology,
        k0a: f64,
        orientation_factor: f64,
    ) -> Result<Self> {
        let geom = Self {
            n_molecules,
            topology,
            k0a,
            orientation_factor,
            sin2_theta: (orientation_factor + 2.0) / 3.0,
            dipole_prefactor: 1.0,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// `k0a = 0.1`, `1 − 3cos²θ = −1`.
    pub fn standard(n_molecules: usize, topology: Topology) -> Result<Self> {
        Self::new(n_molecules, topology, 0.1, -1.0)
    }

    pub fn with_prefactor(mut self, dipole_prefactor: f64) -> Self {
        self.dipole_prefactor = dipole_prefactor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_molecules < 2 {
            return Err(invalid("n_molecules", format!("{} < 2", self.n_molecules)));
        }
        if !(self.k0a > 0.0 && self.k0a.is_finite()) {
            return Err(invalid("k0a", format!("{} must be positive", self.k0a)));
        }
        if !(-2.0..=1.0).contains(&self.orientation_factor) {
            return Err(invalid(
                "orientation_factor",
                format!("{} outside [-2, 1]", self.orientation_factor),
            ));
        }
        let expected = (self.orientation_factor + 2.0) / 3.0;
        if (self.sin2_theta - expected).abs() > 1e-12 {
            return Err(invalid(
                "sin2_theta",
                format!(
                    "{} inconsistent with orientation factor (expected {expected})",
                    self.sin2_theta
                ),
            ));
        }
        if !self.dipole_prefactor.is_finite() {
            return Err(invalid("dipole_prefactor", "must be finite"));
        }
        Ok(())
    }
}

/// Radiative and shift kernels for two molecules `separation` sites apart.
pub fn pair_coupling(separation: usize, geom: &GeometryParams) -> Result<(f64, f64)> {
    if separation == 0 {
        return Err(invalid("separation", "must be at least 1"));
    }
    let m = separation as f64;
    let ka = geom.k0a;
    let s = geom.orientation_factor;
    let (sin, cos) = (ka * m).sin_cos();
    let m2 = m * m;
    let m3 = m2 * m;

    let gamma = (ka * cos / m2 - sin / m3) * s + ka * ka * sin / m * geom.sin2_theta;
    let delta = (cos / m3 + ka * sin / m2) * s - ka * ka * cos / m * geom.sin2_theta;
    Ok((geom.dipole_prefactor * gamma, geom.dipole_prefactor * delta))
}

/// `(Σ γ_m, Σ Δ_m)` over `m = 1..=⌊N/2⌋`.
fn half_chain_sums(geom: &GeometryParams) -> (f64, f64) {
    (1..=geom.n_molecules / 2)
        .map(|m| pair_coupling(m, geom).expect("m >= 1"))
        .fold((0.0, 0.0), |(g, d), (gm, dm)| (g + gm, d + dm))
}

/// Collective radiative rate `γ_R`, the unit of every normalized rate.
pub fn radiative_rate(geom: &GeometryParams) -> Result<f64> {
    geom.validate()?;
    let gamma_r = 2.0 * half_chain_sums(geom).0;
    if gamma_r <= 0.0 || !gamma_r.is_finite() {
        return Err(Error::NonPositiveRate(gamma_r));
    }
    Ok(gamma_r)
}

/// Collective shift `Δ_L` in units of `γ_R`.
pub fn collective_shift(geom: &GeometryParams) -> Result<f64> {
    let gamma_r = radiative_rate(geom)?;
    Ok(2.0 * half_chain_sums(geom).1 / gamma_r)
}

/// Dense `N×N` coupling matrices plus the collective constants.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTables {
    pub geometry: GeometryParams,
    /// Row-major `γ_lk`, raw units.
    pub gamma: Vec<f64>,
    /// Row-major `Δ_lk`, raw units.
    pub delta: Vec<f64>,
    pub gamma_r: f64,
    pub delta_l: f64,
}

impl CouplingTables {
    pub fn build(geom: &GeometryParams) -> Result<Self> {
        let gamma_r = radiative_rate(geom)?;
        let delta_l = collective_shift(geom)?;
        let n = geom.n_molecules;

        // Every entry depends only on the separation.
        let kernel = separation_kernel(geom);
        let mut gamma = vec![0.0; n * n];
        let mut delta = vec![0.0; n * n];
        for l in 0..n {
            for k in 0..n {
                let (g, d) = kernel[geom.topology.separation(l, k, n)];
                gamma[l * n + k] = g;
                delta[l * n + k] = d;
            }
        }
        Ok(Self {
            geometry: geom.clone(),
            gamma,
            delta,
            gamma_r,
            delta_l,
        })
    }

    pub fn n(&self) -> usize {
        self.geometry.n_molecules
    }

    pub fn gamma(&self, l: usize, k: usize) -> f64 {
        self.gamma[l * self.n() + k]
    }

    pub fn delta(&self, l: usize, k: usize) -> f64 {
        self.delta[l * self.n() + k]
    }

    /// Kernel entries `(γ, Δ)/γ_R` indexed by separation `0..N`, with a zero
    /// self term.
    pub fn normalized_kernel(&self) -> Vec<(f64, f64)> {
        separation_kernel(&self.geometry)
            .into_iter()
            .map(|(g, d)| (g / self.gamma_r, d / self.gamma_r))
            .collect()
    }

    /// Normalized row sums `(Σ_l γ_lk, Σ_l Δ_lk)/γ_R` for row `k`.
    pub fn row_sums(&self, k: usize) -> (f64, f64) {
        let n = self.n();
        let (g, d) = (0..n).fold((0.0, 0.0), |(g, d), l| {
            (g + self.gamma(l, k), d + self.delta(l, k))
        });
        (g / self.gamma_r, d / self.gamma_r)
    }
}

/// `(γ_m, Δ_m)` for separations `0..N`; the `m = 0` entry is zero.
fn separation_kernel(geom: &GeometryParams) -> Vec<(f64, f64)> {
    std::iter::once((0.0, 0.0))
        .chain((1..geom.n_molecules).map(|m| pair_coupling(m, geom).expect("m >= 1")))
        .collect()
}

pub fn build_tables(geom: &GeometryParams) -> Result<CouplingTables> {
    CouplingTables::build(geom)
}

/// Drive parameters in raw rate units, before division by `γ_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawDriveParams {
    pub omega: num_complex::Complex64,
    pub delta0: f64,
    pub gamma21: f64,
    pub gamma_perp: f64,
    pub gamma31: f64,
    pub gamma32: f64,
    pub alpha: f64,
}

/// Divide every rate, detuning, the Rabi frequency and the annihilation
/// parameter by `γ_R`. Time is then measured in units of `1/γ_R`.
pub fn normalize(raw: &RawDriveParams, gamma_r: f64) -> Result<DriveParams> {
    if gamma_r <= 0.0 || !gamma_r.is_finite() {
        return Err(Error::NonPositiveRate(gamma_r));
    }
    Ok(DriveParams {
        omega: raw.omega / gamma_r,
        delta0: raw.delta0 / gamma_r,
        gamma21: raw.gamma21 / gamma_r,
        gamma_perp: raw.gamma_perp / gamma_r,
        gamma31: raw.gamma31 / gamma_r,
        gamma32: raw.gamma32 / gamma_r,
        alpha: raw.alpha / gamma_r,
    })
}

/// Scale detuning offsets (raw units) to `γ_R` units.
pub fn normalize_offsets(offsets: &[f64], gamma_r: f64) -> Result<Vec<f64>> {
    if gamma_r <= 0.0 || !gamma_r.is_finite() {
        return Err(Error::NonPositiveRate(gamma_r));
    }
    Ok(offsets.iter().map(|d| d / gamma_r).collect())
}
