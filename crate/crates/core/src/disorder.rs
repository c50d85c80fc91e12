//! Static Gaussian disorder of the molecular transition frequencies.
//!
//! Each realization is generated by its own ChaCha8 stream. Sub-seeds of an
//! ensemble are the first output word of stream `index` of a ChaCha8
//! generator keyed by the master seed, so a realization depends only on
//! `(master_seed, index)` and never on generation order.

use std::io::{self, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Identity of the generator and transform, recorded in output metadata.
pub const PRNG_NAME: &str = "rand_chacha 0.9 ChaCha8Rng::seed_from_u64; Box-Muller cosine branch, 2 words per draw; sub-seed = stream(index).next_u64()";

pub const DEFAULT_REALIZATIONS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SigmaUnit {
    #[serde(rename = "gamma_r")]
    GammaR,
    #[default]
    #[serde(rename = "abs_delta_l")]
    AbsDeltaL,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    pub sigma: f64,
    #[serde(default)]
    pub sigma_unit: SigmaUnit,
    #[serde(default = "default_count")]
    pub realization_count: usize,
}

fn default_count() -> usize {
    DEFAULT_REALIZATIONS
}

impl DisorderSpec {
    pub fn new(sigma: f64, sigma_unit: SigmaUnit) -> Self {
        Self {
            sigma,
            sigma_unit,
            realization_count: DEFAULT_REALIZATIONS,
        }
    }

    pub fn none() -> Self {
        Self::new(0.0, SigmaUnit::GammaR)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", format!("{} must be finite and >= 0", self.sigma)));
        }
        if self.realization_count == 0 {
            return Err(invalid("realization_count", "must be at least 1"));
        }
        Ok(())
    }

    /// Standard deviation in γ_R units.
    pub fn sigma_gamma_r(&self, delta_l: f64) -> f64 {
        match self.sigma_unit {
            SigmaUnit::GammaR => self.sigma,
            SigmaUnit::AbsDeltaL => self.sigma * delta_l.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisorderRealization {
    pub index: usize,
    pub seed: u64,
    /// δΔ_k in γ_R units.
    pub offsets: Vec<f64>,
}

fn unit_open(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn unit_closed_open(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal deviate from exactly two generator words.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = unit_open(rng.next_u64());
    let u2 = unit_closed_open(rng.next_u64());
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn sample_detunings(
    spec: &DisorderSpec,
    seed: u64,
    n: usize,
    delta_l: f64,
) -> Result<DisorderRealization> {
    sample_indexed(spec, 0, seed, n, delta_l)
}

fn sample_indexed(
    spec: &DisorderSpec,
    index: usize,
    seed: u64,
    n: usize,
    delta_l: f64,
) -> Result<DisorderRealization> {
    if n == 0 {
        return Err(invalid("n", "at least one molecule required"));
    }
    spec.validate()?;
    let sigma = spec.sigma_gamma_r(delta_l);
    let offsets = if sigma == 0.0 {
        vec![0.0; n]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| sigma * standard_normal(&mut rng)).collect()
    };
    Ok(DisorderRealization {
        index,
        seed,
        offsets,
    })
}

pub fn sub_seed(master_seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

pub fn make_ensemble(
    spec: &DisorderSpec,
    master_seed: u64,
    n: usize,
    delta_l: f64,
) -> Result<Vec<DisorderRealization>> {
    spec.validate()?;
    (0..spec.realization_count)
        .map(|i| sample_indexed(spec, i, sub_seed(master_seed, i), n, delta_l))
        .collect()
}

/// Arithmetic mean and sample (n − 1) standard deviation; the deviation of
/// a single value is 0.
pub fn ensemble_mean(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("ensemble values"));
    }
    let n = values.len() as f64;
    let shift = values[0];
    let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

pub fn write_realizations_csv<W: Write>(
    mut out: W,
    realizations: &[DisorderRealization],
) -> io::Result<()> {
    writeln!(out, "index,k,delta_offset")?;
    for r in realizations {
        for (k, d) in r.offsets.iter().enumerate() {
            writeln!(out, "{},{},{:.16e}", r.index, k, d)?;
        }
    }
    Ok(())
}
