use std::collections::BTreeMap;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::wrap_phase;
use crate::coupling::Topology;
use crate::dynamics::StateVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "phase", rename_all = "snake_case")]
pub enum PhaseReference {
    /// `arg Ω`.
    FieldPhase,
    /// Phase of `R` in the disorder-free uniform steady state.
    UniformStatePhase(f64),
}

impl PhaseReference {
    pub fn phase(&self, omega: Complex64) -> f64 {
        match *self {
            PhaseReference::FieldPhase => omega.arg(),
            PhaseReference::UniformStatePhase(p) => p,
        }
    }
}

/// Molecules whose `arg R_k` lies strictly within `π/2` of the reference.
/// `R_k = 0` has no phase and counts as incoherent.
pub fn coherent_mask(state: &StateVector, reference: PhaseReference, omega: Complex64) -> Vec<bool> {
    let phi = reference.phase(omega);
    state
        .r
        .iter()
        .map(|r| *r != Complex64::new(0.0, 0.0) && wrap_phase(r.arg() - phi).abs() < std::f64::consts::FRAC_PI_2)
        .collect()
}

/// Cluster counts keyed by cluster size. Counts are real so that
/// realization averages share the type.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ClusterHistogram {
    pub counts: BTreeMap<usize, f64>,
}

impl ClusterHistogram {
    /// `Σ_k k·C(k)`.
    pub fn coherent_molecules(&self) -> f64 {
        self.counts.iter().map(|(k, c)| *k as f64 * c).sum()
    }

    pub fn total(&self) -> f64 {
        self.counts.values().sum()
    }
}

/// Runs of consecutive coherent molecules; on a ring a run crossing the
/// index seam is one cluster.
pub fn cluster_histogram(mask: &[bool], topology: Topology) -> ClusterHistogram {
    let mut runs = Vec::new();
    let mut len = 0;
    for &m in mask {
        if m {
            len += 1;
        } else if len > 0 {
            runs.push(len);
            len = 0;
        }
    }
    if len > 0 {
        runs.push(len);
    }
    let all = !mask.is_empty() && mask.iter().all(|&m| m);
    if topology == Topology::Ring && !all && mask.first() == Some(&true) && mask.last() == Some(&true) {
        let tail = runs.pop().expect("last run exists");
        runs[0] += tail;
    }
    let mut counts = BTreeMap::new();
    for r in runs {
        *counts.entry(r).or_insert(0.0) += 1.0;
    }
    ClusterHistogram { counts }
}

/// Per-size mean over realizations.
pub fn average_histograms(histograms: &[ClusterHistogram]) -> Result<ClusterHistogram> {
    if histograms.is_empty() {
        return Err(Error::Empty("histograms"));
    }
    let mut counts = BTreeMap::new();
    for h in histograms {
        for (k, c) in &h.counts {
            *counts.entry(*k).or_insert(0.0) += c;
        }
    }
    let n = histograms.len() as f64;
    for c in counts.values_mut() {
        *c /= n;
    }
    Ok(ClusterHistogram { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum CoherenceLength {
    Defined(f64),
    /// No coherent molecule at all.
    Undefined,
}

impl CoherenceLength {
    pub fn of(histogram: &ClusterHistogram) -> Self {
        let total = histogram.total();
        if total > 0.0 {
            CoherenceLength::Defined(histogram.coherent_molecules() / total)
        } else {
            CoherenceLength::Undefined
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            CoherenceLength::Defined(v) => Some(v),
            CoherenceLength::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceResult {
    pub sigma: f64,
    pub omega: f64,
    /// `Σ k Clas(k) / Σ Clas(k)` on the realization-averaged histogram.
    pub l_c: CoherenceLength,
    pub per_realization: Vec<CoherenceLength>,
    /// Mean and sample deviation of the defined per-realization values.
    pub per_realization_mean: Option<(f64, f64)>,
}

pub fn coherence_length(histograms: &[ClusterHistogram], sigma: f64, omega: f64) -> Result<CoherenceResult> {
    let averaged = average_histograms(histograms)?;
    let per_realization: Vec<CoherenceLength> = histograms.iter().map(CoherenceLength::of).collect();
    let defined: Vec<f64> = per_realization.iter().filter_map(|l| l.value()).collect();
    Ok(CoherenceResult {
        sigma,
        omega,
        l_c: CoherenceLength::of(&averaged),
        per_realization_mean: crate::disorder::ensemble_mean(&defined).ok(),
        per_realization,
    })
}

fn fmt_length(l: CoherenceLength) -> String {
    match l {
        CoherenceLength::Defined(v) => format!("{v:.16e}"),
        CoherenceLength::Undefined => "undefined".into(),
    }
}

/// `sigma, omega, realization, L_c`.
pub fn write_coherence_csv<W: Write>(mut out: W, results: &[CoherenceResult]) -> io::Result<()> {
    writeln!(out, "sigma,omega,realization,L_c")?;
    for r in results {
        for (i, l) in r.per_realization.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{i},{}", r.sigma, r.omega, fmt_length(*l))?;
        }
    }
    Ok(())
}

/// `sigma, omega, L_c_mean, L_c_std` from the per-realization values.
pub fn write_coherence_summary_csv<W: Write>(mut out: W, results: &[CoherenceResult]) -> io::Result<()> {
    writeln!(out, "sigma,omega,L_c_mean,L_c_std")?;
    for r in results {
        match r.per_realization_mean {
            Some((m, s)) => writeln!(out, "{:.16e},{:.16e},{m:.16e},{s:.16e}", r.sigma, r.omega)?,
            None => writeln!(out, "{:.16e},{:.16e},undefined,undefined", r.sigma, r.omega)?,
        }
    }
    Ok(())
}
