use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::median;
use crate::coupling::Topology;
use crate::dynamics::SteadyState;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolitonCriteria {
    /// Fraction of `dynamic_range` a deviation must exceed.
    pub relative: f64,
    /// `ρ22` difference between the high and low uniform branches.
    pub dynamic_range: f64,
    pub absolute_floor: f64,
}

impl Default for SolitonCriteria {
    fn default() -> Self {
        Self {
            relative: 0.3,
            dynamic_range: 0.0,
            absolute_floor: 1e-3,
        }
    }
}

impl SolitonCriteria {
    pub fn with_branches(rho22_low: f64, rho22_high: f64) -> Self {
        Self {
            dynamic_range: (rho22_high - rho22_low).abs(),
            ..Default::default()
        }
    }

    pub fn threshold(&self) -> f64 {
        (self.relative * self.dynamic_range).max(self.absolute_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Soliton {
    /// `ρ22`-weighted centroid, fractional molecule index.
    pub center: f64,
    pub width: usize,
    /// Signed `ρ22 − background` of largest magnitude.
    pub peak_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonReport {
    pub solitons: Vec<Soliton>,
    /// Median `(ρ11, ρ22)` over the examined molecules.
    pub background: (f64, f64),
    pub threshold: f64,
}

/// Localized departures of `ρ22` from its median. On chains the first and
/// last `edge_margin` molecules are excluded; on rings runs may cross the
/// index seam.
pub fn detect_solitons(
    steady: &SteadyState,
    topology: Topology,
    edge_margin: usize,
    criteria: &SolitonCriteria,
) -> Result<SolitonReport> {
    if !steady.converged() {
        return Err(invalid("steady", "soliton detection needs a converged steady state"));
    }
    let s = &steady.state;
    let n = s.len();
    let (lo, hi) = match topology {
        Topology::Ring => (0, n),
        Topology::Chain => (edge_margin.min(n), n.saturating_sub(edge_margin)),
    };
    if lo >= hi {
        return Err(invalid("edge_margin", format!("{edge_margin} leaves no interior in N = {n}")));
    }
    let rho22 = &s.rho22[lo..hi];
    let bg22 = median(&mut rho22.to_vec());
    let bg11 = median(&mut s.rho11[lo..hi].to_vec());
    let threshold = criteria.threshold();
    let m = rho22.len();
    let outside: Vec<bool> = rho22.iter().map(|v| (v - bg22).abs() > threshold).collect();

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut k = 0;
    while k < m {
        if outside[k] {
            let start = k;
            while k < m && outside[k] {
                k += 1;
            }
            runs.push((start, k - start));
        } else {
            k += 1;
        }
    }
    if topology == Topology::Ring && runs.len() > 1 {
        let last = *runs.last().unwrap();
        if runs[0].0 == 0 && last.0 + last.1 == m {
            runs.pop();
            runs[0] = (last.0, last.1 + runs[0].1);
        }
    }

    let solitons = runs
        .into_iter()
        .map(|(start, width)| {
            let (mut wsum, mut xsum, mut peak) = (0.0, 0.0, 0.0f64);
            for j in 0..width {
                let unwrapped = start + j;
                let v = rho22[unwrapped % m];
                wsum += v;
                xsum += v * unwrapped as f64;
                let dev = v - bg22;
                if dev.abs() > peak.abs() {
                    peak = dev;
                }
            }
            let center = if wsum > 0.0 {
                xsum / wsum
            } else {
                start as f64 + (width - 1) as f64 / 2.0
            };
            Soliton {
                center: (center % m as f64) + lo as f64,
                width,
                peak_deviation: peak,
            }
        })
        .collect();
    Ok(SolitonReport {
        solitons,
        background: (bg11, bg22),
        threshold,
    })
}

pub fn write_solitons_csv<W: Write>(mut out: W, report: &SolitonReport) -> io::Result<()> {
    writeln!(out, "center,width,peak_dev")?;
    for s in &report.solitons {
        writeln!(out, "{:.16e},{},{:.16e}", s.center, s.width, s.peak_deviation)?;
    }
    Ok(())
}
