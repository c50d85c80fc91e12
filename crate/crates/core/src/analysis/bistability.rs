use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::coupling::{CouplingTables, Topology};
use crate::dynamics::{
    relax_to_steady, DetuningConvention, DetuningProfile, DriveParams, IntegratorConfig, Model,
    StateVector,
};
use crate::error::{invalid, Result};

/// Steady state reached from one seed at one drive strength.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub state: StateVector,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchRecord {
    /// Uniform (ring mean) or max-over-chain `ρ11`.
    pub rho11: f64,
    /// `ρ22` at the molecule that supplies `rho11`, or the ring mean.
    pub rho22: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub omega: f64,
    pub low: BranchRecord,
    pub high: BranchRecord,
    /// `max_k |ρ11_low − ρ11_high|`.
    pub separation: f64,
    pub two_branch: bool,
}

impl ScanPoint {
    fn usable(&self) -> bool {
        self.low.converged && self.high.converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Seeds closer than this in `ρ11` count as one state.
    pub merge_tol: f64,
    /// Target width of the bracket around each window edge; `None` keeps
    /// the coarse grid edges.
    pub edge_resolution: Option<f64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            merge_tol: 1e-3,
            edge_resolution: Some(1e-3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HysteresisScan {
    pub topology: Topology,
    pub n: usize,
    /// Coarse grid points followed by refinement points, sorted by `omega`.
    pub points: Vec<ScanPoint>,
    /// Outermost two-branch drive strengths of the longest contiguous
    /// two-branch run.
    pub window: Option<(f64, f64)>,
    /// Drive strengths where a branch's `ρ22` decreased with `Ω`.
    pub monotonicity_violations: Vec<(&'static str, f64)>,
}

fn branch_record(state: &StateVector, converged: bool, topology: Topology) -> BranchRecord {
    match topology {
        Topology::Ring => {
            let n = state.len() as f64;
            BranchRecord {
                rho11: state.rho11.iter().sum::<f64>() / n,
                rho22: state.rho22.iter().sum::<f64>() / n,
                converged,
            }
        }
        Topology::Chain => {
            let (k, &rho11) = state
                .rho11
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty state");
            BranchRecord {
                rho11,
                rho22: state.rho22[k],
                converged,
            }
        }
    }
}

fn evaluate<F>(omega: f64, topology: Topology, merge_tol: f64, runner: &F) -> Result<ScanPoint>
where
    F: Fn(f64) -> Result<[SeedOutcome; 2]> + Sync,
{
    let [low, high] = runner(omega)?;
    let separation = low
        .state
        .rho11
        .iter()
        .zip(&high.state.rho11)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(ScanPoint {
        omega,
        low: branch_record(&low.state, low.converged, topology),
        high: branch_record(&high.state, high.converged, topology),
        separation,
        two_branch: separation >= merge_tol,
    })
}

/// Longest run of consecutive usable two-branch points, skipping points
/// that did not converge. Returns indices into `points`.
fn longest_run(points: &[ScanPoint]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut current: Option<(usize, usize)> = None;
    for (i, p) in points.iter().enumerate() {
        if !p.usable() {
            continue;
        }
        if p.two_branch {
            current = Some(current.map_or((i, i), |(s, _)| (s, i)));
            let (s, e) = current.unwrap();
            let len = points[e].omega - points[s].omega;
            if best.map_or(true, |(bs, be)| len > points[be].omega - points[bs].omega) {
                best = current;
            }
        } else {
            current = None;
        }
    }
    best
}

/// Two seeds are relaxed at every grid point by `runner`, which returns the
/// low-excitation seed's outcome first. Grid points are evaluated in
/// parallel on the current rayon pool; results are ordered by grid index.
pub fn scan_bistability<F>(
    topology: Topology,
    n: usize,
    omega_grid: &[f64],
    options: ScanOptions,
    runner: F,
) -> Result<HysteresisScan>
where
    F: Fn(f64) -> Result<[SeedOutcome; 2]> + Sync,
{
    if omega_grid.len() < 3 {
        return Err(invalid("omega_grid", "at least three points required"));
    }
    if omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("omega_grid", "must be strictly ascending"));
    }
    let mut points: Vec<ScanPoint> = omega_grid
        .par_iter()
        .map(|&omega| evaluate(omega, topology, options.merge_tol, &runner))
        .collect::<Result<_>>()?;

    if let (Some(resolution), Some((s, e))) = (options.edge_resolution, longest_run(&points)) {
        let outer_lo = points[..s].iter().rposition(|p| p.usable()).map(|i| points[i].clone());
        let outer_hi = points[e + 1..].iter().find(|p| p.usable()).cloned();
        let inner_lo = points[s].clone();
        let inner_hi = points[e].clone();
        let mut extra = Vec::new();
        if let Some(out) = outer_lo {
            extra.extend(bisect(out, inner_lo, resolution, topology, options.merge_tol, &runner)?);
        }
        if let Some(out) = outer_hi {
            extra.extend(bisect(out, inner_hi, resolution, topology, options.merge_tol, &runner)?);
        }
        points.extend(extra);
        points.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    }

    let window = longest_run(&points).map(|(s, e)| (points[s].omega, points[e].omega));
    let monotonicity_violations = monotonicity(&points);
    Ok(HysteresisScan {
        topology,
        n,
        points,
        window,
        monotonicity_violations,
    })
}

fn bisect<F>(
    mut outside: ScanPoint,
    mut inside: ScanPoint,
    resolution: f64,
    topology: Topology,
    merge_tol: f64,
    runner: &F,
) -> Result<Vec<ScanPoint>>
where
    F: Fn(f64) -> Result<[SeedOutcome; 2]> + Sync,
{
    let mut visited = Vec::new();
    while (inside.omega - outside.omega).abs() > resolution {
        let mid = evaluate(0.5 * (inside.omega + outside.omega), topology, merge_tol, runner)?;
        visited.push(mid.clone());
        if !mid.usable() {
            break;
        }
        if mid.two_branch {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(visited)
}

fn monotonicity(points: &[ScanPoint]) -> Vec<(&'static str, f64)> {
    let mut out = Vec::new();
    for (name, pick) in [
        ("low", (|p: &ScanPoint| p.low) as fn(&ScanPoint) -> BranchRecord),
        ("high", |p: &ScanPoint| p.high),
    ] {
        let usable: Vec<&ScanPoint> = points.iter().filter(|p| pick(p).converged).collect();
        for w in usable.windows(2) {
            if pick(w[1]).rho22 < pick(w[0]).rho22 {
                out.push((name, w[1].omega));
            }
        }
    }
    out
}

pub fn write_scan_csv<W: Write>(mut out: W, scan: &HysteresisScan) -> io::Result<()> {
    writeln!(out, "omega,branch,rho11_stat,rho22_stat,converged")?;
    for p in &scan.points {
        for (name, b) in [("low", p.low), ("high", p.high)] {
            writeln!(
                out,
                "{:.16e},{name},{:.16e},{:.16e},{}",
                p.omega, b.rho11, b.rho22, b.converged
            )?;
        }
    }
    Ok(())
}

/// Relaxes two uniform seed states with the standard rates at each drive
/// strength. `R` is seeded at the local linearized value.
#[derive(Debug, Clone)]
pub struct SteadyScanRunner {
    pub tables: CouplingTables,
    pub template: DriveParams,
    pub convention: DetuningConvention,
    pub detuning: f64,
    pub seeds: [(f64, f64); 2],
    pub config: IntegratorConfig,
}

impl SteadyScanRunner {
    pub fn model(&self, omega: f64) -> Result<Model> {
        let delta0 = self.convention.resolve_delta0(self.detuning, self.tables.delta_l);
        let mut drive = self.template.with_omega(omega);
        drive.delta0 = delta0;
        Model::new(&self.tables, drive, DetuningProfile::uniform(self.tables.n(), delta0))
    }

    pub fn run(&self, omega: f64) -> Result<[SeedOutcome; 2]> {
        let model = self.model(omega)?;
        let relax = |(a, b): (f64, f64)| -> Result<SeedOutcome> {
            let s = relax_to_steady(&model, &model.seeded_uniform(a, b), &self.config)?;
            let converged = s.converged();
            Ok(SeedOutcome {
                state: s.state,
                converged,
            })
        };
        Ok([relax(self.seeds[0])?, relax(self.seeds[1])?])
    }
}
