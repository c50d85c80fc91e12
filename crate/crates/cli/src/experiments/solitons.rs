use jagg_core::analysis::{detect_solitons, write_solitons_csv, SolitonCriteria, SolitonReport};
use jagg_core::coupling::Topology;
use jagg_core::dynamics::{integrate, relax_to_steady, write_state_csv, SteadyState};
use serde::Serialize;
use serde_json::json;

use super::{error_value, patched_populations, ExperimentResult, Setup};
use crate::error::CliResult;
use crate::output::Output;
use crate::pool::par_map;

const CHAIN_EDGE_MARGIN: usize = 50;
/// Largest centroid displacement, in molecules, still counted as the same
/// soliton after the persistence run.
const PERSIST_SHIFT: f64 = 2.0;
/// `ρ22` difference below which the two uniform branches are one state.
const MERGED_BRANCHES: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct ExistencePoint {
    pub omega: f64,
    pub converged: bool,
    pub persistent: bool,
    pub report: Option<SolitonReport>,
    #[serde(skip)]
    pub state: Option<SteadyState>,
    pub failure: Option<serde_json::Value>,
}

impl ExistencePoint {
    pub fn count(&self) -> usize {
        self.report.as_ref().map_or(0, |r| r.solitons.len())
    }

    /// Converged, persistent and carrying at least one soliton.
    pub fn exists(&self) -> bool {
        self.converged && self.persistent && self.count() > 0
    }
}

pub fn run(setup: &Setup, out: &mut Output, progress: bool) -> CliResult<ExperimentResult> {
    let cfg = setup.config;
    let omegas = cfg.omegas();
    let points = par_map("solitons", &omegas, progress, |&omega| {
        evaluate(setup, omega).unwrap_or_else(|e| ExistencePoint {
            omega,
            converged: false,
            persistent: false,
            report: None,
            state: None,
            failure: Some(error_value(&e)),
        })
    });

    out.write("existence.csv", |w| {
        use std::io::Write;
        writeln!(w, "omega,solitons,persistent,converged")?;
        for p in &points {
            writeln!(w, "{:.16e},{},{},{}", p.omega, p.count(), p.persistent, p.converged)?;
        }
        Ok(())
    })?;
    for (i, p) in points.iter().enumerate() {
        if let Some(report) = &p.report {
            out.write(&format!("solitons_o{i:03}.csv"), |w| write_solitons_csv(w, report))?;
        }
        if let Some(s) = &p.state {
            out.write(&format!("state_o{i:03}.csv"), |w| write_state_csv(w, &s.state))?;
        }
    }

    let summary = json!({
        "existence_interval": existence_interval(&points),
        "points": points,
    });
    Ok(ExperimentResult {
        constants: setup.constants(),
        summary,
    })
}

/// Outermost Ω of the longest contiguous run of grid points with
/// persistent solitons.
pub fn existence_interval(points: &[ExistencePoint]) -> Option<(f64, f64)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, p) in points.iter().enumerate() {
        match (p.exists(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(a, b)| i - s > b - a + 1) {
                    best = Some((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        let e = points.len() - 1;
        if best.is_none_or(|(a, b)| e - s > b - a) {
            best = Some((s, e));
        }
    }
    best.map(|(a, b)| (points[a].omega, points[b].omega))
}

fn criteria(setup: &Setup, omega: f64) -> SolitonCriteria {
    let opts = &setup.config.solitons;
    let seed_contrast = (opts.seeds[0][1] - opts.seeds[1][1]).abs();
    // Outside the bistable window both seeds reach one uniform state and the
    // seed contrast stands in for the branch separation.
    let range = match (
        setup.uniform_branch(omega, opts.seeds[0]),
        setup.uniform_branch(omega, opts.seeds[1]),
    ) {
        (Ok(a), Ok(b)) if (a.rho22 - b.rho22).abs() > MERGED_BRANCHES => (a.rho22 - b.rho22).abs(),
        _ => seed_contrast,
    };
    SolitonCriteria {
        relative: opts.relative_threshold,
        dynamic_range: range,
        absolute_floor: opts.absolute_floor,
    }
}

fn evaluate(setup: &Setup, omega: f64) -> CliResult<ExistencePoint> {
    let cfg = setup.config;
    let opts = &cfg.solitons;
    let n = setup.n();
    let topology = setup.topology();
    let base = opts.seeds[opts.background];
    let patch = opts.seeds[1 - opts.background];
    let runs: Vec<(usize, usize)> = opts.bump_starts.iter().map(|&s| (s, opts.bump_width)).collect();
    let (rho11, rho22) = patched_populations(n, topology, base, patch, &runs);

    let model = setup.model(omega, None)?;
    let first = relax_to_steady(&model, &model.seeded_state(&rho11, &rho22)?, &cfg.integrator)?;
    let mut point = ExistencePoint {
        omega,
        converged: first.converged(),
        persistent: false,
        report: None,
        state: None,
        failure: None,
    };
    if !first.converged() {
        point.state = Some(first);
        return Ok(point);
    }
    let margin = match topology {
        Topology::Ring => 0,
        Topology::Chain => opts.edge_margin.unwrap_or(CHAIN_EDGE_MARGIN),
    };
    let criteria = criteria(setup, omega);
    let before = detect_solitons(&first, topology, margin, &criteria)?;

    let pushed = integrate(&model, &first.state, 0.0, &[opts.persist_time], &cfg.integrator)?;
    let pushed = pushed.states.last().expect("one sample");
    let second = relax_to_steady(&model, pushed, &cfg.integrator)?;
    point.converged = second.converged();
    if second.converged() {
        let after = detect_solitons(&second, topology, margin, &criteria)?;
        point.persistent = same_structure(&before, &after, n, topology);
        point.report = Some(after);
    } else {
        point.report = Some(before);
    }
    point.state = Some(second);
    Ok(point)
}

fn same_structure(a: &SolitonReport, b: &SolitonReport, n: usize, topology: Topology) -> bool {
    a.solitons.len() == b.solitons.len()
        && a.solitons.iter().zip(&b.solitons).all(|(x, y)| {
            let d = (x.center - y.center).abs();
            let d = match topology {
                Topology::Ring => d.min(n as f64 - d),
                Topology::Chain => d,
            };
            d <= PERSIST_SHIFT && x.peak_deviation.signum() == y.peak_deviation.signum()
        })
}
