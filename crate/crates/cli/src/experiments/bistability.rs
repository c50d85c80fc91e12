use std::sync::Mutex;

use jagg_core::analysis::{scan_bistability, write_scan_csv, ScanOptions, SeedOutcome, SteadyScanRunner};
use jagg_core::dynamics::StateVector;
use serde_json::json;

use super::{ExperimentResult, Setup};
use crate::error::CliResult;
use crate::output::Output;

pub fn run(setup: &Setup, out: &mut Output, progress: bool) -> CliResult<ExperimentResult> {
    let cfg = setup.config;
    let opts = &cfg.bistability;
    let runner = SteadyScanRunner {
        tables: setup.tables.clone(),
        template: setup.drive(0.0),
        convention: cfg.drive.detuning_convention,
        detuning: cfg.drive.detuning_value().expect("validated"),
        seeds: [(opts.seeds[0][0], opts.seeds[0][1]), (opts.seeds[1][0], opts.seeds[1][1])],
        config: cfg.integrator,
    };
    let n = setup.n();
    let failures = Mutex::new(Vec::new());
    // A failed point is reported as unconverged so the sweep continues.
    let isolated = |omega: f64| {
        let r = runner.run(omega);
        if progress {
            eprintln!("[bistability] omega = {omega}");
        }
        Ok(r.unwrap_or_else(|e| {
            failures.lock().expect("not poisoned").push((omega, e.to_string()));
            let dead = || SeedOutcome {
                state: StateVector::ground(n),
                converged: false,
            };
            [dead(), dead()]
        }))
    };
    let options = ScanOptions {
        merge_tol: opts.merge_tol,
        edge_resolution: (opts.edge_resolution > 0.0).then_some(opts.edge_resolution),
    };
    let scan = scan_bistability(setup.topology(), n, &cfg.omegas(), options, isolated)?;
    out.write("scan.csv", |w| write_scan_csv(w, &scan))?;

    let mut failures = failures.into_inner().expect("not poisoned");
    failures.sort_by(|a, b| a.0.total_cmp(&b.0));
    let summary = json!({
        "window": scan.window,
        "points": scan.points,
        "monotonicity_violations": scan.monotonicity_violations,
        "failed_points": failures,
    });
    Ok(ExperimentResult {
        constants: setup.constants(),
        summary,
    })
}
