use jagg_core::analysis::edge_zone;
use jagg_core::coupling::Topology;
use jagg_core::dynamics::{relax_to_steady, validity_check, write_state_csv, SteadyState};
use serde_json::{json, Value};

use super::{error_value, state_extent, ExperimentResult, Setup};
use crate::config::Seed;
use crate::error::CliResult;
use crate::output::Output;
use crate::pool::par_map;

pub fn run(setup: &Setup, out: &mut Output, progress: bool) -> CliResult<ExperimentResult> {
    let cfg = setup.config;
    let omegas = cfg.omegas();
    let items: Vec<(usize, f64, usize, Seed)> = omegas
        .iter()
        .enumerate()
        .flat_map(|(i, &om)| {
            cfg.steady
                .seeds
                .iter()
                .enumerate()
                .map(move |(j, s)| (i, om, j, *s))
        })
        .collect();
    let results = par_map("steady", &items, progress, |&(_, omega, _, seed)| -> CliResult<SteadyState> {
        let model = setup.model(omega, None)?;
        Ok(relax_to_steady(&model, &model.seeded_uniform(seed[0], seed[1]), &cfg.integrator)?)
    });

    let mut runs = Vec::new();
    for (&(i, omega, j, seed), result) in items.iter().zip(results) {
        let mut entry = json!({ "omega": omega, "seed": seed });
        match result {
            Ok(s) => {
                let name = format!("state_o{i:03}_s{j}.csv");
                out.write(&name, |w| write_state_csv(w, &s.state))?;
                let validity = validity_check(&s.state, cfg.integrator.validity_threshold);
                entry["file"] = json!(name);
                entry["converged"] = json!(s.converged());
                entry["t_elapsed"] = json!(s.t_elapsed);
                entry["residual"] = json!(s.residual);
                entry["max_trace_error"] = json!(s.diagnostics.max_trace_error);
                entry["min_population"] = json!(s.diagnostics.min_population);
                entry["max_excitation"] = json!(validity.max_excitation);
                entry["validity_flagged"] = json!(validity.flagged());
                entry["extent"] = state_extent(&s.state);
                if setup.topology() == Topology::Chain {
                    entry["edge_zone"] = json!(edge_zone(&s.state.rho11, cfg.steady.edge_tolerance));
                }
            }
            Err(e) => entry["failure"] = error_value(&e),
        }
        runs.push(entry);
    }
    Ok(ExperimentResult {
        constants: setup.constants(),
        summary: json!({ "runs": Value::Array(runs) }),
    })
}
