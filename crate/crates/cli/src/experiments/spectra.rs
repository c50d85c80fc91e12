use jagg_core::spectra::{
    compare_to_reference, fixtures, oscillator_strengths, tridiagonal_oracle, write_spectrum_csv,
};
use serde_json::json;

use super::ExperimentResult;
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::Output;

const REFERENCE_N: usize = 50;

pub fn run(config: &ExperimentConfig, out: &mut Output) -> CliResult<ExperimentResult> {
    let opts = &config.spectra;
    let mut tables = Vec::new();
    for &n in &opts.n_values {
        let analytic = oscillator_strengths(opts.f0, n)?;
        let oracle = tridiagonal_oracle(n, -1.0, opts.f0)?;
        let quantum: Vec<(usize, f64)> = if opts.include_reference && n == REFERENCE_N {
            fixtures::PIC_F_50.iter().map(|r| (r.k, r.f_quantum)).collect()
        } else {
            Vec::new()
        };
        out.write(&format!("spectrum_N{n}.csv"), |w| {
            write_spectrum_csv(w, &analytic, &oracle, &quantum)
        })?;

        let total = n as f64 * opts.f0;
        let oracle_dev = analytic
            .f
            .iter()
            .zip(&oracle.f)
            .map(|(a, o)| (a - o).abs() / a.abs().max(o.abs()).max(f64::MIN_POSITIVE))
            .filter(|d| d.is_finite())
            .fold(0.0f64, f64::max);
        let mut entry = json!({
            "n": n,
            "f0": opts.f0,
            "sum": analytic.total(),
            "sum_rule_relative_error": (analytic.total() - total).abs() / total,
            "oracle_max_relative_difference": oracle_dev,
            "bright_fraction_over_n": analytic.f[0] / total,
        });
        if n == REFERENCE_N {
            let closed: Vec<(usize, f64)> =
                fixtures::PIC_F_50.iter().map(|r| (r.k, r.f_closed_form)).collect();
            entry["closed_form_column"] = json!(compare_to_reference(&analytic, &closed)?);
            if !quantum.is_empty() {
                entry["quantum_chemical"] = json!(compare_to_reference(&analytic, &quantum)?);
            }
        }
        tables.push(entry);
    }
    Ok(ExperimentResult {
        constants: json!({}),
        summary: json!({ "spectra": tables }),
    })
}
