use std::io::Write;

use jagg_core::analysis::{
    average_histograms, cluster_histogram, coherence_length, coherent_mask, write_coherence_csv,
    write_coherence_summary_csv, ClusterHistogram, CoherenceLength, CoherenceResult,
};
use jagg_core::disorder::{make_ensemble, write_realizations_csv, DisorderRealization};
use jagg_core::dynamics::{relax_to_steady, UniformState};
use serde_json::json;

use super::{ExperimentResult, Setup};
use crate::error::CliResult;
use crate::output::Output;
use crate::pool::par_map;

struct Realization {
    histogram: ClusterHistogram,
    converged: bool,
}

pub fn run(setup: &Setup, out: &mut Output, progress: bool) -> CliResult<ExperimentResult> {
    let cfg = setup.config;
    let n = setup.n();
    let omegas = cfg.omegas();
    let sigmas = cfg.sigmas();

    let uniform: Vec<UniformState> = omegas
        .iter()
        .map(|&om| setup.uniform_branch(om, cfg.coherence.initial_seed))
        .collect::<CliResult<_>>()?;
    // The same realization index draws the same normalized offsets at every
    // σ and Ω.
    let ensembles: Vec<Vec<DisorderRealization>> = sigmas
        .iter()
        .map(|&s| make_ensemble(&cfg.disorder.spec(s), cfg.disorder.master_seed, n, setup.tables.delta_l))
        .collect::<Result<_, _>>()?;
    let count = cfg.disorder.realization_count;

    let items: Vec<(usize, usize, usize)> = (0..omegas.len())
        .flat_map(|o| (0..sigmas.len()).flat_map(move |s| (0..count).map(move |r| (o, s, r))))
        .collect();
    let outcomes = par_map("coherence", &items, progress, |&(o, s, r)| -> CliResult<Realization> {
        let omega = omegas[o];
        let model = setup.model(omega, Some(&ensembles[s][r].offsets))?;
        let steady = relax_to_steady(&model, &uniform[o].expand(n), &cfg.integrator)?;
        let reference = cfg.coherence.reference(uniform[o].r.arg());
        let mask = coherent_mask(&steady.state, reference, model.drive().omega);
        Ok(Realization {
            histogram: cluster_histogram(&mask, setup.topology()),
            converged: steady.converged(),
        })
    });
    let mut results = Vec::new();
    let mut averaged = Vec::new();
    let mut unconverged = 0;
    let mut failures = Vec::new();
    let groups = (0..omegas.len()).flat_map(|o| (0..sigmas.len()).map(move |s| (o, s)));
    for (chunk, (o, s)) in outcomes.chunks(count).zip(groups) {
        let mut histograms = Vec::new();
        for (r, outcome) in chunk.iter().enumerate() {
            match outcome {
                Ok(x) => {
                    unconverged += usize::from(!x.converged);
                    histograms.push(x.histogram.clone());
                }
                Err(e) => failures.push(json!({
                    "omega": omegas[o], "sigma": sigmas[s], "realization": r, "error": e.to_string(),
                })),
            }
        }
        if histograms.is_empty() {
            averaged.push(ClusterHistogram::default());
            results.push(CoherenceResult {
                sigma: sigmas[s],
                omega: omegas[o],
                l_c: CoherenceLength::Undefined,
                per_realization: Vec::new(),
                per_realization_mean: None,
            });
        } else {
            averaged.push(average_histograms(&histograms)?);
            results.push(coherence_length(&histograms, sigmas[s], omegas[o])?);
        }
    }

    out.write("coherence.csv", |w| write_coherence_csv(w, &results))?;
    out.write("coherence_summary.csv", |w| write_coherence_summary_csv(w, &results))?;
    out.write("coherence_eq9.csv", |w| {
        writeln!(w, "sigma,omega,L_c")?;
        for r in &results {
            match r.l_c.value() {
                Some(v) => writeln!(w, "{:.16e},{:.16e},{v:.16e}", r.sigma, r.omega)?,
                None => writeln!(w, "{:.16e},{:.16e},undefined", r.sigma, r.omega)?,
            }
        }
        Ok(())
    })?;
    out.write("clusters.csv", |w| {
        writeln!(w, "sigma,omega,size,count")?;
        for (r, h) in results.iter().zip(&averaged) {
            for (size, c) in &h.counts {
                writeln!(w, "{:.16e},{:.16e},{size},{c:.16e}", r.sigma, r.omega)?;
            }
        }
        Ok(())
    })?;
    for (i, e) in ensembles.iter().enumerate() {
        out.write(&format!("realizations/sigma_{i:03}.csv"), |w| write_realizations_csv(w, e))?;
    }

    let per_omega: Vec<_> = omegas
        .iter()
        .enumerate()
        .map(|(o, &omega)| {
            let rows = &results[o * sigmas.len()..(o + 1) * sigmas.len()];
            let pooled: Vec<(f64, Option<f64>)> = rows.iter().map(|r| (r.sigma, r.l_c.value())).collect();
            let mean: Vec<(f64, Option<f64>)> = rows
                .iter()
                .map(|r| (r.sigma, r.per_realization_mean.map(|m| m.0)))
                .collect();
            json!({
                "omega": omega,
                "uniform_state": { "rho11": uniform[o].rho11, "rho22": uniform[o].rho22, "arg_r": uniform[o].r.arg() },
                "sigma_half_mean": half_coherence_sigma(&mean, n),
                "sigma_half_pooled": half_coherence_sigma(&pooled, n),
                "increases_mean": increases(&mean),
                "increases_pooled": increases(&pooled),
                "l_c_mean": mean,
                "l_c_pooled": pooled,
            })
        })
        .collect();
    let summary = json!({
        "sigma_unit": cfg.disorder.sigma_unit,
        "realizations": count,
        "unconverged_realizations": unconverged,
        "failed_realizations": failures,
        "per_omega": per_omega,
        "results": results_json(&results),
    });
    Ok(ExperimentResult {
        constants: setup.constants(),
        summary,
    })
}

fn results_json(results: &[CoherenceResult]) -> serde_json::Value {
    serde_json::to_value(results).expect("plain data")
}

/// First σ at which `L_c` falls below `N/2`, linearly interpolated between
/// grid points. Undefined lengths count as zero.
pub fn half_coherence_sigma(curve: &[(f64, Option<f64>)], n: usize) -> Option<f64> {
    let half = n as f64 / 2.0;
    let value = |p: &(f64, Option<f64>)| p.1.unwrap_or(0.0);
    if value(curve.first()?) < half {
        return Some(curve[0].0);
    }
    curve.windows(2).find(|w| value(&w[1]) < half).map(|w| {
        let (a, b) = (value(&w[0]), value(&w[1]));
        w[0].0 + (a - half) / (a - b) * (w[1].0 - w[0].0)
    })
}

/// Consecutive grid steps along which `L_c` grows with σ.
fn increases(curve: &[(f64, Option<f64>)]) -> usize {
    curve
        .windows(2)
        .filter(|w| w[1].1.unwrap_or(0.0) > w[0].1.unwrap_or(0.0))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_point_interpolates() {
        let c = [(0.0, Some(100.0)), (0.1, Some(80.0)), (0.2, Some(40.0))];
        let s = half_coherence_sigma(&c, 100).unwrap();
        assert!((s - 0.175).abs() < 1e-12);
        assert_eq!(half_coherence_sigma(&c[..2], 100), None);
        assert_eq!(half_coherence_sigma(&[(0.0, None)], 10), Some(0.0));
    }

    #[test]
    fn increases_counts_rises() {
        assert_eq!(increases(&[(0.0, Some(5.0)), (0.1, Some(6.0)), (0.2, None)]), 1);
    }
}
