use std::io::Write;

use jagg_core::analysis::{inter_front_distance, track_fronts};
use jagg_core::dynamics::integrate;
use serde_json::json;

use super::{patched_populations, ExperimentResult, Setup};
use crate::error::CliResult;
use crate::output::Output;

/// Mean front speed below which the domain counts as pinned.
const PINNED_SPEED: f64 = 1e-3;

pub fn run(setup: &Setup, out: &mut Output) -> CliResult<ExperimentResult> {
    let cfg = setup.config;
    let opts = &cfg.waves;
    let n = setup.n();
    let omega = cfg.drive.omega;
    let high_count = opts.high_count.unwrap_or(n / 2);
    let (rho11, rho22) =
        patched_populations(n, setup.topology(), opts.seeds[0], opts.seeds[1], &[(0, high_count)]);
    let model = setup.model(omega, None)?;
    let start = model.seeded_state(&rho11, &rho22)?;

    let samples = (opts.t_end / opts.sample_interval).floor() as usize;
    let times: Vec<f64> = (0..=samples).map(|i| i as f64 * opts.sample_interval).collect();
    let trajectory = integrate(&model, &start, 0.0, &times, &cfg.integrator)?;

    let low = setup.uniform_branch(omega, opts.seeds[0])?;
    let high = setup.uniform_branch(omega, opts.seeds[1])?;
    let track = track_fronts(&trajectory.times, &trajectory.states, (low.rho11, high.rho11), setup.topology());
    let distance = inter_front_distance(&track, n, setup.topology());

    out.write("profiles.csv", |w| {
        writeln!(w, "t,k,rho11,rho22")?;
        for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
            for k in 0..n {
                writeln!(w, "{t:.16e},{k},{:.16e},{:.16e}", s.rho11[k], s.rho22[k])?;
            }
        }
        Ok(())
    })?;
    out.write("fronts.csv", |w| {
        writeln!(w, "t,index,position,rising,velocity")?;
        for ((t, fronts), vel) in track.times.iter().zip(&track.positions).zip(&track.velocities) {
            for (i, (f, v)) in fronts.iter().zip(vel).enumerate() {
                writeln!(w, "{t:.16e},{i},{:.16e},{},{v:.16e}", f.position, f.rising)?;
            }
        }
        Ok(())
    })?;
    out.write("distance.csv", |w| {
        writeln!(w, "t,distance")?;
        for (t, d) in track.times.iter().zip(&distance) {
            match d {
                Some(d) => writeln!(w, "{t:.16e},{d:.16e}")?,
                None => writeln!(w, "{t:.16e},")?,
            }
        }
        Ok(())
    })?;

    let defined: Vec<(f64, f64)> = track
        .times
        .iter()
        .zip(&distance)
        .filter_map(|(t, d)| d.map(|d| (*t, d)))
        .collect();
    let final_speed = track
        .velocities
        .last()
        .map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    let pinned_at = pinning_time(&defined, opts.sample_interval);
    let summary = json!({
        "omega": omega,
        "high_count": high_count,
        "branch_rho11": [low.rho11, high.rho11],
        "initial_distance": defined.first().map(|p| p.1),
        "final_distance": defined.last().map(|p| p.1),
        "fronts_at_end": track.positions.last().map_or(0, |f| f.len()),
        "final_max_speed": final_speed,
        "pinned_at": pinned_at,
        "max_excitation": trajectory.diagnostics.max_excitation,
        "max_trace_error": trajectory.diagnostics.max_trace_error,
    });
    Ok(ExperimentResult {
        constants: setup.constants(),
        summary,
    })
}

/// Earliest sample after which the distance never changes faster than
/// [`PINNED_SPEED`].
fn pinning_time(distance: &[(f64, f64)], dt: f64) -> Option<f64> {
    distance.last()?;
    let moving = distance
        .windows(2)
        .rposition(|w| (w[1].1 - w[0].1).abs() > PINNED_SPEED * dt);
    match moving {
        None => distance.first().map(|p| p.0),
        Some(i) if i + 1 < distance.len() - 1 => Some(distance[i + 1].0),
        Some(_) => None,
    }
}
