use serde::Serialize;

use crate::coupling::Topology;
use crate::dynamics::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Front {
    /// Fractional molecule index in `[0, N)`.
    pub position: f64,
    /// `ρ11` increases across the front in the direction of increasing index.
    pub rising: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontTrack {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<Front>>,
    /// Per front, in molecules per unit time; `NaN` when the front cannot be
    /// matched at a neighboring sample.
    pub velocities: Vec<Vec<f64>>,
}

/// Crossings of `ρ11` through `level`, located by linear interpolation.
pub fn front_positions(state: &StateVector, level: f64, topology: Topology) -> Vec<Front> {
    let rho = &state.rho11;
    let n = rho.len();
    let pairs = match topology {
        Topology::Ring if n > 1 => n,
        _ => n.saturating_sub(1),
    };
    let mut fronts = Vec::new();
    for k in 0..pairs {
        let (a, b) = (rho[k], rho[(k + 1) % n]);
        if (a >= level) != (b >= level) {
            let frac = (level - a) / (b - a);
            fronts.push(Front {
                position: (k as f64 + frac) % n as f64,
                rising: b > a,
            });
        }
    }
    fronts.sort_by(|x, y| x.position.total_cmp(&y.position));
    fronts
}

fn displacement(from: f64, to: f64, n: usize, topology: Topology) -> f64 {
    let d = to - from;
    match topology {
        Topology::Chain => d,
        Topology::Ring => {
            let n = n as f64;
            let d = d.rem_euclid(n);
            if d > n / 2.0 {
                d - n
            } else {
                d
            }
        }
    }
}

fn nearest(front: &Front, among: &[Front], n: usize, topology: Topology) -> Option<f64> {
    among
        .iter()
        .filter(|f| f.rising == front.rising)
        .map(|f| displacement(front.position, f.position, n, topology))
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
}

/// Fronts are crossings of the midpoint of `branch_levels`. Velocities are
/// central differences of the displacement to the nearest same-kind front
/// at the neighboring samples (one-sided at the ends).
pub fn track_fronts(
    times: &[f64],
    states: &[StateVector],
    branch_levels: (f64, f64),
    topology: Topology,
) -> FrontTrack {
    let level = 0.5 * (branch_levels.0 + branch_levels.1);
    let positions: Vec<Vec<Front>> = states
        .iter()
        .map(|s| front_positions(s, level, topology))
        .collect();
    let n = states.first().map_or(0, |s| s.len());
    let velocities = (0..positions.len())
        .map(|i| {
            let prev = i.checked_sub(1);
            let next = (i + 1 < positions.len()).then_some(i + 1);
            positions[i]
                .iter()
                .map(|f| {
                    let back = prev.and_then(|p| nearest(f, &positions[p], n, topology));
                    let fwd = next.and_then(|q| nearest(f, &positions[q], n, topology));
                    match (back, fwd) {
                        (Some(b), Some(a)) => (a - b) / (times[i + 1] - times[i - 1]),
                        (None, Some(a)) => a / (times[i + 1] - times[i]),
                        (Some(b), None) => -b / (times[i] - times[i - 1]),
                        (None, None) => f64::NAN,
                    }
                })
                .collect()
        })
        .collect();
    FrontTrack {
        times: times.to_vec(),
        positions,
        velocities,
    }
}

/// Distance between the two fronts of each sample (the shorter arc on a
/// ring); `None` unless exactly two fronts are present.
pub fn inter_front_distance(track: &FrontTrack, n: usize, topology: Topology) -> Vec<Option<f64>> {
    track
        .positions
        .iter()
        .map(|f| match f.as_slice() {
            [a, b] => Some(displacement(a.position, b.position, n, topology).abs()),
            _ => None,
        })
        .collect()
}
