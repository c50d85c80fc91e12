//! Observables extracted from trajectories and steady states.

mod bistability;
mod coherence;
mod fronts;
mod profile;
mod solitons;

pub use bistability::{
    scan_bistability, write_scan_csv, BranchRecord, HysteresisScan, ScanOptions, ScanPoint,
    SeedOutcome, SteadyScanRunner,
};
pub use coherence::{
    average_histograms, cluster_histogram, coherence_length, coherent_mask, write_coherence_csv,
    write_coherence_summary_csv, ClusterHistogram, CoherenceLength, CoherenceResult,
    PhaseReference,
};
pub use fronts::{front_positions, inter_front_distance, track_fronts, Front, FrontTrack};
pub use profile::{edge_zone, EdgeZone};
pub use solitons::{detect_solitons, write_solitons_csv, Soliton, SolitonCriteria, SolitonReport};

/// Principal value of an angle in `(−π, π]`.
pub(crate) fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
