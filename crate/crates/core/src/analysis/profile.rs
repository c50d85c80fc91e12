use serde::Serialize;

use super::median;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeZone {
    /// Median of the central fifth of the profile.
    pub plateau: f64,
    /// Molecules from each end before the profile stays within tolerance
    /// of the plateau all the way to the center.
    pub left: usize,
    pub right: usize,
}

/// Extent of the edge-affected regions of a chain profile, using
/// `|x_k − plateau| ≤ relative_tolerance · |plateau|`.
pub fn edge_zone(profile: &[f64], relative_tolerance: f64) -> Option<EdgeZone> {
    let n = profile.len();
    if n < 5 {
        return None;
    }
    let (a, b) = (2 * n / 5, 3 * n / 5);
    let plateau = median(&mut profile[a..b.max(a + 1)].to_vec());
    let tol = relative_tolerance * plateau.abs();
    let within = |x: f64| (x - plateau).abs() <= tol;
    let mid = n / 2;
    let left = (0..=mid)
        .rev()
        .find(|&k| !within(profile[k]))
        .map_or(0, |k| k + 1);
    let right = (mid..n).find(|&k| !within(profile[k])).map_or(0, |k| n - k);
    Some(EdgeZone {
        plateau,
        left,
        right,
    })
}
