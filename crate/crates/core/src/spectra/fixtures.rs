//! Reference ZINDO/S-CI excitation data for (PIC:F)_N aggregates, shipped
//! for comparison only. None of these numbers is recomputed here.

/// Monomer oscillator strength used with the closed form (rounded from the
/// `N = 1` entry of [`PIC_F_SMALL`]).
pub const F0_MONOMER: f64 = 1.37;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRow {
    pub k: usize,
    pub energy_ev: f64,
    /// Quantum-chemical oscillator strength.
    pub f_quantum: f64,
    /// Closed-form strength with `f0 = 1.37`, two decimals.
    pub f_closed_form: f64,
}

/// Ten lowest excited singlet states of (PIC:F)_50.
pub const PIC_F_50: [BandRow; 10] = [
    BandRow { k: 1, energy_ev: 2.7588, f_quantum: 55.1045, f_closed_form: 56.60 },
    BandRow { k: 2, energy_ev: 2.7618, f_quantum: 0.0010, f_closed_form: 0.0 },
    BandRow { k: 3, energy_ev: 2.7659, f_quantum: 5.0993, f_closed_form: 6.26 },
    BandRow { k: 4, energy_ev: 2.7709, f_quantum: 0.0000, f_closed_form: 0.0 },
    BandRow { k: 5, energy_ev: 2.7765, f_quantum: 1.7007, f_closed_form: 2.23 },
    BandRow { k: 6, energy_ev: 2.7826, f_quantum: 0.0000, f_closed_form: 0.0 },
    BandRow { k: 7, energy_ev: 2.7890, f_quantum: 0.8164, f_closed_form: 1.12 },
    BandRow { k: 8, energy_ev: 2.7957, f_quantum: 0.0000, f_closed_form: 0.0 },
    BandRow { k: 9, energy_ev: 2.8026, f_quantum: 0.4656, f_closed_form: 0.66 },
    BandRow { k: 10, energy_ev: 2.8095, f_quantum: 0.0000, f_closed_form: 0.0 },
];

/// `(energy in cm⁻¹, oscillator strength)` of the states S_1..S_N for
/// `N = 1..=8`; `PIC_F_SMALL[N − 1][j]` is state `S_{j+1}`.
pub const PIC_F_SMALL: [&[(f64, f64)]; 8] = [
    &[(20767.0, 1.3733)],
    &[(20950.0, 2.4080), (21965.0, 0.3347)],
    &[(21018.0, 3.6521), (21695.0, 0.3705), (22215.0, 0.0406)],
    &[(21145.0, 5.0232), (21705.0, 0.0004), (22122.0, 0.2730), (22333.0, 0.0009)],
    &[
        (21061.0, 6.1276),
        (21547.0, 0.0008),
        (21955.0, 0.4640),
        (22225.0, 0.0000),
        (22359.0, 0.0568),
    ],
    &[
        (21047.0, 7.2459),
        (21446.0, 0.0474),
        (21811.0, 0.5408),
        (22102.0, 0.0030),
        (22294.0, 0.1024),
        (22402.0, 0.0004),
    ],
    &[
        (21049.0, 8.5368),
        (21360.0, 0.0161),
        (21700.0, 0.5029),
        (21989.0, 0.0002),
        (22196.0, 0.1602),
        (22337.0, 0.0025),
        (22429.0, 0.0160),
    ],
    &[
        (21028.0, 9.6244),
        (21299.0, 0.0091),
        (21605.0, 0.6020),
        (21886.0, 0.0001),
        (22111.0, 0.2054),
        (22269.0, 0.0148),
        (22374.0, 0.0775),
        (22439.0, 0.0033),
    ],
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_aggregate_table_is_well_formed() {
        for (i, states) in PIC_F_SMALL.iter().enumerate() {
            assert_eq!(states.len(), i + 1);
            // Lowest state carries most of the strength, growing with N.
            let bright = states[0].1;
            assert!(states[1..].iter().all(|s| s.1 < bright));
        }
        let lowest: Vec<f64> = PIC_F_SMALL.iter().map(|s| s[0].1).collect();
        assert!(lowest.windows(2).all(|w| w[1] > w[0]));
        assert!((PIC_F_SMALL[0][0].1 - F0_MONOMER).abs() < 0.005);
    }
}
