use super::StateVector;

/// Weak-excitation check: `1 − ρ11` should stay small for every molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub max_excitation: f64,
    pub threshold: f64,
    pub offending: Vec<usize>,
}

impl ValidityReport {
    pub fn flagged(&self) -> bool {
        !self.offending.is_empty()
    }
}

pub fn validity_check(state: &StateVector, threshold: f64) -> ValidityReport {
    let excitation = state.rho11.iter().map(|r| 1.0 - r);
    ValidityReport {
        max_excitation: excitation.clone().fold(0.0, f64::max),
        threshold,
        offending: excitation
            .enumerate()
            .filter(|&(_, e)| e > threshold)
            .map(|(k, _)| k)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn ground_state_is_valid() {
        let r = validity_check(&StateVector::ground(10), 0.2);
        assert_eq!(r.max_excitation, 0.0);
        assert!(!r.flagged());
    }

    #[test]
    fn high_branch_population_is_weak_excitation() {
        let s = StateVector::uniform(10, 0.91, 0.0274, Complex64::new(0.0, 0.0));
        let r = validity_check(&s, 0.2);
        assert!((r.max_excitation - 0.09).abs() < 1e-12);
        assert!(!r.flagged());
    }

    #[test]
    fn strong_excitation_is_flagged() {
        let mut s = StateVector::ground(10);
        s.rho11[3] = 0.5;
        s.rho22[3] = 0.5;
        let r = validity_check(&s, 0.2);
        assert_eq!(r.offending, vec![3]);
        assert_eq!(r.max_excitation, 0.5);
    }
}
