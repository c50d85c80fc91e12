//! Oscillator strengths of the exciton band of an ideal linear chain.
//!
//! The closed form is
//!
//! ```text
//! f_k = f0 · (1 − (−1)^k)/(N + 1) · cot²(πk / (2(N + 1))),   k = 1..N
//! ```
//!
//! and is checked against a direct diagonalization of the nearest-neighbor
//! exciton Hamiltonian.

pub mod fixtures;
mod tridiagonal;

pub use tridiagonal::symmetric_tridiagonal_eigen;

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcitonSpectrum {
    pub n: usize,
    pub f0: f64,
    /// `f[k − 1]` is the strength of band state `k`.
    pub f: Vec<f64>,
}

impl ExcitonSpectrum {
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.f.get(i)).copied()
    }

    pub fn total(&self) -> f64 {
        self.f.iter().sum()
    }
}

pub fn oscillator_strengths(f0: f64, n: usize) -> Result<ExcitonSpectrum> {
    if n == 0 {
        return Err(invalid("n", "chain must contain at least one molecule"));
    }
    if !(f0 > 0.0 && f0.is_finite()) {
        return Err(invalid("f0", format!("{f0} must be positive")));
    }
    let np1 = (n + 1) as f64;
    let f = (1..=n)
        .map(|k| {
            if k % 2 == 0 {
                0.0
            } else {
                let x = std::f64::consts::PI * k as f64 / (2.0 * np1);
                let cot = x.cos() / x.sin();
                f0 * 2.0 / np1 * cot * cot
            }
        })
        .collect();
    Ok(ExcitonSpectrum { n, f0, f })
}

/// Strengths from diagonalizing the `N×N` matrix with zero diagonal and
/// `coupling_sign` on both off-diagonals. States are ordered from the
/// nodeless band edge: ascending energy for negative coupling, descending
/// for positive.
pub fn tridiagonal_oracle(n: usize, coupling_sign: f64, f0: f64) -> Result<ExcitonSpectrum> {
    if n == 0 {
        return Err(invalid("n", "chain must contain at least one molecule"));
    }
    if coupling_sign != 1.0 && coupling_sign != -1.0 {
        return Err(invalid("coupling_sign", "must be +1 or -1"));
    }
    let diagonal = vec![0.0; n];
    let off = vec![coupling_sign; n.saturating_sub(1)];
    let (values, vectors) = symmetric_tridiagonal_eigen(&diagonal, &off)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    if coupling_sign > 0.0 {
        order.reverse();
    }
    let f = order
        .iter()
        .map(|&j| {
            let s: f64 = (0..n).map(|i| vectors[i * n + j]).sum();
            f0 * s * s
        })
        .collect();
    Ok(ExcitonSpectrum { n, f0, f })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub k: usize,
    pub reference: f64,
    pub computed: f64,
    pub absolute: f64,
    /// `NaN` when the reference is zero.
    pub relative: f64,
}

/// Residuals of `spectrum` against `(k, f_k)` reference rows.
pub fn compare_to_reference(
    spectrum: &ExcitonSpectrum,
    reference: &[(usize, f64)],
) -> Result<Vec<Residual>> {
    reference
        .iter()
        .map(|&(k, reference)| {
            let computed = spectrum.get(k).ok_or(Error::DimensionMismatch {
                what: "reference row index",
                expected: spectrum.n,
                got: k,
            })?;
            let absolute = (computed - reference).abs();
            Ok(Residual {
                k,
                reference,
                computed,
                absolute,
                relative: if reference == 0.0 {
                    f64::NAN
                } else {
                    absolute / reference.abs()
                },
            })
        })
        .collect()
}

/// `k, f_analytic, f_oracle, f_reference`; the reference column is empty
/// for rows without a reference value.
pub fn write_spectrum_csv<W: Write>(
    mut out: W,
    analytic: &ExcitonSpectrum,
    oracle: &ExcitonSpectrum,
    reference: &[(usize, f64)],
) -> io::Result<()> {
    writeln!(out, "k,f_analytic,f_oracle,f_reference")?;
    for k in 1..=analytic.n {
        let r = reference
            .iter()
            .find(|(rk, _)| *rk == k)
            .map(|(_, v)| format!("{v:.16e}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{k},{:.16e},{:.16e},{r}",
            analytic.f[k - 1],
            oracle.get(k).unwrap_or(f64::NAN)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn monomer_recovered() {
        let s = oscillator_strengths(1.0, 1).unwrap();
        assert_relative_eq!(s.f[0], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(oscillator_strengths(1.0, 0).is_err());
        assert!(oscillator_strengths(0.0, 5).is_err());
        assert!(tridiagonal_oracle(5, 0.5, 1.0).is_err());
    }

    #[test]
    fn table_column_reproduced() {
        let s = oscillator_strengths(fixtures::F0_MONOMER, 50).unwrap();
        for row in fixtures::PIC_F_50 {
            assert!(
                (s.get(row.k).unwrap() - row.f_closed_form).abs() < 0.005,
                "k = {}",
                row.k
            );
        }
    }

    #[test]
    fn dimer_split() {
        let s = tridiagonal_oracle(2, -1.0, 1.0).unwrap();
        assert_relative_eq!(s.f[0], 2.0, max_relative = 1e-14);
        assert!(s.f[1].abs() < 1e-14);
        let a = oscillator_strengths(1.0, 2).unwrap();
        assert_relative_eq!(a.f[0], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn positive_coupling_orders_from_top() {
        let neg = tridiagonal_oracle(9, -1.0, 1.0).unwrap();
        let pos = tridiagonal_oracle(9, 1.0, 1.0).unwrap();
        for (a, b) in neg.f.iter().zip(&pos.f) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_agrees_for_n_up_to_60() {
        for n in 1..=60 {
            let a = oscillator_strengths(1.37, n).unwrap();
            let o = tridiagonal_oracle(n, -1.0, 1.37).unwrap();
            for (k, (x, y)) in a.f.iter().zip(&o.f).enumerate() {
                let tol = 1e-8 * x.abs().max(y.abs()) + 1e-14 * n as f64;
                assert!((x - y).abs() <= tol, "N = {n}, k = {}: {x} vs {y}", k + 1);
            }
        }
    }

    #[test]
    fn large_n_limit_of_bright_state() {
        let s = oscillator_strengths(1.0, 200).unwrap();
        let ratio = s.f[0] / 200.0;
        let limit = 8.0 / std::f64::consts::PI.powi(2);
        assert!((ratio / limit - 1.0).abs() < 0.01);
    }

    #[test]
    fn compare_reports_residuals() {
        let s = oscillator_strengths(1.37, 50).unwrap();
        let own: Vec<(usize, f64)> = (1..=50).map(|k| (k, s.get(k).unwrap())).collect();
        assert!(compare_to_reference(&s, &own)
            .unwrap()
            .iter()
            .all(|r| r.absolute == 0.0));

        let qc: Vec<(usize, f64)> = fixtures::PIC_F_50.iter().map(|r| (r.k, r.f_quantum)).collect();
        let res = compare_to_reference(&s, &qc).unwrap();
        assert!((res[0].relative - 0.027).abs() < 0.003);
        assert!(res[1].relative.is_finite());

        assert!(compare_to_reference(&s, &[(51, 1.0)]).is_err());
        assert!(compare_to_reference(&s, &[(0, 1.0)]).is_err());
    }

    #[test]
    fn csv_rows() {
        let a = oscillator_strengths(1.37, 3).unwrap();
        let o = tridiagonal_oracle(3, -1.0, 1.37).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &a, &o, &[(1, 3.6521)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        let last: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(last, 3.6521);
        assert!(lines[2].ends_with(','));
    }

    proptest! {
        #[test]
        fn sum_rule_and_extinction(n in 1usize..=200, f0 in 0.01f64..10.0) {
            let s = oscillator_strengths(f0, n).unwrap();
            prop_assert!(((s.total() - n as f64 * f0) / (n as f64 * f0)).abs() <= 1e-9);
            for (i, f) in s.f.iter().enumerate() {
                prop_assert!(*f >= 0.0);
                if (i + 1) % 2 == 0 {
                    prop_assert_eq!(*f, 0.0);
                }
            }
            let odd: Vec<f64> = s.f.iter().step_by(2).copied().collect();
            prop_assert!(odd.windows(2).all(|w| w[0] > w[1]));
        }

        #[test]
        fn oracle_sum_rule(n in 1usize..=80) {
            let o = tridiagonal_oracle(n, -1.0, 1.0).unwrap();
            prop_assert!((o.total() - n as f64).abs() <= 1e-9 * n as f64);
        }
    }
}
