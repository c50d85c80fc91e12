use jagg_core::analysis::cluster_histogram;
use jagg_core::coupling::{CouplingTables, GeometryParams, Topology};
use jagg_core::disorder::{make_ensemble, DisorderSpec, SigmaUnit};
use jagg_core::dynamics::{
    relax_to_steady, uniform_fixed_point, DetuningProfile, DriveParams, IntegratorConfig, Model,
    StateVector,
};
use jagg_core::spectra::{oscillator_strengths, tridiagonal_oracle};
use num_complex::Complex64;
use proptest::prelude::*;

fn model(n: usize, topology: Topology, omega: f64) -> Model {
    let tables = CouplingTables::build(&GeometryParams::standard(n, topology).unwrap()).unwrap();
    let delta0 = -10.0 - tables.delta_l;
    Model::new(
        &tables,
        DriveParams::standard(omega, delta0),
        DetuningProfile::uniform(n, delta0),
    )
    .unwrap()
}

fn state_from(values: &[(f64, f64, f64, f64)]) -> StateVector {
    let rho11: Vec<f64> = values.iter().map(|v| 0.5 + 0.5 * v.0).collect();
    let rho22: Vec<f64> = values.iter().zip(&rho11).map(|(v, r)| (1.0 - r) * v.1).collect();
    StateVector {
        rho33: rho11.iter().zip(&rho22).map(|(a, b)| 1.0 - a - b).collect(),
        r: values.iter().map(|v| Complex64::new(0.1 * v.2, 0.1 * v.3)).collect(),
        rho11,
        rho22,
    }
}

fn site_values(n: usize) -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((0.0..1.0, 0.0..1.0, -1.0..1.0, -1.0..1.0), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn population_derivatives_sum_to_zero(values in site_values(24), chain in any::<bool>()) {
        let topology = if chain { Topology::Chain } else { Topology::Ring };
        let d = model(24, topology, 0.95).rhs(&state_from(&values)).unwrap();
        for k in 0..24 {
            prop_assert!((d.rho11[k] + d.rho22[k] + d.rho33[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_dynamics_commute_with_rotation(values in site_values(20), shift in 1usize..20) {
        let m = model(20, Topology::Ring, 0.95);
        let s = state_from(&values);
        let lhs = m.rhs(&s.rotate(shift)).unwrap();
        let rhs = m.rhs(&s).unwrap().rotate(shift);
        let diff = lhs.to_flat().iter().zip(rhs.to_flat()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        prop_assert!(diff < 1e-10);
    }

    #[test]
    fn chain_dynamics_commute_with_reflection(values in site_values(18)) {
        let m = model(18, Topology::Chain, 0.95);
        let s = state_from(&values);
        let mut reflected = values.clone();
        reflected.reverse();
        let mut expected = m.rhs(&s).unwrap().to_flat();
        for block in expected.chunks_mut(18) {
            block.reverse();
        }
        let got = m.rhs(&state_from(&reflected)).unwrap().to_flat();
        let diff = got.iter().zip(&expected).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        prop_assert!(diff < 1e-10);
    }

    #[test]
    fn oscillator_strengths_obey_sum_rule(n in 1usize..400, f0 in 0.1f64..10.0) {
        let s = oscillator_strengths(f0, n).unwrap();
        prop_assert!((s.total() - n as f64 * f0).abs() <= 1e-9 * n as f64 * f0);
        for k in (2..=n).step_by(2) {
            prop_assert_eq!(s.get(k), Some(0.0));
        }
    }

    #[test]
    fn closed_form_matches_diagonalization(n in 1usize..60) {
        let a = oscillator_strengths(1.0, n).unwrap();
        let b = tridiagonal_oracle(n, -1.0, 1.0).unwrap();
        for (x, y) in a.f.iter().zip(&b.f) {
            prop_assert!((x - y).abs() <= 1e-8 * n as f64);
        }
    }

    #[test]
    fn ensembles_share_draws_across_sigma_and_size(
        seed in any::<u64>(),
        sigma in 0.01f64..0.5,
        count in 1usize..6,
    ) {
        let unit = DisorderSpec { sigma: 1.0, sigma_unit: SigmaUnit::GammaR, realization_count: count + 3 };
        let scaled = DisorderSpec { sigma, sigma_unit: SigmaUnit::GammaR, realization_count: count };
        let a = make_ensemble(&unit, seed, 32, -100.0).unwrap();
        let b = make_ensemble(&scaled, seed, 32, -100.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            for (u, v) in x.offsets.iter().zip(&y.offsets) {
                prop_assert!((sigma * u - v).abs() <= 1e-12 * u.abs().max(1.0));
            }
        }
    }

    #[test]
    fn cluster_sizes_account_for_every_coherent_molecule(
        mask in prop::collection::vec(any::<bool>(), 1..80),
        chain in any::<bool>(),
    ) {
        let topology = if chain { Topology::Chain } else { Topology::Ring };
        let h = cluster_histogram(&mask, topology);
        let coherent = mask.iter().filter(|&&m| m).count() as f64;
        prop_assert_eq!(h.coherent_molecules(), coherent);
    }
}

#[test]
fn uniform_fixed_point_is_steady_on_the_full_ring() {
    let n = 60;
    let m = model(n, Topology::Ring, 0.95);
    let tables = CouplingTables::build(&GeometryParams::standard(n, Topology::Ring).unwrap()).unwrap();
    for guess in [(0.99, 0.004), (0.9, 0.04)] {
        let u = uniform_fixed_point(m.drive(), &tables, guess).unwrap();
        let d = m.rhs(&u.expand(n)).unwrap();
        assert!(d.max_abs() < 1e-9, "residual {}", d.max_abs());
    }
}

#[test]
fn relaxation_reaches_the_uniform_fixed_point() {
    let n = 60;
    let m = model(n, Topology::Ring, 0.85);
    let tables = CouplingTables::build(&GeometryParams::standard(n, Topology::Ring).unwrap()).unwrap();
    let steady = relax_to_steady(&m, &m.seeded_uniform(0.99, 0.004), &IntegratorConfig::default()).unwrap();
    assert!(steady.converged());
    let u = uniform_fixed_point(m.drive(), &tables, (0.99, 0.004)).unwrap();
    for k in 0..n {
        assert!((steady.state.rho11[k] - u.rho11).abs() < 1e-7);
        assert!((steady.state.r[k] - u.r).norm() < 1e-7);
    }
}
