use num_complex::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

use super::*;
use crate::coupling::{GeometryParams, Topology};

fn tables(n: usize, topology: Topology) -> CouplingTables {
    CouplingTables::build(&GeometryParams::standard(n, topology).unwrap()).unwrap()
}

fn reference_model(n: usize, topology: Topology, omega: f64, method: CouplingMethod) -> Model {
    let t = tables(n, topology);
    let delta0 = DetuningConvention::Effective.resolve_delta0(-10.0, t.delta_l);
    Model::with_method(
        &t,
        DriveParams::standard(omega, delta0),
        DetuningProfile::uniform(n, delta0),
        method,
    )
    .unwrap()
}

/// Written directly from the model equations with the raw pair tables,
/// explicit complex conjugates and explicit neighbor lookup.
fn reference_rhs(
    s: &StateVector,
    t: &CouplingTables,
    p: &DriveParams,
    detuning: &[f64],
) -> StateVector {
    let n = s.len();
    let i = Complex64::i();
    let neighbor = |k: isize| -> f64 {
        let idx = match t.geometry.topology {
            Topology::Ring => k.rem_euclid(n as isize) as usize,
            Topology::Chain => {
                if k < 0 || k >= n as isize {
                    return 0.0;
                }
                k as usize
            }
        };
        s.rho22[idx]
    };
    let mut out = StateVector::uniform(n, 0.0, 0.0, Complex64::new(0.0, 0.0));
    for k in 0..n {
        let mut sum = Complex64::new(0.0, 0.0);
        for l in 0..n {
            if l != k {
                let kl = Complex64::new(t.gamma(l, k), t.delta(l, k)) / t.gamma_r;
                sum += kl * s.r[l];
            }
        }
        let nk = neighbor(k as isize - 1) + neighbor(k as isize + 1);
        let a = 0.25 * sum * s.r[k].conj() - i * 0.25 * p.omega * s.r[k].conj();
        let cc = a + a.conj();
        let z = s.rho22[k] - s.rho11[k];
        out.rho11[k] = cc.re + p.alpha * s.rho22[k] * nk + p.gamma31 * s.rho33[k] + p.gamma21 * s.rho22[k];
        out.rho22[k] = -cc.re - 2.0 * p.alpha * s.rho22[k] * nk + p.gamma32 * s.rho33[k]
            - p.gamma21 * s.rho22[k];
        out.rho33[k] = p.alpha * s.rho22[k] * nk - (p.gamma31 + p.gamma32) * s.rho33[k];
        out.r[k] = -(p.gamma_perp + i * detuning[k]) * s.r[k] + sum * z - i * p.omega * z
            - p.alpha * s.r[k] * nk;
    }
    out
}

fn state_strategy(n: usize) -> impl Strategy<Value = StateVector> {
    (
        prop::collection::vec((0.8f64..1.0, 0.0f64..0.1, -0.3f64..0.3, -0.3f64..0.3), n),
    )
        .prop_map(|(v,)| StateVector {
            rho11: v.iter().map(|x| x.0).collect(),
            rho22: v.iter().map(|x| x.1).collect(),
            rho33: v.iter().map(|x| 1.0 - x.0 - x.1).collect(),
            r: v.iter().map(|x| Complex64::new(x.2, x.3)).collect(),
        })
}

fn assert_close(a: &StateVector, b: &StateVector, tol: f64) {
    let (ya, yb) = (a.to_flat(), b.to_flat());
    let scale = ya.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (j, (x, y)) in ya.iter().zip(&yb).enumerate() {
        assert!((x - y).abs() <= tol * scale, "component {j}: {x} vs {y}");
    }
}

#[test]
fn dark_state_is_exact_fixed_point() {
    for topo in [Topology::Ring, Topology::Chain] {
        let m = reference_model(30, topo, 0.0, CouplingMethod::Auto);
        let d = m.rhs(&StateVector::ground(30)).unwrap();
        assert!(d.to_flat().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn ground_state_drive_channel() {
    for (topo, method) in [
        (Topology::Ring, CouplingMethod::Dense),
        (Topology::Chain, CouplingMethod::Fft),
    ] {
        let omega = Complex64::new(0.7, -0.2);
        let t = tables(64, topo);
        let mut p = DriveParams::standard(0.0, 3.0);
        p.omega = omega;
        let m = Model::with_method(&t, p, DetuningProfile::uniform(64, 3.0), method).unwrap();
        let d = m.rhs(&StateVector::ground(64)).unwrap();
        for k in 0..64 {
            assert_eq!(d.rho11[k], 0.0);
            assert_eq!(d.rho22[k], 0.0);
            assert_eq!(d.rho33[k], 0.0);
            assert_eq!(d.r[k], Complex64::i() * omega);
        }
    }
}

#[test]
fn rhs_matches_reference_evaluation() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for (n, topo) in [(7, Topology::Chain), (8, Topology::Ring), (61, Topology::Ring), (50, Topology::Chain)] {
        let t = tables(n, topo);
        let offsets: Vec<f64> = (0..n).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut p = DriveParams::standard(0.0, -90.0);
        p.omega = Complex64::new(0.9, 0.3);
        let det = DetuningProfile::with_offsets(-90.0, &offsets);
        let s = state_strategy(n).new_tree(&mut runner).unwrap().current();
        let expected = reference_rhs(&s, &t, &p, &det.delta_k);
        let got = rhs(&s, &t, &p, &det).unwrap();
        assert_close(&got, &expected, 1e-12);
    }
}

#[test]
fn fft_and_dense_agree() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for (n, topo) in [(5, Topology::Ring), (6, Topology::Chain), (120, Topology::Ring), (200, Topology::Chain), (97, Topology::Ring)] {
        let s = state_strategy(n).new_tree(&mut runner).unwrap().current();
        let dense = reference_model(n, topo, 0.95, CouplingMethod::Dense).rhs(&s).unwrap();
        let fft = reference_model(n, topo, 0.95, CouplingMethod::Fft).rhs(&s).unwrap();
        assert_close(&fft, &dense, 1e-12);
    }
}

#[test]
fn dimension_mismatch_rejected() {
    let t = tables(10, Topology::Ring);
    let p = DriveParams::standard(1.0, 0.0);
    assert!(Model::new(&t, p, DetuningProfile::uniform(9, 0.0)).is_err());
    let m = Model::new(&t, p, DetuningProfile::uniform(10, 0.0)).unwrap();
    assert!(m.rhs(&StateVector::ground(11)).is_err());
    let mut bad = StateVector::ground(10);
    bad.r.pop();
    assert!(m.rhs(&bad).is_err());
}

#[test]
fn zero_drive_integration_is_stationary() {
    let m = reference_model(60, Topology::Chain, 0.0, CouplingMethod::Auto);
    let s0 = StateVector::ground(60);
    let traj = integrate(&m, &s0, 0.0, &[1.0, 50.0, 200.0], &IntegratorConfig::default()).unwrap();
    for s in &traj.states {
        assert!(s.to_flat().iter().zip(s0.to_flat()).all(|(a, b)| (a - b).abs() <= 1e-12));
    }
    let steady = relax_to_steady(&m, &s0, &IntegratorConfig::default()).unwrap();
    assert!(steady.converged());
    assert_eq!(steady.residual, 0.0);
}

#[test]
fn integration_conserves_trace_and_is_deterministic() {
    let m = reference_model(120, Topology::Ring, 0.95, CouplingMethod::Auto);
    let mut s0 = m.seeded_uniform(0.99, 0.004);
    for k in 40..70 {
        s0.rho11[k] = 0.9;
        s0.rho22[k] = 0.04;
        s0.rho33[k] = 0.06;
    }
    let cfg = IntegratorConfig::default();
    let times: Vec<f64> = (1..=20).map(|i| i as f64 * 5.0).collect();
    let a = integrate(&m, &s0, 0.0, &times, &cfg).unwrap();
    let b = integrate(&m, &s0, 0.0, &times, &cfg).unwrap();
    assert_eq!(a.states, b.states);
    assert!(a.diagnostics.max_trace_error <= 100.0 * cfg.rel_tol);
    assert!(a.states.iter().all(|s| s.trace_error() <= 100.0 * cfg.rel_tol));
    assert!(a.diagnostics.validity_violation_at.is_none());
}

#[test]
fn invalid_sample_times_rejected() {
    let m = reference_model(10, Topology::Ring, 0.5, CouplingMethod::Auto);
    let s = StateVector::ground(10);
    let cfg = IntegratorConfig::default();
    assert!(integrate(&m, &s, 0.0, &[2.0, 1.0], &cfg).is_err());
    assert!(integrate(&m, &s, 1.0, &[0.5], &cfg).is_err());
}

#[test]
fn derivative_matches_short_integration() {
    let m = reference_model(48, Topology::Chain, 0.95, CouplingMethod::Auto);
    let mut s0 = m.seeded_uniform(0.95, 0.03);
    s0.r[10] += Complex64::new(0.05, -0.02);
    let f = m.rhs(&s0).unwrap().to_flat();
    let y0 = s0.to_flat();
    let cfg = IntegratorConfig::default();
    let error = |h: f64| -> f64 {
        let y = integrate(&m, &s0, 0.0, &[h], &cfg).unwrap().states[0].to_flat();
        y.iter()
            .zip(&y0)
            .zip(&f)
            .fold(0.0f64, |e, ((a, b), d)| e.max(((a - b) / h - d).abs()))
    };
    let (e1, e2) = (error(1e-3), error(5e-4));
    // Forward difference: first order in h.
    let ratio = e1 / e2;
    assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
}

#[test]
fn linear_response_on_uniform_ring() {
    let m = reference_model(120, Topology::Ring, 1e-3, CouplingMethod::Auto);
    let s = relax_to_steady(&m, &StateVector::ground(120), &IntegratorConfig::default()).unwrap();
    assert!(s.converged());

    // Closed form from the tables, independent of the model's row sum.
    let t = tables(120, Topology::Ring);
    let (g, d) = t.row_sums(0);
    let p = m.drive();
    let expected = Complex64::i() * p.omega / Complex64::new(p.gamma_perp + g, p.delta0 + d);
    assert!((uniform_linear_response(&m) - expected).norm() <= 1e-12 * expected.norm());
    // Effective convention places the uniform mode at δ_eff = −10.
    assert!((p.delta0 + d + 10.0).abs() < 0.01);
    for r in &s.state.r {
        assert!((r - expected).norm() <= 1e-3 * expected.norm(), "{r} vs {expected}");
    }
}

#[test]
fn single_branch_outside_window() {
    let cfg = IntegratorConfig::default();
    for (omega, rho11, rho22) in [(0.8, 0.99, 0.005), (1.1, 0.91, 0.0274)] {
        let m = reference_model(120, Topology::Ring, omega, CouplingMethod::Auto);
        for (a, b) in [(0.99, 0.004), (0.9, 0.04)] {
            let s = relax_to_steady(&m, &m.seeded_uniform(a, b), &cfg).unwrap();
            assert!(s.converged());
            assert!((s.state.rho11[0] - rho11).abs() < 0.02, "Ω {omega}: {}", s.state.rho11[0]);
            assert!((s.state.rho22[0] - rho22).abs() < 0.005);
            assert!(s.diagnostics.max_trace_error <= 100.0 * cfg.rel_tol);
        }
    }
}

#[test]
fn uniform_fixed_point_branches() {
    let t = tables(120, Topology::Ring);
    let delta0 = DetuningConvention::Effective.resolve_delta0(-10.0, t.delta_l);

    let dark = uniform_fixed_point(&DriveParams::standard(0.0, delta0), &t, (0.99, 0.004)).unwrap();
    assert!((dark.rho11 - 1.0).abs() < 1e-12 && dark.r.norm() < 1e-12);

    let p = DriveParams::standard(0.97, delta0);
    let low = uniform_fixed_point(&p, &t, (0.99, 0.004)).unwrap();
    let high = uniform_fixed_point(&p, &t, (0.9, 0.04)).unwrap();
    assert!(low.rho11 - high.rho11 > 0.03);

    let m = Model::new(&t, p, DetuningProfile::uniform(120, delta0)).unwrap();
    for root in [low, high] {
        let s = root.expand(120);
        assert!(m.rhs(&s).unwrap().max_abs() < 1e-10);
        assert!(s.trace_error() < 1e-13);
    }

    let chain = tables(20, Topology::Chain);
    assert!(uniform_fixed_point(&p, &chain, (0.99, 0.004)).is_err());
}

#[test]
fn trajectory_csv_layout() {
    let traj = Trajectory {
        times: vec![0.5],
        states: vec![StateVector::uniform(2, 0.9, 0.05, Complex64::new(0.0, -1.0))],
        diagnostics: RunDiagnostics::default(),
    };
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &traj).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "t,k,rho11,rho22,rho33,re_R,im_R,abs_R,arg_R");
    let fields: Vec<f64> = lines[2].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(fields[1], 1.0);
    assert_eq!(fields[7], 1.0);
    assert!((fields[8] + std::f64::consts::FRAC_PI_2).abs() < 1e-15);

    let mut buf = Vec::new();
    write_state_csv(&mut buf, &traj.states[0]).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("k,rho11"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_derivative_vanishes(s in state_strategy(23), ring in any::<bool>(), omega in -2.0f64..2.0) {
        let topo = if ring { Topology::Ring } else { Topology::Chain };
        let m = reference_model(23, topo, omega, CouplingMethod::Auto);
        let d = m.rhs(&s).unwrap();
        for k in 0..23 {
            let sum = d.rho11[k] + d.rho22[k] + d.rho33[k];
            let scale = d.rho11[k].abs() + d.rho22[k].abs() + d.rho33[k].abs();
            prop_assert!(sum.abs() <= 1e-14 * scale.max(1.0));
        }
    }

    #[test]
    fn ring_rotation_equivariance(s in state_strategy(64), shift in 0usize..64, fft in any::<bool>()) {
        let method = if fft { CouplingMethod::Fft } else { CouplingMethod::Dense };
        let m = reference_model(64, Topology::Ring, 0.95, method);
        let a = m.rhs(&s.rotate(shift)).unwrap();
        let b = m.rhs(&s).unwrap().rotate(shift);
        let (ya, yb) = (a.to_flat(), b.to_flat());
        for (x, y) in ya.iter().zip(&yb) {
            prop_assert!((x - y).abs() <= 1e-11 * (1.0 + y.abs()));
        }
    }
}
