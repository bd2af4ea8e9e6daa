use proptest::prelude::*;
use tfim_collective::{collective_observables, hp_predictions, perturbative_xi_for, CollectiveSolver, SpinSectorBasis};
use tfim_core::operator::SpinOperator;
use tfim_core::{Dimension, ExactSolver, ModelSpec, ObservableReport};

fn assert_close(a: &ObservableReport, b: &ObservableReport, tol: f64) {
    let pairs = [
        ("jx", a.jx_mean.value, b.jx_mean.value),
        ("var_jy", a.var_jy.value, b.var_jy.value),
        ("var_jz", a.var_jz.value, b.var_jz.value),
        ("qv", a.qv_jz.value, b.qv_jz.value),
        ("qfi", a.qfi_jz.unwrap().value, b.qfi_jz.unwrap().value),
        ("xi", a.xi_r_sq.value, b.xi_r_sq.value),
        ("energy", a.energy.unwrap().value, b.energy.unwrap().value),
    ];
    for (name, x, y) in pairs {
        assert!((x - y).abs() < tol * y.abs().max(1.0), "{name} N={} g={} T={}: {x} vs {y}", a.n_sites, a.g, a.temperature);
    }
}

#[test]
fn matches_oracle_on_grid() {
    for n in [2, 3, 6, 9, 12] {
        for g in [0.4, 1.0, 1.7] {
            for t in [0.0, 0.1, 0.8, 3.0] {
                let got = collective_observables(n, g, t).unwrap();
                let want = ExactSolver::new(&ModelSpec::infinite_range(n, g, t)).unwrap().observables(t).unwrap();
                assert_close(&got, &want, 1e-9);
            }
        }
    }
}

#[test]
fn log_partition_matches_oracle() {
    for (n, g, t) in [(8, 0.5, 0.3), (11, 1.2, 1.0), (12, 2.0, 5.0)] {
        let ed = ExactSolver::new(&ModelSpec::infinite_range(n, g, t)).unwrap();
        let got = CollectiveSolver::new(n, g).unwrap().log_partition(t).unwrap();
        assert!((got - ed.log_partition(t)).abs() < 1e-10, "{got} vs {}", ed.log_partition(t));
    }
}

#[test]
fn two_spin_ground_energy() {
    for g in [0.0, 0.7, 2.5] {
        let ed = ExactSolver::new(&ModelSpec::infinite_range(2, g, 0.0)).unwrap();
        let got = CollectiveSolver::new(2, g).unwrap().ground_energy();
        assert!((got - ed.ground_energy()).abs() < 1e-12);
    }
}

#[test]
fn sectors_cover_hilbert_space() {
    let n = 14;
    let total: f64 = SpinSectorBasis::all(n)
        .iter()
        .map(|s| s.dim() as f64 * s.ln_degeneracy().exp())
        .sum();
    assert!((total - (1u64 << n) as f64).abs() < 1e-6);
}

#[test]
fn large_system_is_tractable() {
    let r = collective_observables(1000, 0.5, 0.0).unwrap();
    let hp = hp_predictions(1000, 0.5).unwrap();
    assert!((r.jx_mean.value / hp.jx_mean - 1.0).abs() < 0.01);
    let r = collective_observables(400, 1.5, 0.2).unwrap();
    assert!(r.qv_jz.value > 0.0 && r.qfi_jz.unwrap().value >= 4.0 * r.qv_jz.value * (1.0 - 1e-9));
}

#[test]
fn paramagnet_approaches_minimum_uncertainty() {
    let g = 2.0;
    let ratio = |n: usize| {
        let r = collective_observables(n, g, 0.0).unwrap();
        4.0 * r.var_jy.value * r.var_jz.value / (r.jx_mean.value * r.jx_mean.value)
    };
    let ns = [50, 100, 200, 400, 800];
    let devs: Vec<f64> = ns.iter().map(|&n| (ratio(n) - 1.0).abs()).collect();
    assert!(devs.windows(2).all(|p| p[1] < p[0]), "{devs:?}");
    for (n, d) in ns.iter().zip(&devs) {
        assert!(*d < 2.0 / (*n as f64).sqrt(), "N={n}: {d}");
    }
}

#[test]
fn critical_squeezing_scales_as_n_to_minus_one_third() {
    let ns = [64usize, 128, 256, 512, 1024];
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| collective_observables(n, 1.0, 0.0).unwrap().xi_r_sq.value.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 1.0 / 3.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn strong_field_squeezing() {
    let g = 20.0;
    let r = collective_observables(200, g, 0.0).unwrap();
    let want = perturbative_xi_for(Dimension::Infinite, g);
    assert!((r.xi_r_sq.value - want).abs() < 5e-3, "{} vs {want}", r.xi_r_sq.value);
}

#[test]
fn jz_commutes_with_total_spin() {
    let n = 6;
    let (jx, jy, jz) = (SpinOperator::jx(n).dense(), SpinOperator::jy(n).dense(), SpinOperator::jz(n).dense());
    let j2 = &jx * &jx + &jy * &jy + &jz * &jz;
    let comm = &j2 * &jz - &jz * &j2;
    for i in 0..comm.nrows() {
        for j in 0..comm.ncols() {
            assert!(comm[(i, j)].norm() < 1e-12);
        }
    }
}

#[test]
fn squeezing_and_fisher_coincide_at_finite_temperature() {
    for (g, t) in [(0.5, 0.1), (1.0, 0.3), (1.5, 0.2), (0.8, 1.0)] {
        let r = collective_observables(1000, g, t).unwrap();
        let (xi, chi) = (r.xi_r_sq.value, r.chi_sq.unwrap().value);
        assert!((xi - chi).abs() < 1e-3 * chi, "g={g} T={t}: {xi} vs {chi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_points_match_oracle(n in 2usize..=10, g in 0.0f64..3.0, t in prop_oneof![Just(0.0), 0.05f64..4.0]) {
        let got = collective_observables(n, g, t).unwrap();
        let want = ExactSolver::new(&ModelSpec::infinite_range(n, g, t)).unwrap().observables(t).unwrap();
        assert_close(&got, &want, 1e-9);
    }
}

#[test]
fn ordered_ground_state_keeps_the_sandwich() {
    for g in [0.2, 0.5] {
        let r = collective_observables(100, g, 0.0).unwrap();
        let (qfi, qv) = (r.qfi_jz.unwrap().value, r.qv_jz.value);
        assert!((qfi - 4.0 * qv).abs() < 1e-9 * qfi, "g={g}: {qfi} vs 4 x {qv}");
        assert!(tfim_core::metrology::check_inequality_chain(&r, 0.0, 1e-9).is_empty(), "g={g}");
    }
}
