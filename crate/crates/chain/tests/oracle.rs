use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfim_chain::correlators::{yy_matrix, zz_matrix};
use tfim_chain::dynamic::complex_time_zz;
use tfim_chain::pfaffian::{determinant, pfaffian, Square};
use tfim_chain::{
    chain_observables, dynamic_zz_correlation, dynamical_structure_factor, qfi_from_dsf, qv_jz, solve_chain,
    transverse_magnetization, var_jy, ChainOptions, DsfWindow, QfiParams,
};
use tfim_core::operator::SpinOperator;
use tfim_core::{ExactSolver, ModelSpec};

fn oracle(n: usize, g: f64, t: f64) -> ExactSolver {
    ExactSolver::new(&ModelSpec::chain(n, g, t)).unwrap()
}

#[test]
fn many_body_spectrum_matches_oracle() {
    let sol = solve_chain(8, 0.5, 0.0).unwrap();
    let ed = oracle(8, 0.5, 0.0).spectrum();
    for (a, b) in sol.many_body_spectrum().iter().zip(&ed) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn transverse_magnetization_matches_oracle() {
    for (g, t) in [(0.6, 0.0), (0.3, 0.5), (1.5, 2.0)] {
        let sol = solve_chain(8, g, t).unwrap();
        let want = oracle(8, g, t).observables(t).unwrap().jx_mean.value;
        assert!((transverse_magnetization(&sol) - want).abs() < 1e-10);
    }
}

#[test]
fn static_pair_correlators_match_oracle() {
    for (g, t) in [(0.5, 0.0), (0.8, 0.7)] {
        let sol = solve_chain(8, g, t).unwrap();
        let ed = oracle(8, g, t);
        let (yy, zz) = (yy_matrix(&sol), zz_matrix(&sol));
        for i in 0..8 {
            for j in 0..8 {
                if i == j {
                    assert_eq!(yy.get(i, i), 0.25);
                    continue;
                }
                let want_y = ed.expectation(&SpinOperator::sy_sy(8, i, j), t).unwrap();
                let want_z = ed.expectation(&SpinOperator::sz_sz(8, i, j), t).unwrap();
                assert!((yy.get(i, j) - want_y).abs() < 1e-10, "yy({i},{j}) g={g}: {} vs {want_y}", yy.get(i, j));
                assert!((zz.get(i, j) - want_z).abs() < 1e-10, "zz({i},{j}) g={g}: {} vs {want_z}", zz.get(i, j));
            }
        }
    }
}

#[test]
fn var_jy_matches_oracle() {
    let sol = solve_chain(10, 0.62, 0.0).unwrap();
    let want = oracle(10, 0.62, 0.0).observables(0.0).unwrap().var_jy.value;
    assert!((var_jy(&sol) - want).abs() < 1e-10);
}

#[test]
fn var_jy_large_field_expansion() {
    let (n, g) = (100, 20.0);
    let sol = solve_chain(n, g, 0.0).unwrap();
    let ratio = var_jy(&sol) / (n as f64 / 4.0);
    assert!((ratio - (1.0 - 1.0 / (2.0 * g))).abs() < 3.0 / (g * g), "{ratio}");
}

#[test]
fn real_time_correlator_matches_lehmann() {
    let (n, g, t) = (8, 1.0, 0.5);
    let sol = solve_chain(n, g, t).unwrap();
    let ed = oracle(n, g, t);
    let times = [C64::new(0.5, 0.0), C64::new(1.0, 0.0), C64::new(0.0, -0.8)];
    for i in 0..n {
        for j in 0..n {
            let want = ed.correlation(&SpinOperator::sz(n, i), &SpinOperator::sz(n, j), &times, t).unwrap();
            for (z, w) in times.iter().zip(&want) {
                let got = complex_time_zz(&sol, i, j, *z).unwrap();
                assert!((got.value - w).norm() < 1e-8, "({i},{j}) z={z}: {} vs {w}", got.value);
                assert!(!got.ill_conditioned);
            }
        }
    }
}

#[test]
fn hermiticity_of_time_correlator() {
    let sol = solve_chain(7, 0.9, 0.4).unwrap();
    for (i, j, t) in [(0, 3, 1.3), (2, 6, 0.4), (5, 1, 2.2)] {
        let a = dynamic_zz_correlation(&sol, i, j, t).unwrap().value;
        let b = dynamic_zz_correlation(&sol, j, i, -t).unwrap().value;
        assert!((a - b.conj()).norm() < 1e-12);
    }
    let d = dynamic_zz_correlation(&sol, 3, 3, 0.0).unwrap();
    assert!((d.value.re - 0.25).abs() < 1e-12);
}

#[test]
fn qv_matches_oracle() {
    for (g, t) in [(1.0, 0.5), (0.5, 0.25), (0.7, 0.0)] {
        let sol = solve_chain(8, g, t).unwrap();
        let q = qv_jz(&sol).unwrap();
        let want = oracle(8, g, t).observables(t).unwrap().qv_jz.value;
        assert!((q.qv - want).abs() < 1e-6, "g={g} T={t}: {} vs {want}", q.qv);
        assert!(q.converged);
    }
}

#[test]
fn qfi_from_dsf_within_one_percent() {
    for beta in [1.0, 2.0, 4.0] {
        let sol = solve_chain(8, 1.0, 1.0 / beta).unwrap();
        let q = qfi_from_dsf(&sol, &QfiParams::default()).unwrap();
        let want = oracle(8, 1.0, 1.0 / beta).observables(1.0 / beta).unwrap().qfi_jz.unwrap().value;
        assert!((q.qfi - want).abs() < 1e-2 * want, "beta={beta}: {} vs {want}", q.qfi);
        assert!(!q.truncated && !q.ill_conditioned);
    }
}

#[test]
fn structure_factor_sum_rule() {
    let sol = solve_chain(6, 1.0, 0.5).unwrap();
    let dsf = dynamical_structure_factor(&sol, &DsfWindow { t_max: 40.0, samples: 1024, sigma: 8.0 }).unwrap();
    let total: f64 = dsf.s.iter().sum::<f64>() * dsf.d_omega();
    let c0 = tfim_chain::var_jz(&sol);
    assert!((total - c0).abs() < 1e-10 * c0);
    assert!(!dsf.truncated);
}

#[test]
fn report_satisfies_sandwich() {
    let sol = solve_chain(10, 0.5, 0.2).unwrap();
    let r = chain_observables(&sol, &ChainOptions::default()).unwrap();
    let (qfi, qv) = (r.qfi_jz.unwrap().value, r.qv_jz.value);
    assert!(4.0 * qv <= qfi * (1.0 + 1e-6) && qfi <= 12.0 * qv * (1.0 + 1e-6));
    assert!(r.inverse_xi_sq().value <= r.inverse_chi_sq().unwrap().value * (1.0 + 1e-6));
}

#[test]
fn random_pfaffian_squares_to_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let mut a = Square::zeros(10);
        for i in 0..10 {
            for j in i + 1..10 {
                let v: f64 = rng.gen_range(-1.0..1.0);
                a.set(i, j, v);
                a.set(j, i, -v);
            }
        }
        let pf = pfaffian(&a).unwrap();
        let det = determinant(&a);
        assert!((pf * pf - det).abs() < 1e-8 * det.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn chain_matches_oracle(n in 4usize..=12, g in 0.3f64..2.0, t in prop_oneof![Just(0.0), 0.2f64..2.0]) {
        let sol = solve_chain(n, g, t).unwrap();
        let opts = ChainOptions { compute_qfi: n <= 10, qfi: QfiParams::default() };
        let r = chain_observables(&sol, &opts).unwrap();
        let e = oracle(n, g, t).observables(t).unwrap();
        prop_assert!((r.jx_mean.value - e.jx_mean.value).abs() < 1e-8);
        prop_assert!((r.var_jy.value - e.var_jy.value).abs() < 1e-8);
        prop_assert!((r.var_jz.value - e.var_jz.value).abs() < 1e-8);
        prop_assert!((r.xi_r_sq.value - e.xi_r_sq.value).abs() < 1e-8);
        prop_assert!((r.energy.unwrap().value - e.energy.unwrap().value).abs() < 1e-8);
        prop_assert!((r.qv_jz.value - e.qv_jz.value).abs() < 1e-6, "qv {} vs {}", r.qv_jz.value, e.qv_jz.value);
        if let Some(q) = r.qfi_jz {
            let want = e.qfi_jz.unwrap().value;
            prop_assert!((q.value - want).abs() < 1e-2 * want, "qfi {} vs {}", q.value, want);
        }
    }
}

#[test]
fn ordered_ground_state_keeps_the_sandwich() {
    let r = chain_observables(&solve_chain(16, 0.1, 0.0).unwrap(), &ChainOptions::default()).unwrap();
    let (qfi, qv) = (r.qfi_jz.unwrap().value, r.qv_jz.value);
    assert!((qfi - 4.0 * qv).abs() < 1e-9 * qfi, "{qfi} vs 4 x {qv}");
    assert!(tfim_core::metrology::check_inequality_chain(&r, 0.0, 1e-9).is_empty());
}
