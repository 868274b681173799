mod common;

use common::{expm_taylor, halfplane_quadrature, max_abs_diff, random_density, rng, CMat};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qmb::linalg::min_eigenvalue;
use qmb::spectrum::{mixing_angle, qubit_hamiltonian};
use qmb::{
    g_coefficient, ideal_channel, readout_channel, partial_trace, BasisAngle, IdealVariant, Outcome, Snr,
    SystemParams, TraceOut,
};

/// Closed-form POVM coefficients against direct 2-D quadrature over the halfplane.
#[test]
fn g_coefficients_match_halfplane_quadrature() {
    for alpha in [0.5, 1.0, 2.0] {
        let lower = halfplane_quadrature(alpha, 6, true);
        let upper = halfplane_quadrature(alpha, 6, false);
        let mut worst: f64 = 0.0;
        for n in 0..=6 {
            for m in 0..=6 {
                // outcome + with χ > 0 and outcome - with χ < 0 select the lower halfplane
                for (x, chi_sign, oracle) in [
                    (Outcome::Plus, 1.0, &lower),
                    (Outcome::Minus, -1.0, &lower),
                    (Outcome::Minus, 1.0, &upper),
                    (Outcome::Plus, -1.0, &upper),
                ] {
                    let g = g_coefficient(alpha, x, n, m, chi_sign);
                    worst = worst.max((g - oracle[(n, m)]).norm());
                }
            }
        }
        assert!(worst <= 1e-8, "alpha {alpha}: max deviation {worst:.3e}");
    }
}

/// `Σ c_nm Qₙ ρ Qₘ†` assembled from quadrature coefficients and Taylor-series
/// propagators, sharing nothing with the crate's channel code.
fn oracle_apply(p: &SystemParams, x: Outcome, rho: &CMat) -> CMat {
    let coeffs = halfplane_quadrature(p.alpha, p.n_max, x == Outcome::Plus);
    let t = p.t_m();
    let q: Vec<CMat> = (0..=p.n_max)
        .map(|n| expm_taylor(&(qubit_hamiltonian(p, n as f64) * C64::new(0.0, -t))))
        .collect();
    let mut out = CMat::zeros(4, 4);
    for n in 0..=p.n_max {
        for m in 0..=p.n_max {
            out += &q[n] * rho * q[m].adjoint() * coeffs[(n, m)];
        }
    }
    out
}

#[test]
fn readout_channel_matches_independent_assembly() {
    let p = SystemParams::from_detuning(102.0, 3.8, 5.0, 0.7, 9).unwrap();
    let mut r = rng(11);
    for x in Outcome::BOTH {
        let e = readout_channel(&p, x).unwrap();
        for _ in 0..3 {
            let rho = random_density(&mut r, 4);
            let got = e.apply(&rho).unwrap();
            let want = oracle_apply(&p, x, &rho);
            assert!(max_abs_diff(&got, &want) < 1e-9, "{x:?}: {:.3e}", max_abs_diff(&got, &want));
        }
    }
}

#[test]
fn choi_contraction_agrees_with_kraus_evaluation() {
    let mut r = rng(7);
    let p = SystemParams::fig2(5.0);
    let channels = [
        readout_channel(&p, Outcome::Plus).unwrap(),
        readout_channel(&p, Outcome::Minus).unwrap(),
        ideal_channel(&p, mixing_angle(&p, 4.0).unwrap(), Outcome::Plus, IdealVariant::Literal, Snr::Finite).unwrap(),
    ];
    for _ in 0..20 {
        let rho = random_density(&mut r, 4);
        for e in &channels {
            assert!(max_abs_diff(&e.apply(&rho).unwrap(), &e.apply_via_choi(&rho)) < 1e-13);
        }
    }
}

#[test]
fn choi_index_convention() {
    let e = readout_channel(&SystemParams::fig2(5.0), Outcome::Plus).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let mut unit = CMat::zeros(4, 4);
            unit[(i, j)] = C64::new(1.0, 0.0);
            let out = e.apply_unchecked(&unit);
            for a in 0..4 {
                for b in 0..4 {
                    assert!((e.choi()[(a * 4 + i, b * 4 + j)] - out[(a, b)]).norm() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn outcome_pair_complete_and_positive() {
    for chi in [0.5, 5.0, 200.0, -5.0] {
        let p = SystemParams::fig2(chi);
        let plus = readout_channel(&p, Outcome::Plus).unwrap();
        let minus = readout_channel(&p, Outcome::Minus).unwrap();
        let reduced = partial_trace(&(plus.choi() + minus.choi()), TraceOut::Output, 4, 4).unwrap();
        assert!(max_abs_diff(&reduced, &CMat::identity(4, 4)) <= 1e-12, "chi {chi}");
        assert!(min_eigenvalue(plus.choi()) >= -1e-10);
        assert!(min_eigenvalue(minus.choi()) >= -1e-10);
    }
}

#[test]
fn uncoupled_qubits_reduce_to_noisy_single_qubit_measurement() {
    let p = SystemParams::from_detuning(102.0, 0.0, 5.0, 2.0, 40).unwrap();
    for x in Outcome::BOTH {
        let e = readout_channel(&p, x).unwrap();
        let f = ideal_channel(&p, BasisAngle::BARE, x, IdealVariant::Diagonal, Snr::Finite).unwrap();
        assert!(max_abs_diff(e.choi(), f.choi()) < 1e-12);
    }
}

#[test]
fn finite_snr_references_form_an_instrument() {
    let p = SystemParams::fig2(5.0);
    for g in [0.0, 0.01, mixing_angle(&p, 0.0).unwrap().gamma()] {
        let basis = BasisAngle::new(g).unwrap();
        let sum = ideal_channel(&p, basis, Outcome::Plus, IdealVariant::Diagonal, Snr::Finite).unwrap().choi()
            + ideal_channel(&p, basis, Outcome::Minus, IdealVariant::Diagonal, Snr::Finite).unwrap().choi();
        let reduced = partial_trace(&sum, TraceOut::Output, 4, 4).unwrap();
        assert!(max_abs_diff(&reduced, &CMat::identity(4, 4)) < 1e-12);
    }
}

#[test]
fn post_measurement_state_of_ground_state() {
    // |00⟩ is an eigenstate of every Fock-sector Hamiltonian, so the readout
    // leaves it in place and reports + with the Gaussian-tail probability.
    let p = SystemParams::fig2(5.0);
    let mut rho = CMat::zeros(4, 4);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    let out = readout_channel(&p, Outcome::Plus).unwrap().apply(&rho).unwrap();
    let prob = 0.5 * (1.0 + libm::erf(p.alpha));
    assert!((out[(0, 0)].re - prob).abs() < 1e-12);
    assert!((out.trace().re - prob).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn readout_is_cp_and_complete(
        alpha in 0.0f64..3.0,
        chi in prop_oneof![-30.0f64..-0.2, 0.2f64..30.0],
        delta0 in -150.0f64..150.0,
        j in -10.0f64..10.0,
    ) {
        let n_max = SystemParams::recommended_n_max(alpha);
        let p = SystemParams::from_detuning(delta0, j, chi, alpha, n_max).unwrap();
        let plus = readout_channel(&p, Outcome::Plus).unwrap();
        let minus = readout_channel(&p, Outcome::Minus).unwrap();
        let reduced = partial_trace(&(plus.choi() + minus.choi()), TraceOut::Output, 4, 4).unwrap();
        prop_assert!(max_abs_diff(&reduced, &CMat::identity(4, 4)) <= 1e-11);
        prop_assert!(min_eigenvalue(plus.choi()) >= -1e-10);
        prop_assert!(min_eigenvalue(minus.choi()) >= -1e-10);
    }
}
