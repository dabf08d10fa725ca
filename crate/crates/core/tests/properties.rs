use proptest::prelude::*;

use tcquench::analytics::{fit_power_law_exponent, predict_revival_envelope, DecayModelParams, RevivalPeak};
use tcquench::hilbert::{build_hamiltonian, diagonalize, ground_state, ModelParams, StateCoefficients};
use tcquench::phase_space::classical::ClassicalHamiltonian;
use tcquench::phase_space::{husimi_transform, wigner_transform, PhaseGrid};
use tcquench::protocols::tune_backward_critical;
use tcquench::qdyn::{quantum_survival, tau_grid};
use tcquench::spectral::{critical_coupling, strength_function};

/// (j, M, λ_i, λ_f) with ω = 2, ω₀ = 1.
fn quench() -> impl Strategy<Value = (u32, u32, f64, f64)> {
    (2u32..40).prop_flat_map(|two_j| (Just(two_j), 0..=two_j, 0.0..3.0, 0.0..3.0))
}

fn survival(params: &ModelParams, lambda_f: f64, taus: &[f64]) -> Vec<f64> {
    let psi = ground_state(&diagonalize(&build_hamiltonian(params)).unwrap());
    let es = diagonalize(&build_hamiltonian(&params.with_lambda(lambda_f))).unwrap();
    quantum_survival(&strength_function(&psi, &es).unwrap(), taus)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strength_function_is_a_distribution((two_j, m, li, lf) in quench()) {
        let params = ModelParams::new(two_j as f64 / 2.0, 2.0, 1.0, m as i64, li).unwrap();
        let psi = ground_state(&diagonalize(&build_hamiltonian(&params)).unwrap());
        let es = diagonalize(&build_hamiltonian(&params.with_lambda(lf))).unwrap();
        let sf = strength_function(&psi, &es).unwrap();
        prop_assert!((sf.total_weight() - 1.0).abs() < 1e-10);
        prop_assert!(sf.weights.iter().all(|&w| w >= 0.0));
        // mean energy is the initial-state expectation of H_f
        let h_f = build_hamiltonian(&params.with_lambda(lf));
        prop_assert!((sf.mean_energy() - h_f.expectation(&psi)).abs() < 1e-9 * (1.0 + h_f.norm()));
    }

    #[test]
    fn survival_is_bounded_and_time_symmetric((two_j, m, li, lf) in quench(), tau in 0.0..500.0) {
        let params = ModelParams::new(two_j as f64 / 2.0, 2.0, 1.0, m as i64, li).unwrap();
        let p = survival(&params, lf, &[0.0, tau, -tau]);
        prop_assert!((p[0] - 1.0).abs() < 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-10).contains(&p[1]));
        prop_assert!((p[1] - p[2]).abs() < 1e-12);
    }

    #[test]
    fn survival_is_invariant_under_energy_rescaling((two_j, m, li, lf) in quench(), s in 0.1..10.0) {
        let params = ModelParams::new(two_j as f64 / 2.0, 2.0, 1.0, m as i64, li).unwrap();
        let taus = tau_grid(300.0, 31);
        let a = survival(&params, lf, &taus);
        let b = survival(&params.rescaled(s), lf * s, &taus);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn eigenvalues_sum_to_trace((two_j, m, li, _lf) in quench()) {
        let params = ModelParams::new(two_j as f64 / 2.0, 2.0, 1.0, m as i64, li).unwrap();
        let h = build_hamiltonian(&params);
        let es = diagonalize(&h).unwrap();
        let trace: f64 = h.to_dense().trace();
        let sum: f64 = es.energies.iter().sum();
        prop_assert!((trace - sum).abs() < 1e-9 * (1.0 + trace.abs()));
        prop_assert!(es.energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn tuned_coupling_puts_the_initial_minimum_on_the_esqpt(j in 20u32..300, ratio in 1.2..8.0, omega in 1.5..4.0) {
        let lc = critical_coupling(omega, 1.0);
        let shared = ModelParams::new(j as f64, omega, 1.0, 2 * j as i64, 0.0).unwrap();
        let li = ratio * lc;
        let lf = tune_backward_critical(&shared, li).unwrap();
        prop_assert!(lf > lc && lf < li);
        let (x0, _) = ClassicalHamiltonian::new(&shared.with_lambda(li)).quasipotential_minimum();
        let v = ClassicalHamiltonian::new(&shared.with_lambda(lf)).value(x0, 0.0).unwrap();
        prop_assert!((v / shared.energy_scale() - 1.0).abs() < 1e-9, "v = {v}");
    }

    #[test]
    fn power_law_fit_recovers_exact_exponents(gamma in -2.0..0.0f64, a in 0.01..10.0f64, t1 in 10.0..1000.0f64, n in 3usize..8) {
        let peaks: Vec<RevivalPeak> = (1..=n)
            .map(|k| {
                let tau = t1 * k as f64;
                RevivalPeak { tau, height: a * tau.powf(gamma), prominence: 0.1 }
            })
            .collect();
        let fit = fit_power_law_exponent(&peaks).unwrap();
        prop_assert!((fit.exponent - gamma).abs() < 1e-9);
        prop_assert!((fit.r_squared - 1.0).abs() < 1e-9 || gamma.abs() < 1e-6);
    }

    #[test]
    fn revival_envelope_decreases(vprime in 0.1..5.0f64, beta in -1.0..1.0f64, sx in 0.3..2.0f64, sp in 0.3..2.0f64) {
        prop_assume!(beta.abs() > 1e-3);
        let m = DecayModelParams {
            e0: 100.0,
            vprime,
            sigma_x: sx,
            sigma_p: sp,
            beta,
            tau0: 300.0,
            norm_n: 1.0 / (2.0 * std::f64::consts::PI * sx * sp),
            energy_scale: 200.0,
        };
        let peaks = predict_revival_envelope(&m, &[0, 1, 2, 3, 4, 5]).unwrap();
        prop_assert!((peaks[0].height - m.p0()).abs() < 1e-12);
        prop_assert!(peaks.windows(2).all(|w| w[1].height < w[0].height && w[1].tau > w[0].tau));
    }

    #[test]
    fn wigner_and_husimi_of_random_states_are_normalized(
        coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..7)
    ) {
        let dim = coeffs.len();
        prop_assume!(coeffs.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3);
        let psi = StateCoefficients {
            amplitudes: coeffs.iter().map(|&(a, b)| num_complex::Complex64::new(a, b)).collect(),
            tau: 0.0,
        }
        .normalized();
        prop_assert_eq!(psi.dim(), dim);
        let grid = PhaseGrid::new(-8.0, 8.0, 161, -8.0, 8.0, 161).unwrap();
        let w = wigner_transform(&psi, &grid).unwrap();
        prop_assert!((w.integral() - 1.0).abs() < 1e-6, "{}", w.integral());
        // |W| ≤ 1/π
        prop_assert!(w.values.iter().all(|v| v.abs() <= 1.0 / std::f64::consts::PI + 1e-9));
        let q = husimi_transform(&w, &grid).unwrap();
        prop_assert!((q.integral() - 1.0).abs() < 1e-4, "{}", q.integral());
        prop_assert!(q.values.iter().all(|&v| v > -1e-9));
    }
}
